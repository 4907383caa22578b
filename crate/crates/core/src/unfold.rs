//! Unfolding a polygon along an edge word: gates, clearance and the period map.
//!
//! Copy `i` of the chain is `A_i(P)` with `A_0 = id` and
//! `A_i = A_{i−1} ∘ ρ_{seq[i]}`, where `ρ_j` is the affine reflection across
//! edge `j`. The ray leaves edge `seq[0]` of copy 0 and must pass through
//! gate `i`, which is edge `seq[i]` of copy `i − 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::billiard::{angle_of, Trajectory};
use crate::comb_type::{validate_word, CombError};
use crate::geometry::{cross, unit, Affine2, GeometryError, Mat2, Polygon, Vec2};
use crate::group::{edge_reflection, Dihedral};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnfoldError {
    #[error("ray is parallel to gate {0}")]
    ParallelRay(usize),
    #[error("start direction does not point into the polygon")]
    OutwardDirection,
    #[error("period map is not a translation")]
    NotATranslation,
    #[error("word must start and end on the same edge")]
    NotClosed,
    #[error("word must have even length")]
    OddLength,
    #[error(transparent)]
    Word(#[from] CombError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Edge `edge` of copy `copy`, as a planar segment from the image of
/// `v_edge` to the image of `v_{edge+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub copy: usize,
    pub edge: usize,
    pub a: Vec2,
    pub b: Vec2,
}

impl Gate {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    /// Unit vector along the gate; `p_i` is the component along it.
    pub fn axis(&self) -> Vec2 {
        (self.b - self.a).normalize()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnfoldChain {
    pub seq: Vec<usize>,
    pub maps: Vec<Affine2Repr>,
    pub copies: Vec<Vec<Vec2>>,
    pub gates: Vec<Gate>,
}

/// Serializable form of [`Affine2`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine2Repr {
    pub linear: Mat2,
    pub translation: Vec2,
}

impl From<Affine2> for Affine2Repr {
    fn from(a: Affine2) -> Self {
        Self { linear: a.linear, translation: a.translation }
    }
}

impl From<Affine2Repr> for Affine2 {
    fn from(a: Affine2Repr) -> Self {
        Affine2 { linear: a.linear, translation: a.translation }
    }
}

impl UnfoldChain {
    pub fn map(&self, i: usize) -> Affine2 {
        self.maps[i].into()
    }

    /// The last map of the chain.
    pub fn composed(&self) -> Affine2 {
        self.map(self.maps.len() - 1)
    }
}

fn check_seq(p: &Polygon, seq: &[usize]) -> Result<(), UnfoldError> {
    validate_word(seq, false)?;
    for &e in seq {
        p.check_edge(e)?;
    }
    Ok(())
}

pub fn unfold_chain(p: &Polygon, seq: &[usize]) -> Result<UnfoldChain, UnfoldError> {
    check_seq(p, seq)?;
    let mut maps = vec![Affine2::identity()];
    for &e in &seq[1..] {
        let prev = *maps.last().unwrap();
        maps.push(prev.compose(&p.reflection(e)));
    }
    let copies = maps.iter().map(|m| p.vertices().iter().map(|&v| m.apply(v)).collect()).collect();
    let gates = (1..seq.len())
        .map(|i| {
            let (a, b) = p.edge(seq[i]);
            Gate { copy: i - 1, edge: seq[i], a: maps[i - 1].apply(a), b: maps[i - 1].apply(b) }
        })
        .collect();
    Ok(UnfoldChain { seq: seq.to_vec(), maps: maps.into_iter().map(Into::into).collect(), copies, gates })
}

/// Signed position of the ray's crossing along each gate, measured from `a`.
fn gate_crossings(chain: &UnfoldChain, z0: Vec2, d: Vec2) -> Result<Vec<f64>, UnfoldError> {
    chain
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let e = g.b - g.a;
            let den = cross(d, e);
            if den.abs() < 1e-14 * e.norm() {
                return Err(UnfoldError::ParallelRay(i + 1));
            }
            // z0 + s·d = a + u·e, u in units of the full edge
            let u = cross(d, z0 - g.a) / den;
            Ok(u * e.norm())
        })
        .collect()
}

/// Worst clearance `Ω` of the ray from `(seq[0], x)` at angle `θ` past every gate
/// endpoint. Positive iff the billiard path strikes `seq[1..]` in order with
/// strict interior crossings.
pub fn clearance(p: &Polygon, seq: &[usize], x: f64, theta: f64) -> Result<f64, UnfoldError> {
    if seq.len() < 2 || seq[0] != seq[seq.len() - 1] {
        return Err(UnfoldError::NotClosed);
    }
    let chain = unfold_chain(p, seq)?;
    clearance_on(p, &chain, x, theta)
}

pub fn clearance_on(p: &Polygon, chain: &UnfoldChain, x: f64, theta: f64) -> Result<f64, UnfoldError> {
    let d = unit(theta);
    if d.dot(&p.inward_normal(chain.seq[0])) <= 0.0 {
        return Err(UnfoldError::OutwardDirection);
    }
    let z0 = p.point_on_edge(chain.seq[0], x);
    let us = gate_crossings(chain, z0, d)?;
    Ok(chain.gates.iter().zip(us).map(|(g, u)| u.min(g.length() - u)).fold(f64::INFINITY, f64::min))
}

/// Affine pieces `(c, s)` with `Ω(x) = min_j (c_j + s_j·x)` for a fixed direction.
pub fn clearance_pieces(p: &Polygon, chain: &UnfoldChain, theta: f64) -> Result<Vec<(f64, f64)>, UnfoldError> {
    let d = unit(theta);
    if d.dot(&p.inward_normal(chain.seq[0])) <= 0.0 {
        return Err(UnfoldError::OutwardDirection);
    }
    let (a, b) = p.edge(chain.seq[0]);
    let u0 = gate_crossings(chain, a, d)?;
    let u1 = gate_crossings(chain, b, d)?;
    let mut pieces = Vec::with_capacity(2 * u0.len());
    for ((g, lo), hi) in chain.gates.iter().zip(u0).zip(u1) {
        pieces.push((lo, hi - lo));
        pieces.push((g.length() - lo, lo - hi));
    }
    Ok(pieces)
}

/// Closed form of a periodic word: append the start edge unless already present.
pub fn closed_word(seq: &[usize]) -> Vec<usize> {
    let mut w = seq.to_vec();
    if w.len() > 1 && w[0] == w[w.len() - 1] {
        return w;
    }
    if let Some(&first) = seq.first() {
        w.push(first);
    }
    w
}

/// Exact linear part of the period map, when the polygon is rational.
pub fn period_element(p: &Polygon, seq: &[usize]) -> Option<Dihedral> {
    let closed = closed_word(seq);
    let mut g = Dihedral::identity(p.dihedral_order()?);
    for &e in &closed[1..] {
        g = g.compose(&edge_reflection(p, e)?);
    }
    Some(g)
}

/// The map from copy 0 to the copy reached after the full period.
pub fn period_map(p: &Polygon, seq: &[usize]) -> Result<Affine2, UnfoldError> {
    Ok(unfold_chain(p, &closed_word(seq))?.composed())
}

/// Direction `D(P)` of the translation realising the period, if the period
/// map is a translation.
pub fn closing_direction(p: &Polygon, seq: &[usize]) -> Result<f64, UnfoldError> {
    let closed = closed_word(seq);
    if (closed.len() - 1) % 2 != 0 {
        return Err(UnfoldError::OddLength);
    }
    let map = period_map(p, seq)?;
    let translation_linear = match period_element(p, seq) {
        Some(g) => g.is_identity(),
        None => (map.linear - Mat2::identity()).abs().max() < 1e-10,
    };
    if !translation_linear || map.translation.norm() < 1e-12 {
        return Err(UnfoldError::NotATranslation);
    }
    Ok(angle_of(map.translation))
}

/// Rotation angle of the period map's linear part, in `(−π, π]`.
pub fn period_rotation(p: &Polygon, seq: &[usize]) -> Result<f64, UnfoldError> {
    let m = period_map(p, seq)?.linear;
    Ok(m[(1, 0)].atan2(m[(0, 0)]))
}

/// Start point and hit points of a trajectory carried into the unfolded plane.
pub fn unfold_trajectory(p: &Polygon, tr: &Trajectory) -> Vec<Vec2> {
    let mut map = Affine2::identity();
    let mut out = vec![tr.start.position(p)];
    for h in &tr.hits {
        out.push(map.apply(h.position));
        map = map.compose(&p.reflection(h.point.edge));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::AngleValue;
    use crate::billiard::{shoot, BoundaryPoint};
    use crate::geometry::embed_triangle;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn single_letter_chain_is_the_polygon() {
        let s = Polygon::unit_square();
        let c = unfold_chain(&s, &[3]).unwrap();
        assert_eq!(c.copies.len(), 1);
        assert_eq!(c.copies[0], s.vertices().to_vec());
        assert!(c.gates.is_empty());
    }

    #[test]
    fn square_stacks_vertically() {
        let s = Polygon::unit_square();
        let c = unfold_chain(&s, &[3, 1, 3, 1]).unwrap();
        for (i, copy) in c.copies.iter().enumerate() {
            let ys: Vec<f64> = copy.iter().map(|v| v.y).collect();
            let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(lo, i as f64, epsilon = 1e-12);
            assert!(copy.iter().all(|v| v.x.abs() < 1e-12 || (v.x - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn square_clearance_values() {
        let s = Polygon::unit_square();
        assert_abs_diff_eq!(clearance(&s, &[3, 1, 3], 0.5, PI / 2.0).unwrap(), 0.5, epsilon = 1e-12);
        // grazes the top-right corner of the second copy
        let corner = (2.0f64).atan2(0.5);
        assert_abs_diff_eq!(clearance(&s, &[3, 1, 3], 0.5, corner).unwrap(), 0.0, epsilon = 1e-12);
        assert_eq!(clearance(&s, &[3, 1, 3], 0.5, 0.0), Err(UnfoldError::OutwardDirection));
        assert_eq!(clearance(&s, &[3, 1], 0.5, 1.0), Err(UnfoldError::NotClosed));
    }

    #[test]
    fn parallel_gate_is_reported() {
        let s = Polygon::unit_square();
        // gate 1 is the right side; a vertical ray never crosses its line
        assert_eq!(clearance(&s, &[3, 4, 3], 0.5, PI / 2.0), Err(UnfoldError::ParallelRay(1)));
    }

    #[test]
    fn square_closing_direction() {
        let s = Polygon::unit_square();
        assert_abs_diff_eq!(closing_direction(&s, &[3, 1]).unwrap(), PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(closing_direction(&s, &[3, 1, 3]).unwrap(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_word_is_not_a_translation() {
        let t = embed_triangle(AngleValue::rational(1, 5).unwrap(), AngleValue::rational(1, 3).unwrap()).unwrap();
        assert_eq!(closing_direction(t.polygon(), &[3, 1]), Err(UnfoldError::NotATranslation));
    }

    #[test]
    fn pieces_reproduce_clearance() {
        let t = embed_triangle(AngleValue::Real(0.9), AngleValue::Real(1.0)).unwrap();
        let p = t.polygon();
        let chain = unfold_chain(p, &[3, 1, 2, 3, 1, 2, 3]).unwrap();
        let theta = 1.1;
        let pieces = clearance_pieces(p, &chain, theta).unwrap();
        for x in [0.1, 0.35, 0.6, 0.9] {
            let direct = clearance_on(p, &chain, x, theta).unwrap();
            let via = pieces.iter().map(|(c, s)| c + s * x).fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(direct, via, epsilon = 1e-12);
        }
    }

    #[test]
    fn unfolded_hits_are_collinear() {
        let t = embed_triangle(AngleValue::Real(0.7), AngleValue::Real(1.1)).unwrap();
        let p = t.polygon();
        let tr = shoot(p, BoundaryPoint::new(3, 0.41), 1.2, 30).unwrap();
        let pts = unfold_trajectory(p, &tr);
        let d = unit(1.2);
        for q in &pts {
            assert!(cross(d, q - pts[0]).abs() < 1e-9);
        }
    }
}
