//! Exact dihedral bookkeeping for reflection groups of rational polygons.
//!
//! For a polygon whose edge directions are rational multiples of π with
//! common denominator `N`, the linear parts of the edge reflections generate
//! the dihedral group of order `2N`. An element is either the rotation
//! `R_k` by `2πk/N` or the reflection `S_k` across the line at angle `kπ/N`.

use std::collections::HashSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{reflection_matrix_along, Mat2, Polygon, Vec2};

pub const DEFAULT_MAX_ORDER: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("reflection group is infinite or larger than {0}")]
    Infinite(usize),
    #[error("polygon is not rational")]
    IrrationalPolygon,
    #[error("element does not belong to a dihedral group of order {0}")]
    ElementNotInGroup(u32),
}

/// An exact element of the dihedral group of order `2n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dihedral {
    n: u32,
    reflection: bool,
    k: u32,
}

impl Dihedral {
    pub fn identity(n: u32) -> Self {
        Self { n, reflection: false, k: 0 }
    }

    pub fn rotation(n: u32, k: i64) -> Self {
        Self { n, reflection: false, k: k.rem_euclid(n as i64) as u32 }
    }

    pub fn reflection(n: u32, k: i64) -> Self {
        Self { n, reflection: true, k: k.rem_euclid(n as i64) as u32 }
    }

    /// Element with group index `0..2n`: rotations first, then reflections.
    pub fn from_index(n: u32, index: usize) -> Self {
        let i = index as u32;
        if i < n {
            Self::rotation(n, i as i64)
        } else {
            Self::reflection(n, (i - n) as i64)
        }
    }

    pub fn index(&self) -> usize {
        (if self.reflection { self.n + self.k } else { self.k }) as usize
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn is_reflection(&self) -> bool {
        self.reflection
    }

    pub fn is_identity(&self) -> bool {
        !self.reflection && self.k == 0
    }

    /// `self ∘ other`. Both must live in the same group.
    pub fn compose(&self, other: &Dihedral) -> Dihedral {
        debug_assert_eq!(self.n, other.n);
        let (a, b) = (self.k as i64, other.k as i64);
        match (self.reflection, other.reflection) {
            (false, false) => Self::rotation(self.n, a + b),
            (false, true) => Self::reflection(self.n, a + b),
            (true, false) => Self::reflection(self.n, a - b),
            (true, true) => Self::rotation(self.n, a - b),
        }
    }

    pub fn inverse(&self) -> Dihedral {
        if self.reflection {
            *self
        } else {
            Self::rotation(self.n, -(self.k as i64))
        }
    }

    pub fn pow(&self, e: u32) -> Dihedral {
        (0..e).fold(Self::identity(self.n), |acc, _| acc.compose(self))
    }

    /// Re-express this element in the group of order `2m`, where `n | m`.
    pub fn lift(&self, m: u32) -> Result<Dihedral, GroupError> {
        if m % self.n != 0 {
            return Err(GroupError::ElementNotInGroup(m));
        }
        let k = (self.k * (m / self.n)) as i64;
        Ok(if self.reflection { Self::reflection(m, k) } else { Self::rotation(m, k) })
    }

    /// Inverse of [`Dihedral::lift`]: `None` if the element is not in the smaller group.
    pub fn restrict(&self, n: u32) -> Option<Dihedral> {
        if n == 0 || self.n % n != 0 || self.k % (self.n / n) != 0 {
            return None;
        }
        let k = (self.k / (self.n / n)) as i64;
        Some(if self.reflection { Self::reflection(n, k) } else { Self::rotation(n, k) })
    }

    /// Rotation angle in radians for rotations, mirror-line angle for reflections.
    pub fn angle(&self) -> f64 {
        if self.reflection {
            PI * self.k as f64 / self.n as f64
        } else {
            2.0 * PI * self.k as f64 / self.n as f64
        }
    }

    pub fn matrix(&self) -> Mat2 {
        if self.reflection {
            let t = 2.0 * self.angle();
            Mat2::new(t.cos(), t.sin(), t.sin(), -t.cos())
        } else {
            let t = self.angle();
            Mat2::new(t.cos(), -t.sin(), t.sin(), t.cos())
        }
    }

    pub fn apply(&self, z: Vec2) -> Vec2 {
        self.matrix() * z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsometryKind {
    Rotation,
    Reflection,
}

/// An orthogonal linear map, carrying its exact dihedral index when known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub kind: IsometryKind,
    pub exact: Option<Dihedral>,
    pub matrix: Mat2,
}

impl Isometry {
    pub fn from_exact(d: Dihedral) -> Self {
        let kind = if d.is_reflection() { IsometryKind::Reflection } else { IsometryKind::Rotation };
        Self { kind, exact: Some(d), matrix: d.matrix() }
    }

    pub fn from_matrix(matrix: Mat2) -> Self {
        let kind = if matrix.determinant() < 0.0 { IsometryKind::Reflection } else { IsometryKind::Rotation };
        Self { kind, exact: None, matrix }
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) if a.n() == b.n() => Isometry::from_exact(a.compose(&b)),
            _ => Isometry::from_matrix(self.matrix * other.matrix),
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        match self.exact {
            Some(d) => d.is_identity(),
            None => (self.matrix - Mat2::identity()).abs().max() <= tol,
        }
    }
}

/// Exact element for the reflection across edge `i`, if the polygon is rational.
pub fn edge_reflection(p: &Polygon, i: usize) -> Option<Dihedral> {
    let n = p.dihedral_order()?;
    let line = p.line_angles()?[i - 1];
    let k = line.numerator() * (n as i64 / line.denominator());
    Some(Dihedral::reflection(n, k))
}

/// Linear part of the reflection across edge `i`.
pub fn reflection_linear(p: &Polygon, i: usize) -> Isometry {
    match edge_reflection(p, i) {
        Some(d) => Isometry::from_exact(d),
        None => Isometry { kind: IsometryKind::Reflection, exact: None, matrix: reflection_matrix_along(p.edge_vector(i)) },
    }
}

pub fn is_rational(p: &Polygon) -> bool {
    p.is_rational()
}

/// The finite group `G(P)` generated by the edge reflections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    n: u32,
    elements: Vec<Dihedral>,
    generators: Vec<Dihedral>,
}

impl SymmetryGroup {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Elements sorted by group index.
    pub fn elements(&self) -> &[Dihedral] {
        &self.elements
    }

    /// Generator `r_i` for edge `i` (1-based).
    pub fn generator(&self, i: usize) -> Dihedral {
        self.generators[i - 1]
    }

    pub fn generators(&self) -> &[Dihedral] {
        &self.generators
    }

    pub fn contains(&self, d: &Dihedral) -> bool {
        d.n() == self.n
    }

    pub fn identity(&self) -> Dihedral {
        Dihedral::identity(self.n)
    }
}

/// Closure of the edge reflections under composition, capped at `max_order`.
///
/// Rational polygons close exactly on dihedral indices. Anything else is
/// closed numerically on matrices and reported as [`GroupError::Infinite`]
/// once the cap is exceeded; a numerically finite group with no exact data
/// is also rejected since nothing downstream can use it.
pub fn group_closure(p: &Polygon, max_order: usize) -> Result<SymmetryGroup, GroupError> {
    if let Some(n) = p.dihedral_order() {
        if 2 * n as usize > max_order {
            return Err(GroupError::Infinite(max_order));
        }
        let generators: Vec<Dihedral> = (1..=p.edge_count()).map(|i| edge_reflection(p, i).expect("rational edge")).collect();
        let mut seen: HashSet<Dihedral> = HashSet::new();
        let mut frontier = vec![Dihedral::identity(n)];
        seen.insert(Dihedral::identity(n));
        while let Some(g) = frontier.pop() {
            for r in &generators {
                let h = r.compose(&g);
                if seen.insert(h) {
                    frontier.push(h);
                }
            }
        }
        let mut elements: Vec<Dihedral> = seen.into_iter().collect();
        elements.sort_by_key(Dihedral::index);
        return Ok(SymmetryGroup { n, elements, generators });
    }
    numeric_closure(p, max_order)
}

fn numeric_closure(p: &Polygon, max_order: usize) -> Result<SymmetryGroup, GroupError> {
    let key = |m: &Mat2| -> [i64; 4] { [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]].map(|x| (x * 1e7).round() as i64) };
    let generators: Vec<Mat2> = (1..=p.edge_count()).map(|i| p.reflection_matrix(i)).collect();
    let mut seen: HashSet<[i64; 4]> = HashSet::new();
    let mut frontier = vec![Mat2::identity()];
    seen.insert(key(&Mat2::identity()));
    while let Some(g) = frontier.pop() {
        for r in &generators {
            let h = r * g;
            if seen.insert(key(&h)) {
                if seen.len() > max_order {
                    return Err(GroupError::Infinite(max_order));
                }
                frontier.push(h);
            }
        }
    }
    Err(GroupError::IrrationalPolygon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::AngleValue;
    use crate::geometry::embed_triangle;
    use approx::assert_abs_diff_eq;

    fn iso(a: i64, b: i64) -> Polygon {
        let t = AngleValue::rational(a, b).unwrap();
        embed_triangle(t, t).unwrap().polygon().clone()
    }

    #[test]
    fn group_law_matches_matrices() {
        let n = 8;
        for i in 0..16 {
            for j in 0..16 {
                let (a, b) = (Dihedral::from_index(n, i), Dihedral::from_index(n, j));
                let lhs = a.compose(&b).matrix();
                let rhs = a.matrix() * b.matrix();
                assert!((lhs - rhs).abs().max() < 1e-12, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn index_round_trip_and_inverse() {
        for i in 0..10 {
            let d = Dihedral::from_index(5, i);
            assert_eq!(d.index(), i);
            assert!(d.compose(&d.inverse()).is_identity());
        }
    }

    #[test]
    fn equilateral_base_reflection_is_horizontal() {
        let p = iso(1, 3);
        let r3 = reflection_linear(&p, 3);
        assert!((r3.matrix - Mat2::new(1.0, 0.0, 0.0, -1.0)).abs().max() < 1e-15);
        let r1 = reflection_linear(&p, 1);
        let t = 2.0 * 2.0 * PI / 3.0;
        let expect = Mat2::new(t.cos(), t.sin(), t.sin(), -t.cos());
        assert!((r1.matrix - expect).abs().max() < 1e-12);
        for i in 1..=3 {
            let r = reflection_linear(&p, i);
            assert!(r.compose(&r).is_identity(0.0));
            assert!((r.matrix * r.matrix - Mat2::identity()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn orders_of_named_shapes() {
        assert_eq!(group_closure(&iso(1, 3), DEFAULT_MAX_ORDER).unwrap().order(), 6);
        assert_eq!(group_closure(&iso(3, 8), DEFAULT_MAX_ORDER).unwrap().order(), 16);
        assert_eq!(group_closure(&Polygon::unit_square(), DEFAULT_MAX_ORDER).unwrap().order(), 4);
        let irr = embed_triangle(AngleValue::Real(1.0), AngleValue::Real(1.0)).unwrap();
        assert_eq!(group_closure(irr.polygon(), 10_000), Err(GroupError::Infinite(10_000)));
    }

    #[test]
    fn order_formula_by_numeric_closure() {
        // independent oracle: close the float matrices and count distinct ones
        for q in 3..=24i64 {
            for a in 1..q {
                if 2 * a >= q || crate::angle::gcd(a, q) != 1 {
                    continue;
                }
                let p = iso(a, q);
                let g = group_closure(&p, DEFAULT_MAX_ORDER).unwrap();
                let apex_den = crate::angle::RationalAngle::new(q - 2 * a, q).unwrap().denominator();
                let expect = 2 * crate::angle::lcm(q, apex_den) as usize;
                assert_eq!(g.order(), expect, "{a}/{q}");
                let mut mats: Vec<Mat2> = Vec::new();
                let gens: Vec<Mat2> = (1..=3).map(|i| p.reflection_matrix(i)).collect();
                let mut frontier = vec![Mat2::identity()];
                mats.push(Mat2::identity());
                while let Some(m) = frontier.pop() {
                    for r in &gens {
                        let h = r * m;
                        if !mats.iter().any(|x| (x - h).abs().max() < 1e-8) {
                            mats.push(h);
                            frontier.push(h);
                        }
                    }
                }
                assert_eq!(mats.len(), g.order(), "{a}/{q}");
            }
        }
    }

    #[test]
    fn lift_and_restrict() {
        let d = Dihedral::reflection(3, 1);
        let l = d.lift(6).unwrap();
        assert_eq!(l, Dihedral::reflection(6, 2));
        assert_abs_diff_eq!(l.angle(), d.angle(), epsilon = 1e-15);
        assert_eq!(l.restrict(3), Some(d));
        assert_eq!(Dihedral::rotation(6, 1).restrict(3), None);
        assert!(d.lift(4).is_err());
    }
}
