//! Billiard flow in a convex polygon with exact reflection bookkeeping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comb_type::CombType;
use crate::geometry::{unit, GeometryError, Polygon, Vec2};
use crate::group::{edge_reflection, Dihedral};

pub const DEFAULT_EPS_VERTEX: f64 = 1e-9;
pub const DEFAULT_POSITION_TOL: f64 = 1e-8;
pub const DEFAULT_DIRECTION_TOL: f64 = 1e-9;

/// Numeric tolerances for simulation, in units of the base length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub position: f64,
    pub direction: f64,
    pub vertex: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { position: DEFAULT_POSITION_TOL, direction: DEFAULT_DIRECTION_TOL, vertex: DEFAULT_EPS_VERTEX }
    }
}

/// The point `(1 − t)·v_edge + t·v_{edge+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub edge: usize,
    pub t: f64,
}

impl BoundaryPoint {
    pub fn new(edge: usize, t: f64) -> Self {
        Self { edge, t }
    }

    pub fn position(&self, p: &Polygon) -> Vec2 {
        p.point_on_edge(self.edge, self.t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub point: BoundaryPoint,
    pub position: Vec2,
    /// Direction angle of the chord arriving at this hit.
    pub incoming: f64,
    /// Direction angle after reflection.
    pub outgoing: f64,
    /// Composed reflection `r_{e_j} ∘ … ∘ r_{e_1}` after this hit.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub element: Option<Dihedral>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: BoundaryPoint,
    pub direction: f64,
    pub hits: Vec<Hit>,
    pub length: f64,
}

impl Trajectory {
    /// Edges struck, in order.
    pub fn hit_edges(&self) -> Vec<usize> {
        self.hits.iter().map(|h| h.point.edge).collect()
    }

    /// Start point followed by every hit position.
    pub fn polyline(&self, p: &Polygon) -> Vec<Vec2> {
        std::iter::once(self.start.position(p)).chain(self.hits.iter().map(|h| h.position)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexHit {
    /// 1-based vertex index.
    pub vertex: usize,
    /// Hits completed before the chord that met the vertex.
    pub hit_count: usize,
    pub distance: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BilliardError {
    #[error("trajectory meets vertex v{} after {} hits (distance {:.3e})", .0.vertex, .0.hit_count, .0.distance)]
    VertexHit(VertexHit),
    #[error("start parameter {0} must lie strictly inside (0, 1)")]
    BadStart(f64),
    #[error("direction does not point into the polygon")]
    OutwardDirection,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl BilliardError {
    pub fn vertex_hit(&self) -> Option<VertexHit> {
        match self {
            BilliardError::VertexHit(v) => Some(*v),
            _ => None,
        }
    }
}

pub(crate) fn angle_of(d: Vec2) -> f64 {
    d.y.atan2(d.x)
}

fn point_segment_distance(z: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let s = ((z - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (a + ab * s - z).norm()
}

/// Stepwise billiard flow; each call to [`Flow::step`] advances one bounce.
#[derive(Clone, Debug)]
pub struct Flow<'a> {
    poly: &'a Polygon,
    position: Vec2,
    direction: Vec2,
    edge: usize,
    element: Option<Dihedral>,
    generators: Option<Vec<Dihedral>>,
    eps_vertex: f64,
    hits: usize,
    length: f64,
}

impl<'a> Flow<'a> {
    pub fn new(poly: &'a Polygon, start: BoundaryPoint, theta: f64, eps_vertex: f64) -> Result<Self, BilliardError> {
        poly.check_edge(start.edge)?;
        if !(start.t > 0.0 && start.t < 1.0) {
            return Err(BilliardError::BadStart(start.t));
        }
        let position = start.position(poly);
        let direction = unit(theta);
        if direction.dot(&poly.inward_normal(start.edge)) <= 0.0 {
            return Err(BilliardError::OutwardDirection);
        }
        for v in 1..=poly.edge_count() {
            let d = (poly.vertex(v) - position).norm();
            if d < eps_vertex {
                return Err(BilliardError::VertexHit(VertexHit { vertex: v, hit_count: 0, distance: d }));
            }
        }
        let generators: Option<Vec<Dihedral>> = (1..=poly.edge_count()).map(|i| edge_reflection(poly, i)).collect();
        let element = generators.as_ref().map(|g| Dihedral::identity(g[0].n()));
        Ok(Self { poly, position, direction, edge: start.edge, element, generators, eps_vertex, hits: 0, length: 0.0 })
    }

    pub fn position(&self) -> Vec2 {
        self.position
    }

    pub fn direction(&self) -> Vec2 {
        self.direction
    }

    pub fn element(&self) -> Option<Dihedral> {
        self.element
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn step(&mut self) -> Result<Hit, BilliardError> {
        let p = self.poly;
        let (z, d) = (self.position, self.direction);
        let mut best: Option<(f64, usize)> = None;
        for j in 1..=p.edge_count() {
            if j == self.edge {
                continue;
            }
            let n = p.inward_normal(j);
            let toward = -d.dot(&n);
            if toward <= 0.0 {
                continue;
            }
            let s = n.dot(&(z - p.vertex(j))) / toward;
            if best.is_none_or(|(b, _)| s < b) {
                best = Some((s, j));
            }
        }
        let (s, j) = best.expect("a chord of a convex polygon has an exit edge");
        let s = s.max(0.0);
        let end = z + d * s;
        for v in 1..=p.edge_count() {
            let dist = point_segment_distance(p.vertex(v), z, end);
            if dist < self.eps_vertex {
                return Err(BilliardError::VertexHit(VertexHit { vertex: v, hit_count: self.hits, distance: dist }));
            }
        }
        let (a, b) = p.edge(j);
        let t = ((end - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
        let n = p.inward_normal(j);
        let out = d - n * (2.0 * d.dot(&n));
        if let (Some(g), Some(gens)) = (self.element.as_mut(), self.generators.as_ref()) {
            *g = gens[j - 1].compose(g);
        }
        self.position = end;
        self.direction = out;
        self.edge = j;
        self.hits += 1;
        self.length += s;
        Ok(Hit { point: BoundaryPoint::new(j, t), position: end, incoming: angle_of(d), outgoing: angle_of(out), element: self.element })
    }
}

pub fn shoot(p: &Polygon, start: BoundaryPoint, theta: f64, max_hits: usize) -> Result<Trajectory, BilliardError> {
    shoot_with(p, start, theta, max_hits, DEFAULT_EPS_VERTEX)
}

pub fn shoot_with(p: &Polygon, start: BoundaryPoint, theta: f64, max_hits: usize, eps_vertex: f64) -> Result<Trajectory, BilliardError> {
    let mut flow = Flow::new(p, start, theta, eps_vertex)?;
    let mut hits = Vec::with_capacity(max_hits);
    for _ in 0..max_hits {
        hits.push(flow.step()?);
    }
    Ok(Trajectory { start, direction: theta, hits, length: flow.length() })
}

/// A closed billiard path with an even number of bounces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub trajectory: Trajectory,
    /// Start edge followed by the first `period − 1` struck edges.
    pub word: Vec<usize>,
    pub comb_type: CombType,
    pub period: usize,
}

impl PeriodicOrbit {
    pub fn start(&self) -> BoundaryPoint {
        self.trajectory.start
    }

    pub fn direction(&self) -> f64 {
        self.trajectory.direction
    }

    pub fn length(&self) -> f64 {
        self.trajectory.length
    }

    pub fn comb_type(&self, cyclic: bool) -> CombType {
        comb_type_of(self, cyclic)
    }

    /// `word` plus the return to the start edge.
    pub fn closed_word(&self) -> Vec<usize> {
        let mut w = self.word.clone();
        w.push(self.word[0]);
        w
    }
}

pub fn comb_type_of(orbit: &PeriodicOrbit, cyclic: bool) -> CombType {
    CombType::new(orbit.word.clone(), cyclic).expect("orbit words have distinct consecutive letters")
}

/// Shortest even closure within `max_hits` bounces.
///
/// The return must land on the start edge within `tol` (Euclidean) of the
/// start point; the direction must come back exactly (composed reflection
/// equal to the identity) for rational polygons, or within the direction
/// tolerance otherwise.
pub fn detect_periodic(
    p: &Polygon,
    start: BoundaryPoint,
    theta: f64,
    max_hits: usize,
    tol: f64,
) -> Result<Option<PeriodicOrbit>, BilliardError> {
    detect_periodic_with(p, start, theta, max_hits, Tolerances { position: tol, ..Tolerances::default() })
}

pub fn detect_periodic_with(
    p: &Polygon,
    start: BoundaryPoint,
    theta: f64,
    max_hits: usize,
    tol: Tolerances,
) -> Result<Option<PeriodicOrbit>, BilliardError> {
    let mut flow = Flow::new(p, start, theta, tol.vertex)?;
    let z0 = start.position(p);
    let d0 = unit(theta);
    let mut hits = Vec::new();
    while hits.len() < max_hits {
        let h = flow.step()?;
        hits.push(h);
        if hits.len() % 2 != 0 || h.point.edge != start.edge || (h.position - z0).norm() > tol.position {
            continue;
        }
        let closed = match h.element {
            Some(g) => g.is_identity(),
            None => (flow.direction() - d0).norm() <= tol.direction,
        };
        if closed {
            let period = hits.len();
            let word: Vec<usize> = std::iter::once(start.edge).chain(hits[..period - 1].iter().map(|h| h.point.edge)).collect();
            let comb_type = CombType::new(word.clone(), false).expect("distinct consecutive edges");
            let trajectory = Trajectory { start, direction: theta, hits, length: flow.length() };
            return Ok(Some(PeriodicOrbit { trajectory, word, comb_type, period }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::AngleValue;
    use crate::geometry::embed_triangle;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn equilateral() -> Polygon {
        let t = AngleValue::rational(1, 3).unwrap();
        embed_triangle(t, t).unwrap().polygon().clone()
    }

    #[test]
    fn square_vertical_bounce() {
        let s = Polygon::unit_square();
        let tr = shoot(&s, BoundaryPoint::new(3, 0.5), PI / 2.0, 4).unwrap();
        assert_eq!(tr.hit_edges(), vec![1, 3, 1, 3]);
        for h in &tr.hits {
            assert_abs_diff_eq!(h.position.x, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(tr.length, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn equilateral_axis_hits_apex() {
        let err = shoot(&equilateral(), BoundaryPoint::new(3, 0.5), PI / 2.0, 3).unwrap_err();
        assert_eq!(err.vertex_hit().map(|v| (v.vertex, v.hit_count)), Some((2, 0)));
    }

    #[test]
    fn equilateral_sixty_degree_word() {
        let tr = shoot(&equilateral(), BoundaryPoint::new(3, 0.5), PI / 3.0, 6).unwrap();
        assert_eq!(tr.hit_edges(), vec![1, 2, 3, 1, 2, 3]);
    }

    #[test]
    fn outward_and_bad_starts_rejected() {
        let s = Polygon::unit_square();
        assert_eq!(shoot(&s, BoundaryPoint::new(3, 0.5), -1.0, 1), Err(BilliardError::OutwardDirection));
        assert_eq!(shoot(&s, BoundaryPoint::new(3, 1.0), 1.0, 1), Err(BilliardError::BadStart(1.0)));
        assert!(shoot(&s, BoundaryPoint::new(5, 0.5), 1.0, 1).is_err());
    }

    #[test]
    fn square_bouncer_is_period_two() {
        let s = Polygon::unit_square();
        let o = detect_periodic(&s, BoundaryPoint::new(3, 0.5), PI / 2.0, 10, 1e-9).unwrap().unwrap();
        assert_eq!(o.period, 2);
        assert_eq!(o.word, vec![3, 1]);
        assert_eq!(o.comb_type.word(), &[1, 3]);
        assert_eq!(o.closed_word(), vec![3, 1, 3]);
    }

    #[test]
    fn fagnano_on_acute_scalene() {
        // orthic triangle oracle: the orbit joins the feet of the altitudes
        let t = embed_triangle(AngleValue::Real(0.9), AngleValue::Real(1.0)).unwrap();
        let p = t.polygon();
        let project = |z: Vec2, i: usize| {
            let (a, b) = p.edge(i);
            a + (b - a) * ((z - a).dot(&(b - a)) / (b - a).norm_squared())
        };
        let foot3 = project(p.vertex(2), 3);
        let foot1 = project(p.vertex(3), 1);
        let foot_t = (foot3 - p.vertex(3)).norm() / p.edge_length(3);
        let theta = angle_of(foot1 - foot3);
        let o = detect_periodic(p, BoundaryPoint::new(3, foot_t), theta, 20, 1e-8).unwrap().unwrap();
        assert_eq!(o.period, 6);
        assert_eq!(o.comb_type(true), CombType::new(vec![1, 2, 3, 1, 2, 3], true).unwrap());
    }

    #[test]
    fn nonclosing_returns_none() {
        let o = detect_periodic(&equilateral(), BoundaryPoint::new(3, 0.3), 0.1, 10, 1e-8).unwrap();
        assert!(o.is_none());
    }

    #[test]
    fn reflection_law_holds() {
        let t = embed_triangle(AngleValue::Real(0.7), AngleValue::Real(1.1)).unwrap();
        let p = t.polygon();
        let tr = shoot(p, BoundaryPoint::new(3, 0.37), 1.3, 50).unwrap();
        for h in &tr.hits {
            let n = p.inward_normal(h.point.edge);
            let (i, o) = (unit(h.incoming), unit(h.outgoing));
            assert_abs_diff_eq!(-i.dot(&n), o.dot(&n), epsilon = 1e-10);
        }
    }
}
