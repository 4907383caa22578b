//! The translation surface glued from the reflected copies of a rational
//! polygon.
//!
//! Copies are indexed by the elements of `G(P)`; copy `α` is the planar
//! polygon `αP`. Edge `i` of copy `α` is glued to edge `i` of copy `α r_i`,
//! which is the copy obtained by reflecting `αP` across its own edge `i`, so
//! every gluing is a translation in the plane. `G(P)` acts on the left.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{cross, Polygon, Vec2};
use crate::group::{group_closure, Dihedral, GroupError, SymmetryGroup, DEFAULT_MAX_ORDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("vertex {0} has an irrational angle")]
    IrrationalVertex(usize),
    #[error("copy index {0} out of range")]
    NoSuchCopy(usize),
    #[error("flow runs into vertex {vertex} of copy {copy} after {crossings} crossings")]
    ConePointHit { copy: usize, vertex: usize, crossings: usize },
    #[error("point is not inside the polygon")]
    OutsidePolygon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCopy {
    pub group_element: Dihedral,
    /// `α·v_i` for each base vertex.
    pub vertices: Vec<Vec2>,
    /// Translation placing this copy in a reflection-walk layout from copy 0.
    pub layout_offset: Vec2,
}

/// One polygon corner `v_vertex` of copy `copy` at a cone point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wedge {
    pub copy: usize,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub vertex_class: usize,
    pub representative: Wedge,
    /// Vertex angle is `kπ/m` in lowest terms; total angle `2kπ`.
    pub k: u32,
    pub m: u32,
    pub zero_order: u32,
    /// In cyclic order around the point.
    pub wedges: Vec<Wedge>,
}

impl ConePoint {
    pub fn total_angle(&self) -> f64 {
        self.wedges.len() as f64 * self.k as f64 * std::f64::consts::PI / self.m as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub copy: usize,
    /// Point of the base polygon.
    pub position: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationSurface {
    pub polygon: Polygon,
    pub group: SymmetryGroup,
    pub copies: Vec<SurfaceCopy>,
    /// `gluings[c][i-1]` is the copy glued to edge `i` of copy `c`.
    pub gluings: Vec<Vec<usize>>,
    pub cone_points: Vec<ConePoint>,
    pub genus: u32,
}

/// Reduced `(k, m)` with vertex angle `kπ/m`.
fn vertex_km(p: &Polygon, i: usize) -> Result<(u32, u32), SurfaceError> {
    let a = p.vertex_angle(i).as_rational().ok_or(SurfaceError::IrrationalVertex(i))?;
    Ok((a.numerator() as u32, a.denominator() as u32))
}

pub fn build_surface(p: &Polygon) -> Result<TranslationSurface, SurfaceError> {
    build_surface_with(p, DEFAULT_MAX_ORDER)
}

pub fn build_surface_with(p: &Polygon, max_order: usize) -> Result<TranslationSurface, SurfaceError> {
    if !p.is_rational() {
        return Err(GroupError::IrrationalPolygon.into());
    }
    let group = group_closure(p, max_order)?;
    let n_edges = p.edge_count();
    let index: HashMap<Dihedral, usize> = group.elements().iter().enumerate().map(|(c, g)| (*g, c)).collect();
    let gluings: Vec<Vec<usize>> =
        group.elements().iter().map(|a| (1..=n_edges).map(|i| index[&a.compose(&group.generator(i))]).collect()).collect();

    let mut offsets: Vec<Option<Vec2>> = vec![None; group.order()];
    offsets[0] = Some(Vec2::zeros());
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        let off = offsets[c].unwrap();
        for i in 1..=n_edges {
            let d = gluings[c][i - 1];
            if offsets[d].is_none() {
                offsets[d] = Some(glued_offset(p, &group.elements()[c], &group.elements()[d], off, i));
                queue.push_back(d);
            }
        }
    }
    let copies = group
        .elements()
        .iter()
        .zip(offsets)
        .map(|(g, off)| SurfaceCopy {
            group_element: *g,
            vertices: p.vertices().iter().map(|v| g.apply(*v)).collect(),
            layout_offset: off.expect("group is generated by the edge reflections"),
        })
        .collect();

    let mut surface = TranslationSurface { polygon: p.clone(), group, copies, gluings, cone_points: Vec::new(), genus: 0 };
    surface.cone_points = cone_points(&surface)?;
    surface.genus = surface_genus(&surface);
    Ok(surface)
}

/// Offset of copy `b = a r_i` so that its edge `i` lands on edge `i` of copy
/// `a` placed at `off`.
pub(crate) fn glued_offset(p: &Polygon, a: &Dihedral, b: &Dihedral, off: Vec2, i: usize) -> Vec2 {
    let v = p.vertex(i);
    off + a.apply(v) - b.apply(v)
}

/// Cone points from the walk around each polygon corner: cross `e_i`, then
/// `e_{i−1}`, alternately, until the starting copy recurs.
pub fn cone_points(s: &TranslationSurface) -> Result<Vec<ConePoint>, SurfaceError> {
    let n_edges = s.polygon.edge_count();
    let mut seen = vec![vec![false; n_edges]; s.copies.len()];
    let mut out = Vec::new();
    for vertex in 1..=n_edges {
        let (k, m) = vertex_km(&s.polygon, vertex)?;
        let before = if vertex == 1 { n_edges } else { vertex - 1 };
        for start in 0..s.copies.len() {
            if seen[start][vertex - 1] {
                continue;
            }
            let mut wedges = Vec::new();
            let mut c = start;
            let mut across = vertex;
            loop {
                seen[c][vertex - 1] = true;
                wedges.push(Wedge { copy: c, vertex });
                c = s.gluings[c][across - 1];
                across = if across == vertex { before } else { vertex };
                if c == start && across == vertex {
                    break;
                }
            }
            out.push(ConePoint { vertex_class: vertex, representative: wedges[0], k, m, zero_order: k - 1, wedges });
        }
    }
    Ok(out)
}

/// Genus from `V − E + F` of the glued complex, with vertices counted by
/// union-find over the edge gluings.
pub fn surface_genus(s: &TranslationSurface) -> u32 {
    let n_edges = s.polygon.edge_count();
    let f = s.copies.len();
    let slot = |c: usize, v: usize| c * n_edges + (v - 1);
    let mut parent: Vec<usize> = (0..f * n_edges).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in 0..f {
        for i in 1..=n_edges {
            let d = s.gluings[c][i - 1];
            for v in [i, i % n_edges + 1] {
                let (a, b) = (find(&mut parent, slot(c, v)), find(&mut parent, slot(d, v)));
                parent[a] = b;
            }
        }
    }
    let v = (0..f * n_edges).filter(|&x| find(&mut parent, x) == x).count() as i64;
    let e = (f * n_edges / 2) as i64;
    let chi = v - e + f as i64;
    ((2 - chi) / 2) as u32
}

impl TranslationSurface {
    pub fn copy_of(&self, g: &Dihedral) -> Option<usize> {
        self.copies.iter().position(|c| c.group_element == *g)
    }

    pub fn element(&self, copy: usize) -> Dihedral {
        self.copies[copy].group_element
    }

    pub fn glued(&self, copy: usize, edge: usize) -> usize {
        self.gluings[copy][edge - 1]
    }

    /// `Σ zero_order`.
    pub fn total_zero_order(&self) -> u32 {
        self.cone_points.iter().map(|c| c.zero_order).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    /// Position in the developed plane of the copy's chart (without layout offset).
    pub fn chart(&self, p: &SurfacePoint) -> Vec2 {
        self.element(p.copy).apply(p.position)
    }

    /// Two names of the same point: equal copy and position, or related by
    /// the gluing of an edge both lie on.
    pub fn same_point(&self, a: &SurfacePoint, b: &SurfacePoint, tol: f64) -> bool {
        if (a.position - b.position).norm() > tol {
            return false;
        }
        if a.copy == b.copy {
            return true;
        }
        (1..=self.polygon.edge_count()).any(|i| {
            let (u, v) = self.polygon.edge(i);
            let e = v - u;
            distance_to_segment(a.position, u, e) <= tol && self.glued(a.copy, i) == b.copy
        }) || self.same_vertex(a, b, tol)
    }

    fn same_vertex(&self, a: &SurfacePoint, b: &SurfacePoint, tol: f64) -> bool {
        self.cone_points.iter().any(|cp| {
            let v = self.polygon.vertex(cp.vertex_class);
            (a.position - v).norm() <= tol && cp.wedges.iter().any(|w| w.copy == a.copy) && cp.wedges.iter().any(|w| w.copy == b.copy)
        })
    }
}

fn distance_to_segment(z: Vec2, a: Vec2, e: Vec2) -> f64 {
    let t = ((z - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
    (z - a - t * e).norm()
}

/// `β·p`: copy `α` goes to copy `βα`, position fixed.
pub fn group_act(s: &TranslationSurface, beta: &Dihedral, p: &SurfacePoint) -> Result<SurfacePoint, SurfaceError> {
    if !s.group.contains(beta) {
        return Err(GroupError::ElementNotInGroup(beta.n()).into());
    }
    let target = beta.compose(&s.element(p.copy));
    let copy = s.copy_of(&target).ok_or(GroupError::ElementNotInGroup(beta.n()))?;
    Ok(SurfacePoint { copy, position: p.position })
}

/// One passage through a copy, in developed coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSegment {
    pub copy: usize,
    /// Translation of the copy in the developed plane.
    pub offset: Vec2,
    pub from: Vec2,
    pub to: Vec2,
    /// Edge crossed at `to`; `None` on the final, closing segment.
    pub exit_edge: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePath {
    pub start: SurfacePoint,
    pub theta: f64,
    pub segments: Vec<FlowSegment>,
    pub length: f64,
    pub closed: bool,
}

impl SurfacePath {
    pub fn crossings(&self) -> usize {
        self.segments.iter().filter(|s| s.exit_edge.is_some()).count()
    }

    pub fn crossed_edges(&self) -> Vec<usize> {
        self.segments.iter().filter_map(|s| s.exit_edge).collect()
    }

    /// Holonomy vector of the path in the developed plane.
    pub fn displacement(&self) -> Vec2 {
        match (self.segments.first(), self.segments.last()) {
            (Some(a), Some(b)) => b.to - a.from,
            _ => Vec2::zeros(),
        }
    }

    /// Point at arc length `s ∈ [0, length]`.
    pub fn point_at(&self, surf: &TranslationSurface, s: f64) -> SurfacePoint {
        let mut left = s.clamp(0.0, self.length);
        for (j, seg) in self.segments.iter().enumerate() {
            let len = (seg.to - seg.from).norm();
            if left <= len || j + 1 == self.segments.len() {
                let z = seg.from + (seg.to - seg.from) * if len > 0.0 { (left / len).min(1.0) } else { 0.0 };
                let g = surf.element(seg.copy);
                return SurfacePoint { copy: seg.copy, position: g.inverse().apply(z - seg.offset) };
            }
            left -= len;
        }
        self.start
    }

    /// `point_at(t·length)`.
    pub fn point_at_fraction(&self, surf: &TranslationSurface, t: f64) -> SurfacePoint {
        self.point_at(surf, t * self.length)
    }
}

/// Straight-line flow of constant argument `theta` from `p`, developed
/// copy by copy, until it returns to `p` or `max_crossings` is exhausted.
pub fn straight_line_flow(
    s: &TranslationSurface,
    p: SurfacePoint,
    theta: f64,
    max_crossings: usize,
    eps_vertex: f64,
) -> Result<SurfacePath, SurfaceError> {
    flow(s, p, theta, max_crossings, f64::INFINITY, eps_vertex)
}

/// The flow segment of arc length `length` from `p`, or shorter if it closes.
pub fn flow_segment(
    s: &TranslationSurface,
    p: SurfacePoint,
    theta: f64,
    length: f64,
    eps_vertex: f64,
) -> Result<SurfacePath, SurfaceError> {
    flow(s, p, theta, usize::MAX - 1, length, eps_vertex)
}

fn flow(
    s: &TranslationSurface,
    p: SurfacePoint,
    theta: f64,
    max_crossings: usize,
    max_length: f64,
    eps_vertex: f64,
) -> Result<SurfacePath, SurfaceError> {
    if p.copy >= s.copies.len() {
        return Err(SurfaceError::NoSuchCopy(p.copy));
    }
    if !s.polygon.contains(p.position, -1e-12) {
        return Err(SurfaceError::OutsidePolygon);
    }
    let u = crate::geometry::unit(theta);
    let n = s.polygon.edge_count();
    let mut copy = p.copy;
    let mut offset = Vec2::zeros();
    let start_chart = s.chart(&p);
    let mut z = start_chart;
    let mut segments = Vec::new();
    let mut length = 0.0;
    let scale = s.polygon.vertices().iter().map(|v| v.norm()).fold(1.0, f64::max);
    let skip = 1e-12 * scale;
    for crossing in 0..=max_crossings {
        let verts: Vec<Vec2> = s.copies[copy].vertices.iter().map(|v| v + offset).collect();
        let mut exit: Option<(f64, usize)> = None;
        for i in 1..=n {
            let a = verts[i - 1];
            let e = verts[i % n] - a;
            let den = cross(u, e);
            if den.abs() < 1e-15 {
                continue;
            }
            let sj = cross(a - z, e) / den;
            let tj = cross(a - z, u) / den;
            if sj > skip && (-1e-12..=1.0 + 1e-12).contains(&tj) && exit.is_none_or(|(best, _)| sj < best) {
                exit = Some((sj, i));
            }
        }
        let (s_exit, edge) = exit.ok_or(SurfaceError::OutsidePolygon)?;
        let to = z + s_exit * u;

        let remaining = max_length - length;
        let mut closing = None;
        if crossing > 0 && copy == p.copy {
            let w = start_chart + offset - z;
            let along = w.dot(&u);
            if cross(u, w).abs() < 1e-9 * scale && along > -1e-12 && along <= s_exit.min(remaining) + 1e-12 {
                closing = Some(along.max(0.0));
            }
        }
        let reach = closing.unwrap_or(s_exit.min(remaining));
        for (vi, v) in verts.iter().enumerate() {
            let d = v - z;
            let along = d.dot(&u);
            if along > skip && along <= reach + eps_vertex && cross(u, d).abs() < eps_vertex {
                return Err(SurfaceError::ConePointHit { copy, vertex: vi + 1, crossings: crossing });
            }
        }
        if let Some(along) = closing {
            segments.push(FlowSegment { copy, offset, from: z, to: z + along * u, exit_edge: None });
            length += along;
            return Ok(SurfacePath { start: p, theta, segments, length, closed: true });
        }
        if remaining <= s_exit {
            segments.push(FlowSegment { copy, offset, from: z, to: z + remaining * u, exit_edge: None });
            length = max_length;
            break;
        }
        if crossing == max_crossings {
            segments.push(FlowSegment { copy, offset, from: z, to, exit_edge: None });
            length += s_exit;
            break;
        }
        segments.push(FlowSegment { copy, offset, from: z, to, exit_edge: Some(edge) });
        length += s_exit;
        let next = s.glued(copy, edge);
        offset = glued_offset(&s.polygon, &s.element(copy), &s.element(next), offset, edge);
        copy = next;
        z = to;
    }
    Ok(SurfacePath { start: p, theta, segments, length, closed: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::AngleValue;
    use crate::billiard::{shoot, BoundaryPoint};
    use crate::geometry::embed_triangle;
    use approx::assert_abs_diff_eq;

    fn isosceles(a: i64, b: i64) -> TranslationSurface {
        let t = AngleValue::rational(a, b).unwrap();
        build_surface(embed_triangle(t, t).unwrap().polygon()).unwrap()
    }

    fn orders(s: &TranslationSurface) -> Vec<(usize, u32, usize)> {
        let mut v: Vec<_> = s.cone_points.iter().map(|c| (c.vertex_class, c.zero_order, c.wedges.len())).collect();
        v.sort();
        v
    }

    #[test]
    fn equilateral_is_a_torus() {
        let s = isosceles(1, 3);
        assert_eq!(s.copies.len(), 6);
        assert_eq!(s.genus, 1);
        assert_eq!(orders(&s), vec![(1, 0, 6), (2, 0, 6), (3, 0, 6)]);
    }

    #[test]
    fn three_eighths_has_genus_three() {
        let s = isosceles(3, 8);
        assert_eq!(s.copies.len(), 16);
        assert_eq!(s.genus, 3);
        assert_eq!(orders(&s), vec![(1, 2, 16), (2, 0, 8), (2, 0, 8), (3, 2, 16)]);
        for c in &s.cone_points {
            assert_abs_diff_eq!(c.total_angle(), 2.0 * c.k as f64 * std::f64::consts::PI, epsilon = 1e-10);
        }
    }

    #[test]
    fn right_triangle_has_genus_two() {
        let t = embed_triangle(AngleValue::rational(3, 8).unwrap(), AngleValue::rational(1, 2).unwrap()).unwrap();
        let s = build_surface(t.polygon()).unwrap();
        assert_eq!(s.copies.len(), 16);
        assert_eq!(s.genus, 2);
        let mut z: Vec<u32> = s.cone_points.iter().map(|c| c.zero_order).collect();
        z.sort();
        assert_eq!(z, vec![0, 0, 0, 0, 0, 2]);
    }

    #[test]
    fn square_is_a_torus() {
        let s = build_surface(&Polygon::unit_square()).unwrap();
        assert_eq!(s.copies.len(), 4);
        assert_eq!(s.genus, 1);
        assert!(s.cone_points.iter().all(|c| c.k == 1));
    }

    #[test]
    fn gluing_is_an_involution() {
        let s = isosceles(3, 8);
        for c in 0..s.copies.len() {
            for i in 1..=3 {
                assert_eq!(s.glued(s.glued(c, i), i), c);
                assert_ne!(s.glued(c, i), c);
            }
        }
    }

    #[test]
    fn irrational_rejected() {
        let t = embed_triangle(AngleValue::Real(0.9), AngleValue::Real(1.0)).unwrap();
        assert!(matches!(build_surface(t.polygon()), Err(SurfaceError::Group(_))));
    }

    #[test]
    fn action_law_and_gluing_compatibility() {
        let s = isosceles(3, 8);
        let p = SurfacePoint { copy: 5, position: Vec2::new(0.1, 0.2) };
        let id = s.group.identity();
        assert_eq!(group_act(&s, &id, &p).unwrap(), p);
        let r3 = s.group.generator(3);
        assert_eq!(group_act(&s, &r3, &group_act(&s, &r3, &p).unwrap()).unwrap(), p);
        for a in s.group.elements() {
            for b in s.group.elements() {
                let lhs = group_act(&s, a, &group_act(&s, b, &p).unwrap()).unwrap();
                let rhs = group_act(&s, &a.compose(b), &p).unwrap();
                assert_eq!(lhs, rhs);
            }
            for c in 0..s.copies.len() {
                for i in 1..=3 {
                    let moved = group_act(&s, a, &SurfacePoint { copy: c, position: p.position }).unwrap().copy;
                    let glued_then = group_act(&s, a, &SurfacePoint { copy: s.glued(c, i), position: p.position }).unwrap().copy;
                    assert_eq!(s.glued(moved, i), glued_then);
                }
            }
        }
        assert!(group_act(&s, &Dihedral::identity(5), &p).is_err());
    }

    #[test]
    fn square_torus_geodesics() {
        // four unit squares form a 2×2 torus
        let s = build_surface(&Polygon::unit_square()).unwrap();
        let p = SurfacePoint { copy: 0, position: Vec2::new(0.3, 0.4) };
        let h = straight_line_flow(&s, p, 0.0, 10, 1e-9).unwrap();
        assert!(h.closed);
        assert_abs_diff_eq!(h.length, 2.0, epsilon = 1e-12);
        let w = straight_line_flow(&s, p, 0.5f64.atan(), 20, 1e-9).unwrap();
        assert!(w.closed);
        assert_abs_diff_eq!(w.length, 2.0 * 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(w.displacement().x, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.displacement().y, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn aimed_at_cone_point() {
        let s = isosceles(3, 8);
        let p = SurfacePoint { copy: 0, position: Vec2::new(0.0, 0.0) };
        let r = straight_line_flow(&s, p, std::f64::consts::FRAC_PI_2, 10, 1e-9);
        assert!(matches!(r, Err(SurfaceError::ConePointHit { vertex: 2, .. })));
    }

    #[test]
    fn projection_matches_billiard() {
        let t = embed_triangle(AngleValue::rational(3, 8).unwrap(), AngleValue::rational(3, 8).unwrap()).unwrap();
        let poly = t.polygon();
        let s = build_surface(poly).unwrap();
        let x = BoundaryPoint::new(3, 0.31);
        let theta = 1.1;
        let tr = shoot(poly, x, theta, 25).unwrap();
        let path = straight_line_flow(&s, SurfacePoint { copy: 0, position: x.position(poly) }, theta, 25, 1e-9).unwrap();
        assert_eq!(path.crossed_edges()[..25], tr.hit_edges()[..25]);
        for (seg, hit) in path.segments.iter().zip(&tr.hits) {
            let g = s.element(seg.copy);
            let base = g.inverse().apply(seg.to - seg.offset);
            assert!((base - hit.position).norm() < 1e-9);
        }
    }
}
