//! Planar polygons and the canonical triangle embedding.
//!
//! Edges are labelled `1..=n`; edge `e_i` runs from `v_i` to `v_{i+1}` and
//! vertices are listed counter-clockwise. For triangles the moduli
//! coordinates `(θ₁, θ₂)` are the angles at `v₁` (bottom right) and `v₃`
//! (bottom left); the apex `v₂` carries `π − θ₁ − θ₂`. Edge 3 is the base,
//! edge 1 the right leg and edge 2 the left leg, so `θ₁ = θ₂` is exactly the
//! line of isosceles triangles.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{lcm, AngleValue, RationalAngle};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate triangle: angles {0} and {1} must be positive with sum below π")]
    DegenerateTriangle(String, String),
    #[error("polygon needs at least three vertices in counter-clockwise convex position")]
    NotConvex,
    #[error("edge index {0} out of range 1..={1}")]
    EdgeIndex(usize, usize),
    #[error("triangle is not isosceles")]
    NotIsosceles,
}

/// An affine map `z ↦ linear·z + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine2 {
    pub linear: Mat2,
    pub translation: Vec2,
}

impl Affine2 {
    pub fn identity() -> Self {
        Self { linear: Mat2::identity(), translation: Vec2::zeros() }
    }

    pub fn apply(&self, z: Vec2) -> Vec2 {
        self.linear * z + self.translation
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Affine2) -> Affine2 {
        Affine2 { linear: self.linear * other.linear, translation: self.linear * other.translation + self.translation }
    }

    /// Reflection across the line through `a` and `b`.
    pub fn reflection_through(a: Vec2, b: Vec2) -> Affine2 {
        let linear = reflection_matrix_along(b - a);
        Affine2 { linear, translation: a - linear * a }
    }
}

/// Linear reflection whose mirror is parallel to `dir`.
pub fn reflection_matrix_along(dir: Vec2) -> Mat2 {
    let u = dir.normalize();
    Mat2::new(2.0 * u.x * u.x - 1.0, 2.0 * u.x * u.y, 2.0 * u.x * u.y, 2.0 * u.y * u.y - 1.0)
}

pub(crate) fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

pub fn unit(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

/// A convex polygon with optional exact angle data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    /// Interior angle at each vertex.
    angles: Vec<AngleValue>,
    /// Exact direction of each edge line as a fraction of π in `[0, 1)`.
    line_angles: Option<Vec<RationalAngle>>,
}

impl Polygon {
    /// Build from explicit vertices; angles are measured in floating point.
    pub fn convex(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::NotConvex);
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(b - a, c - b) <= 0.0 {
                return Err(GeometryError::NotConvex);
            }
        }
        let angles = (0..n)
            .map(|i| {
                let prev = vertices[(i + n - 1) % n];
                let cur = vertices[i];
                let next = vertices[(i + 1) % n];
                let (u, w) = (prev - cur, next - cur);
                AngleValue::Real(cross(w, u).atan2(w.dot(&u)))
            })
            .collect();
        Ok(Self { vertices, angles, line_angles: None })
    }

    /// Axis-aligned rectangle `[0,w]×[0,h]`, labelled so that the bottom is
    /// edge 3 and the top is edge 1.
    pub fn rectangle(w: f64, h: f64) -> Self {
        let half = RationalAngle::new(1, 2).unwrap();
        Self {
            vertices: vec![Vec2::new(w, h), Vec2::new(0.0, h), Vec2::new(0.0, 0.0), Vec2::new(w, 0.0)],
            angles: vec![AngleValue::Rational(half); 4],
            line_angles: Some(vec![RationalAngle::zero(), half, RationalAngle::zero(), half]),
        }
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0)
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Vertex `v_i`, `i` taken mod n in `1..=n`.
    pub fn vertex(&self, i: usize) -> Vec2 {
        let n = self.vertices.len();
        self.vertices[(i + n - 1) % n]
    }

    pub fn angles(&self) -> &[AngleValue] {
        &self.angles
    }

    /// Interior angle at `v_i`.
    pub fn vertex_angle(&self, i: usize) -> AngleValue {
        let n = self.vertices.len();
        self.angles[(i + n - 1) % n]
    }

    pub fn line_angles(&self) -> Option<&[RationalAngle]> {
        self.line_angles.as_deref()
    }

    pub fn check_edge(&self, i: usize) -> Result<(), GeometryError> {
        if i == 0 || i > self.edge_count() {
            Err(GeometryError::EdgeIndex(i, self.edge_count()))
        } else {
            Ok(())
        }
    }

    /// Endpoints `(v_i, v_{i+1})` of edge `i`.
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn edge_vector(&self, i: usize) -> Vec2 {
        let (a, b) = self.edge(i);
        b - a
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        self.edge_vector(i).norm()
    }

    pub fn inward_normal(&self, i: usize) -> Vec2 {
        let e = self.edge_vector(i).normalize();
        Vec2::new(-e.y, e.x)
    }

    pub fn point_on_edge(&self, i: usize, t: f64) -> Vec2 {
        let (a, b) = self.edge(i);
        a + (b - a) * t
    }

    pub fn reflection_matrix(&self, i: usize) -> Mat2 {
        reflection_matrix_along(self.edge_vector(i))
    }

    /// Affine reflection across the line of edge `i`.
    pub fn reflection(&self, i: usize) -> Affine2 {
        let (a, b) = self.edge(i);
        Affine2::reflection_through(a, b)
    }

    /// Order `N` of the rotation subgroup: the least common denominator of the
    /// edge line directions. `None` unless every line angle is known exactly.
    pub fn dihedral_order(&self) -> Option<u32> {
        let lines = self.line_angles.as_ref()?;
        let n = lines.iter().fold(1i64, |acc, a| lcm(acc, a.denominator()));
        u32::try_from(n).ok()
    }

    pub fn is_rational(&self) -> bool {
        self.line_angles.is_some() && self.angles.iter().all(AngleValue::is_rational)
    }

    pub fn centroid(&self) -> Vec2 {
        self.vertices.iter().fold(Vec2::zeros(), |acc, v| acc + v) / self.vertices.len() as f64
    }

    /// Strictly inside, with margin `eps` from every edge line.
    pub fn contains(&self, z: Vec2, eps: f64) -> bool {
        (1..=self.edge_count()).all(|i| self.inward_normal(i).dot(&(z - self.vertex(i))) > eps)
    }
}

/// A point `(θ₁, θ₂)` of triangle moduli space with its canonical embedding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleShape {
    theta1: AngleValue,
    theta2: AngleValue,
    polygon: Polygon,
}

fn is_positive(a: &AngleValue) -> bool {
    match a {
        AngleValue::Rational(r) => r.numerator() > 0,
        AngleValue::Real(x) => *x > 0.0 && x.is_finite(),
    }
}

/// Embed the triangle with angle `θ₁` at `v₁` and `θ₂` at `v₃`.
///
/// Isosceles shapes get the base from `(−½, 0)` to `(½, 0)` and the apex on the
/// positive imaginary axis; all others put `v₃` at the origin and `v₁` at `(1, 0)`.
pub fn embed_triangle(theta1: AngleValue, theta2: AngleValue) -> Result<TriangleShape, GeometryError> {
    let apex = theta1.supplement_of_sum(&theta2);
    if !is_positive(&theta1) || !is_positive(&theta2) || !is_positive(&apex) {
        return Err(GeometryError::DegenerateTriangle(theta1.to_string(), theta2.to_string()));
    }
    let (a1, a3) = (theta1.radians(), theta2.radians());
    let isosceles = theta1 == theta2;
    let vertices = if isosceles {
        vec![Vec2::new(0.5, 0.0), Vec2::new(0.0, a1.tan() / 2.0), Vec2::new(-0.5, 0.0)]
    } else {
        // law of sines with unit base: |v₃v₂| = sin θ₁ / sin θ_apex
        let side = a1.sin() / apex.radians().sin();
        vec![Vec2::new(1.0, 0.0), Vec2::new(side * a3.cos(), side * a3.sin()), Vec2::new(0.0, 0.0)]
    };
    Ok(TriangleShape::from_parts(theta1, theta2, apex, vertices))
}

impl TriangleShape {
    fn from_parts(theta1: AngleValue, theta2: AngleValue, apex: AngleValue, vertices: Vec<Vec2>) -> Self {
        let line_angles = match (theta1.as_rational(), theta2.as_rational()) {
            (Some(q1), Some(q2)) => {
                Some(vec![RationalAngle::integer(1).checked_add(q1.neg()).unwrap().rem_euclid(1), q2.rem_euclid(1), RationalAngle::zero()])
            }
            _ => None,
        };
        let polygon = Polygon { vertices, angles: vec![theta1, apex, theta2], line_angles };
        Self { theta1, theta2, polygon }
    }

    pub fn theta1(&self) -> AngleValue {
        self.theta1
    }

    pub fn theta2(&self) -> AngleValue {
        self.theta2
    }

    pub fn apex_angle(&self) -> AngleValue {
        self.polygon.angles[1]
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn vertices(&self) -> &[Vec2] {
        self.polygon.vertices()
    }

    pub fn is_rational(&self) -> bool {
        self.theta1.is_rational() && self.theta2.is_rational()
    }

    /// Base angles equal (exactly for rationals, within 1e−12 otherwise).
    pub fn is_isosceles(&self) -> bool {
        self.theta1.approx_eq(&self.theta2, 1e-12)
    }

    /// Whether the embedding is the centred isosceles one.
    pub fn is_centered(&self) -> bool {
        self.polygon.vertex(3).x < 0.0
    }

    /// The right triangle `{z ∈ T : Re z ≥ 0}` of an isosceles triangle,
    /// labelled with the hypotenuse as edge 1, the symmetry axis as edge 2
    /// and the half base as edge 3.
    pub fn right_half(&self) -> Result<TriangleShape, GeometryError> {
        if !self.is_isosceles() || !self.is_centered() {
            return Err(GeometryError::NotIsosceles);
        }
        let right = AngleValue::Rational(RationalAngle::new(1, 2).unwrap());
        let apex = self.theta1.supplement_of_sum(&right);
        let v = self.polygon.vertices();
        let vertices = vec![v[0], v[1], Vec2::new(0.0, 0.0)];
        Ok(TriangleShape::from_parts(self.theta1, right, apex, vertices))
    }

    /// Same shape with the roles of the two base vertices exchanged.
    pub fn mirrored(&self) -> Result<TriangleShape, GeometryError> {
        embed_triangle(self.theta2, self.theta1)
    }
}

impl AsRef<Polygon> for TriangleShape {
    fn as_ref(&self) -> &Polygon {
        &self.polygon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn rat(a: i64, b: i64) -> AngleValue {
        AngleValue::rational(a, b).unwrap()
    }

    #[test]
    fn equilateral_embedding() {
        let t = embed_triangle(rat(1, 3), rat(1, 3)).unwrap();
        let v = t.vertices();
        assert_eq!(v[2], Vec2::new(-0.5, 0.0));
        assert_eq!(v[0], Vec2::new(0.5, 0.0));
        assert_eq!(v[1].x, 0.0);
        assert_abs_diff_eq!(v[1].y, 3f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn three_eighths_apex() {
        let t = embed_triangle(rat(3, 8), rat(3, 8)).unwrap();
        assert_abs_diff_eq!(t.vertices()[1].y, (3.0 * PI / 8.0).tan() / 2.0, epsilon = 1e-15);
        assert_eq!(t.apex_angle(), rat(1, 4));
    }

    #[test]
    fn degenerate_shapes_rejected() {
        assert!(matches!(embed_triangle(rat(1, 2), rat(1, 2)), Err(GeometryError::DegenerateTriangle(..))));
        assert!(embed_triangle(AngleValue::Real(-0.1), AngleValue::Real(1.0)).is_err());
        assert!(embed_triangle(AngleValue::Real(2.0), AngleValue::Real(1.2)).is_err());
    }

    #[test]
    fn scalene_is_counter_clockwise_with_correct_angles() {
        let t = embed_triangle(AngleValue::Real(0.5), AngleValue::Real(0.6)).unwrap();
        let p = t.polygon();
        assert!(Polygon::convex(p.vertices().to_vec()).is_ok());
        let measured = Polygon::convex(p.vertices().to_vec()).unwrap();
        assert_abs_diff_eq!(measured.vertex_angle(1).radians(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(measured.vertex_angle(3).radians(), 0.6, epsilon = 1e-12);
        assert_eq!(p.vertex(3), Vec2::new(0.0, 0.0));
        assert_eq!(p.vertex(1), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn embedding_is_deterministic() {
        let a = embed_triangle(AngleValue::Real(0.7), AngleValue::Real(0.9)).unwrap();
        let b = embed_triangle(AngleValue::Real(0.7), AngleValue::Real(0.9)).unwrap();
        for (x, y) in a.vertices().iter().zip(b.vertices()) {
            assert_eq!(x.x.to_bits(), y.x.to_bits());
            assert_eq!(x.y.to_bits(), y.y.to_bits());
        }
    }

    #[test]
    fn line_angles_of_rational_triangle() {
        let t = embed_triangle(rat(3, 8), rat(3, 8)).unwrap();
        let lines = t.polygon().line_angles().unwrap();
        assert_eq!(lines, &[RationalAngle::new(5, 8).unwrap(), RationalAngle::new(3, 8).unwrap(), RationalAngle::zero()]);
        for i in 1..=3 {
            let d = t.polygon().edge_vector(i);
            let ang = d.y.atan2(d.x).rem_euclid(PI);
            let exact = lines[i - 1].radians();
            assert_abs_diff_eq!(ang, exact, epsilon = 1e-12);
        }
        assert_eq!(t.polygon().dihedral_order(), Some(8));
    }

    #[test]
    fn right_half_labels() {
        let t = embed_triangle(rat(3, 8), rat(3, 8)).unwrap();
        let h = t.right_half().unwrap();
        assert_eq!(h.theta1(), rat(3, 8));
        assert_eq!(h.theta2(), rat(1, 2));
        assert_eq!(h.apex_angle(), rat(1, 8));
        assert_eq!(h.vertices()[2], Vec2::zeros());
        assert_eq!(h.polygon().dihedral_order(), Some(8));
        let scalene = embed_triangle(rat(1, 5), rat(1, 3)).unwrap();
        assert_eq!(scalene.right_half(), Err(GeometryError::NotIsosceles));
    }

    #[test]
    fn square_is_rational() {
        let s = Polygon::unit_square();
        assert!(s.is_rational());
        assert_eq!(s.dihedral_order(), Some(2));
        assert_eq!(s.edge(3), (Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)));
        assert!(s.contains(Vec2::new(0.5, 0.5), 0.0));
    }
}
