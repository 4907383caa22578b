//! Folding an isosceles triangle onto its right half, and the induced map
//! between the two translation surfaces.
//!
//! `T` is embedded with its base centred on the origin; `T′` is the half
//! with `x ≥ 0`. Source copy `α` maps onto target copies `α` and `α r`, where
//! `r` is the reflection in the symmetry axis. The map has degree 2 exactly
//! when `r` already lies in `G(T)`, which happens iff the base angle has an
//! even denominator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::billiard::{angle_of, detect_periodic, BilliardError, BoundaryPoint, Hit, PeriodicOrbit, Trajectory};
use crate::comb_type::CombType;
use crate::geometry::{unit, GeometryError, Polygon, TriangleShape, Vec2};
use crate::group::Dihedral;
use crate::surface::{build_surface, flow_segment, straight_line_flow, SurfaceError, SurfacePath, SurfacePoint, TranslationSurface};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoldError {
    #[error("triangle is not isosceles")]
    NotIsosceles,
    #[error("base angle is not rational")]
    IrrationalPolygon,
    #[error("covering has degree 1, no deck transformation")]
    NotADoubleCover,
    #[error("folded trajectory meets vertex v{vertex}' at hit {hit}")]
    VertexHit { vertex: usize, hit: usize },
    #[error("point is not in the fiber over the path start")]
    NotInFiber,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Billiard(#[from] BilliardError),
}

impl From<GeometryError> for FoldError {
    fn from(_: GeometryError) -> Self {
        FoldError::NotIsosceles
    }
}

/// `fold(z) = z` for `Re z ≥ 0`, else `−conj(z)`.
pub fn fold_point(z: Vec2) -> Vec2 {
    Vec2::new(z.x.abs(), z.y)
}

/// Reflection in the symmetry axis.
pub fn mirror_point(z: Vec2) -> Vec2 {
    Vec2::new(-z.x, z.y)
}

/// Direction angle after reflection in the symmetry axis.
pub fn mirror_direction(theta: f64) -> f64 {
    angle_of(mirror_point(unit(theta)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldedTriangle {
    pub parent: TriangleShape,
    pub right: TriangleShape,
}

impl FoldedTriangle {
    pub fn new(t: &TriangleShape) -> Result<Self, FoldError> {
        Ok(Self { parent: t.clone(), right: t.right_half()? })
    }

    /// Edge of `T′` carrying the fold of a point on edge `e` of `T`.
    pub fn edge_map(e: usize) -> usize {
        match e {
            1 | 2 => 1,
            _ => 3,
        }
    }

    /// Boundary point of `T′` at position `z` on edge `e′`.
    fn boundary_point(&self, e: usize, z: Vec2) -> BoundaryPoint {
        let (a, b) = self.right.polygon().edge(e);
        BoundaryPoint::new(e, (z - a).dot(&(b - a)) / (b - a).norm_squared())
    }

    /// Start of the folded shot corresponding to `(x, θ)` on `T`.
    pub fn fold_start(&self, x: BoundaryPoint, theta: f64) -> (BoundaryPoint, f64) {
        let z = x.position(self.parent.polygon());
        let th = if z.x < 0.0 { mirror_direction(theta) } else { theta };
        (self.boundary_point(Self::edge_map(x.edge), fold_point(z)), th)
    }

    /// The axis-mirror of a shot on `T`.
    pub fn mirror_start(x: BoundaryPoint, theta: f64) -> (BoundaryPoint, f64) {
        let edge = match x.edge {
            1 => 2,
            2 => 1,
            e => e,
        };
        (BoundaryPoint::new(edge, 1.0 - x.t), mirror_direction(theta))
    }
}

/// Left or right of the symmetry axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

fn side(z: Vec2) -> Side {
    if z.x < 0.0 {
        Side::Left
    } else {
        Side::Right
    }
}

/// Symbolic fold of a hit sequence: legs merge into `1`, `2` is inserted
/// wherever consecutive hits sit on opposite sides of the axis.
pub fn fold_word(hits: &[(usize, Side)], start_side: Side) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = start_side;
    for &(e, s) in hits {
        if s != prev {
            out.push(2);
        }
        out.push(FoldedTriangle::edge_map(e));
        prev = s;
    }
    out
}

/// Fold a trajectory on `T` into `T′` segment by segment.
pub fn fold_trajectory(ft: &FoldedTriangle, f: &Trajectory, eps_vertex: f64) -> Result<Trajectory, FoldError> {
    let tp = ft.parent.polygon();
    let rp = ft.right.polygon();
    let (start, direction) = ft.fold_start(f.start, f.direction);
    let mut hits = Vec::new();
    let mut z0 = f.start.position(tp);
    let mut dir = f.direction;
    let push = |hits: &mut Vec<Hit>, e: usize, z: Vec2, incoming: f64, outgoing: f64| -> Result<(), FoldError> {
        let w = fold_point(z);
        for v in 1..=3 {
            if (rp.vertex(v) - w).norm() < eps_vertex {
                return Err(FoldError::VertexHit { vertex: v, hit: hits.len() });
            }
        }
        let (inc, out) = if z.x < 0.0 { (mirror_direction(incoming), mirror_direction(outgoing)) } else { (incoming, outgoing) };
        hits.push(Hit { point: ft.boundary_point(e, w), position: w, incoming: inc, outgoing: out, element: None });
        Ok(())
    };
    for h in &f.hits {
        let z1 = h.position;
        if side(z0) != side(z1) && z0.x != 0.0 && z1.x != 0.0 {
            let s = z0.x / (z0.x - z1.x);
            let zc = z0 + (z1 - z0) * s;
            let going_right = z1.x > 0.0;
            let (inc, out) = if going_right { (mirror_direction(dir), dir) } else { (dir, mirror_direction(dir)) };
            push(&mut hits, 2, Vec2::new(0.0, zc.y), inc, out)?;
        }
        push(&mut hits, FoldedTriangle::edge_map(h.point.edge), z1, h.incoming, h.outgoing)?;
        z0 = z1;
        dir = h.outgoing;
    }
    let length = f.length;
    Ok(Trajectory { start, direction, hits, length })
}

/// The covering `R(T) → R(T′)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringMap {
    pub fold: FoldedTriangle,
    pub source: TranslationSurface,
    pub target: TranslationSurface,
    /// Source copy `α` ↦ (target copy of `α`, target copy of `α r`).
    pub copy_map: Vec<(usize, usize)>,
    pub degree: u32,
    /// The axis reflection in `G(T′)`.
    pub axis: Dihedral,
}

pub fn build_cover(t: &TriangleShape) -> Result<CoveringMap, FoldError> {
    if !t.is_rational() {
        return Err(FoldError::IrrationalPolygon);
    }
    let fold = FoldedTriangle::new(t)?;
    let source = build_surface(t.polygon())?;
    let target = build_surface(fold.right.polygon())?;
    let n_t = target.group.n();
    let axis = Dihedral::reflection(n_t, (n_t / 2) as i64);
    let copy_map: Vec<(usize, usize)> = source
        .copies
        .iter()
        .map(|c| {
            let a = c.group_element.lift(n_t).expect("G(T) embeds in G(T')");
            (target.copy_of(&a).unwrap(), target.copy_of(&a.compose(&axis)).unwrap())
        })
        .collect();
    let mut hit = vec![0u32; target.copies.len()];
    for &(a, b) in &copy_map {
        hit[a] += 1;
        hit[b] += 1;
    }
    let degree = hit[0];
    debug_assert!(hit.iter().all(|&h| h == degree));
    Ok(CoveringMap { fold, source, target, copy_map, degree, axis })
}

impl CoveringMap {
    /// `π(α, w)`.
    pub fn project(&self, p: &SurfacePoint) -> SurfacePoint {
        let (right, left) = self.copy_map[p.copy];
        if p.position.x >= 0.0 {
            SurfacePoint { copy: right, position: p.position }
        } else {
            SurfacePoint { copy: left, position: mirror_point(p.position) }
        }
    }

    /// All source points over `q`, found by solving `π(α, w) = q` for each
    /// candidate `(α, w) ∈ {(β, w′), (β r, r w′)}`.
    pub fn fiber(&self, q: &SurfacePoint) -> Vec<SurfacePoint> {
        let beta = self.target.element(q.copy);
        let n_s = self.source.group.n();
        let mut out = Vec::new();
        for (g, w) in [(beta, q.position), (beta.compose(&self.axis), mirror_point(q.position))] {
            if let Some(a) = g.restrict(n_s).and_then(|a| self.source.copy_of(&a)) {
                let p = SurfacePoint { copy: a, position: w };
                if self.target.same_point(&self.project(&p), q, 1e-12)
                    && !out.iter().any(|o: &SurfacePoint| self.source.same_point(o, &p, 1e-12))
                {
                    out.push(p);
                }
            }
        }
        out
    }

    /// `λ(α, w) = (α r, r w)`.
    pub fn deck(&self) -> Result<Deck, FoldError> {
        if self.degree != 2 {
            return Err(FoldError::NotADoubleCover);
        }
        let n_s = self.source.group.n();
        let r = self.axis.restrict(n_s).ok_or(FoldError::NotADoubleCover)?;
        Ok(Deck { r })
    }

    /// `(r₁ r₃)^{b/2}` in `G(T)`.
    pub fn half_turn(&self) -> Dihedral {
        let g = &self.source.group;
        let b = self.fold.parent.theta1().as_rational().map(|a| a.denominator()).unwrap_or(2) as u32;
        g.generator(1).compose(&g.generator(3)).pow(b / 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Deck {
    pub r: Dihedral,
}

impl Deck {
    pub fn apply(&self, s: &TranslationSurface, p: &SurfacePoint) -> SurfacePoint {
        let a = s.element(p.copy).compose(&self.r);
        SurfacePoint { copy: s.copy_of(&a).expect("r lies in G(T)"), position: mirror_point(p.position) }
    }
}

fn random_point(rng: &mut ChaCha8Rng, p: &Polygon) -> Vec2 {
    let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
    if a + b > 1.0 {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    let (v1, v2, v3) = (p.vertex(1), p.vertex(2), p.vertex(3));
    v3 + (v1 - v3) * a + (v2 - v3) * b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub samples: usize,
    pub skipped: usize,
    /// Largest target-side distance between `π(flow(p))` and `flow(π(p))`.
    pub max_deviation: f64,
}

/// Transport random short segments through `π` and compare with the flow
/// downstairs of the same argument and length.
pub fn pullback_check(cover: &CoveringMap, samples: usize, seed: u64) -> PullbackReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_dev, mut skipped) = (0.0f64, 0);
    for _ in 0..samples {
        let p = SurfacePoint { copy: rng.gen_range(0..cover.source.copies.len()), position: random_point(&mut rng, &cover.source.polygon) };
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let len = rng.gen_range(0.05..0.5);
        let (Ok(up), Ok(down)) =
            (flow_segment(&cover.source, p, theta, len, 1e-9), flow_segment(&cover.target, cover.project(&p), theta, len, 1e-9))
        else {
            skipped += 1;
            continue;
        };
        max_dev = max_dev.max((up.length - down.length).abs());
        for k in 0..=8 {
            let s = up.length * k as f64 / 8.0;
            let a = cover.project(&up.point_at(&cover.source, s));
            let b = down.point_at(&cover.target, s);
            let dev = if cover.target.same_point(&a, &b, 1e-9) { (a.position - b.position).norm() } else { f64::INFINITY };
            max_dev = max_dev.max(dev);
        }
    }
    PullbackReport { samples, skipped, max_deviation: max_dev }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeckIdentityReport {
    pub start: BoundaryPoint,
    pub direction: f64,
    /// Largest distance between `λ(f(t))` and `(r₁r₃)^{b/2}(f(1 − t))`,
    /// infinite when the two lie in different copies.
    pub max_deviation: f64,
    pub pointwise: bool,
    pub comb_type_preserved: bool,
}

/// Compare `λ∘f(t)` with `(r₁r₃)^{b/2}∘f(1 − t)` along a closed flow on `R(T)`
/// started from a base point, and compare the edge words of `f` and `λ∘f`.
pub fn deck_identity_check(cover: &CoveringMap, orbit: &PeriodicOrbit, samples: usize, tol: f64) -> Result<DeckIdentityReport, FoldError> {
    let deck = cover.deck()?;
    let s = &cover.source;
    let start = SurfacePoint { copy: 0, position: orbit.start().position(&s.polygon) };
    let f = closed_flow(s, start, orbit.direction(), 4 * orbit.period + 4)?;
    let half = cover.half_turn();
    let mut max_dev = 0.0f64;
    for k in 0..=samples {
        let t = k as f64 / samples as f64;
        let a = deck.apply(s, &f.point_at_fraction(s, t));
        let b = crate::surface::group_act(s, &half, &f.point_at_fraction(s, 1.0 - t))?;
        let dev = if s.same_point(&a, &b, tol.max(1e-12)) { (a.position - b.position).norm() } else { f64::INFINITY };
        max_dev = max_dev.max(dev);
    }
    let image = closed_flow(s, deck.apply(s, &start), orbit.direction(), 4 * orbit.period + 4)?;
    let word = |p: &SurfacePath| CombType::new(closing_word(p, orbit.start().edge), true);
    let comb_type_preserved = matches!((word(&f), word(&image)), (Ok(a), Ok(b)) if a == b);
    Ok(DeckIdentityReport {
        start: orbit.start(),
        direction: orbit.direction(),
        max_deviation: max_dev,
        pointwise: max_dev <= tol,
        comb_type_preserved,
    })
}

fn closed_flow(s: &TranslationSurface, p: SurfacePoint, theta: f64, max_crossings: usize) -> Result<SurfacePath, FoldError> {
    let path = straight_line_flow(s, p, theta, max_crossings, 1e-9)?;
    if !path.closed {
        return Err(FoldError::Billiard(BilliardError::BadStart(p.position.x)));
    }
    Ok(path)
}

/// Edge word of a closed base-edge flow: start edge then every crossing
/// except the final return.
fn closing_word(p: &SurfacePath, start_edge: usize) -> Vec<usize> {
    let mut w = vec![start_edge];
    let edges = p.crossed_edges();
    w.extend_from_slice(&edges[..edges.len().saturating_sub(1)]);
    w
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub path: SurfacePath,
    /// Circuits of the target path before the lift closes: 1, 2, or `None`
    /// if it did not close within two.
    pub circuits: Option<u32>,
    pub max_deviation: f64,
}

/// The lift of a target flow through a chosen point of the fiber.
pub fn lift_trajectory(cover: &CoveringMap, f: &SurfacePath, basepoint: SurfacePoint) -> Result<Lift, FoldError> {
    if !cover.target.same_point(&cover.project(&basepoint), &f.start, 1e-9) {
        return Err(FoldError::NotInFiber);
    }
    let path = flow_segment(&cover.source, basepoint, f.theta, 2.0 * f.length + 1e-9, 1e-9)?;
    let circuits = path.closed.then(|| (path.length / f.length).round() as u32);
    let mut max_dev = 0.0f64;
    for k in 0..=32 {
        let s = f.length * k as f64 / 32.0;
        let a = cover.project(&path.point_at(&cover.source, s));
        let b = f.point_at(&cover.target, s);
        let dev = if cover.target.same_point(&a, &b, 1e-9) { (a.position - b.position).norm() } else { f64::INFINITY };
        max_dev = max_dev.max(dev);
    }
    Ok(Lift { path, circuits, max_deviation: max_dev })
}

/// Whether the axis mirror of `f` traces `f` backwards.
pub fn mirror_check(t: &TriangleShape, f: &PeriodicOrbit, tol: f64) -> Result<bool, FoldError> {
    if !t.is_isosceles() || !t.is_centered() {
        return Err(FoldError::NotIsosceles);
    }
    let hits = &f.trajectory.hits;
    Ok(hits.iter().all(|h| {
        let m = mirror_point(h.position);
        let d = mirror_point(unit(h.outgoing));
        hits.iter().any(|g| (g.position - m).norm() < tol && (unit(g.incoming) + d).norm() < tol)
    }))
}

/// The axis-mirrored orbit, re-detected by simulation.
pub fn mirror_orbit(t: &TriangleShape, f: &PeriodicOrbit, tol: f64) -> Result<Option<PeriodicOrbit>, FoldError> {
    let (x, th) = FoldedTriangle::mirror_start(f.start(), f.direction());
    Ok(detect_periodic(t.polygon(), x, th, f.period, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::AngleValue;
    use crate::billiard::shoot;
    use crate::geometry::embed_triangle;
    use std::f64::consts::PI;

    fn iso(a: i64, b: i64) -> TriangleShape {
        let t = AngleValue::rational(a, b).unwrap();
        embed_triangle(t, t).unwrap()
    }

    #[test]
    fn fold_is_idempotent() {
        let z = Vec2::new(-0.2, 0.3);
        assert_eq!(fold_point(fold_point(z)), fold_point(z));
        assert_eq!(fold_point(mirror_point(z)), fold_point(z));
    }

    #[test]
    fn degrees_follow_parity() {
        for b in 3..=12i64 {
            for a in 1..b {
                if crate::angle::gcd(a, b) != 1 || 2 * a >= b {
                    continue;
                }
                let c = build_cover(&iso(a, b)).unwrap();
                assert_eq!(c.degree, if b % 2 == 0 { 2 } else { 1 }, "{a}/{b}");
            }
        }
    }

    #[test]
    fn three_eighths_cover() {
        let c = build_cover(&iso(3, 8)).unwrap();
        assert_eq!((c.degree, c.source.genus, c.target.genus), (2, 3, 2));
        assert_eq!(c.source.euler_characteristic(), 2 * c.target.euler_characteristic());
    }

    #[test]
    fn third_cover_is_bijective() {
        let c = build_cover(&iso(1, 3)).unwrap();
        assert_eq!((c.degree, c.source.copies.len(), c.target.copies.len()), (1, 6, 12));
        assert_eq!((c.source.genus, c.target.genus), (1, 1));
        assert!(c.deck().is_err());
    }

    #[test]
    fn fibers_have_degree_points() {
        for (a, b) in [(3, 8), (1, 4), (1, 3), (2, 5)] {
            let c = build_cover(&iso(a, b)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..50 {
                let q = SurfacePoint { copy: rng.gen_range(0..c.target.copies.len()), position: random_point(&mut rng, &c.target.polygon) };
                assert_eq!(c.fiber(&q).len() as u32, c.degree);
            }
        }
    }

    #[test]
    fn pullback_preserves_flow() {
        for (a, b) in [(3, 8), (1, 3)] {
            let r = pullback_check(&build_cover(&iso(a, b)).unwrap(), 100, 1);
            assert!(r.max_deviation < 1e-10, "{r:?}");
            assert!(r.skipped < 10);
        }
    }

    #[test]
    fn deck_is_an_involution_over_pi() {
        let c = build_cover(&iso(3, 8)).unwrap();
        let d = c.deck().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = SurfacePoint { copy: rng.gen_range(0..16), position: random_point(&mut rng, &c.source.polygon) };
            assert_eq!(d.apply(&c.source, &d.apply(&c.source, &p)), p);
            assert!(c.target.same_point(&c.project(&d.apply(&c.source, &p)), &c.project(&p), 1e-12));
        }
    }

    #[test]
    fn deck_identity_through_the_centre() {
        let t = iso(3, 8);
        let c = build_cover(&t).unwrap();
        let found = crate::search::discover_periodic(
            t.polygon(),
            BoundaryPoint::new(3, 0.5),
            crate::search::AngleWindow::new(0.1, PI / 2.0 - 0.01),
            80,
            24,
            Default::default(),
            crate::par::Execution::Sequential,
        );
        assert!(!found.is_empty());
        for o in &found {
            let r = deck_identity_check(&c, o, 64, 1e-9).unwrap();
            assert!(r.pointwise && r.comb_type_preserved, "{r:?}");
        }
    }

    #[test]
    fn fold_matches_simulation_downstairs() {
        let t = iso(3, 8);
        let ft = FoldedTriangle::new(&t).unwrap();
        for (x, th) in [(0.31, 1.1), (0.7, 2.0), (0.45, 0.8)] {
            let start = BoundaryPoint::new(3, x);
            let f = shoot(t.polygon(), start, th, 30).unwrap();
            let folded = fold_trajectory(&ft, &f, 1e-9).unwrap();
            let (s2, th2) = ft.fold_start(start, th);
            let g = shoot(ft.right.polygon(), s2, th2, folded.hits.len()).unwrap();
            assert_eq!(folded.hit_edges(), g.hit_edges());
            for (a, b) in folded.hits.iter().zip(&g.hits) {
                assert!((a.position - b.position).norm() < 1e-9);
                assert!((unit(a.outgoing) - unit(b.outgoing)).norm() < 1e-9, "{a:?} {b:?}");
            }
            let sides: Vec<(usize, Side)> = f.hits.iter().map(|h| (h.point.edge, side(h.position))).collect();
            assert_eq!(fold_word(&sides, side(start.position(t.polygon()))), folded.hit_edges());
            let (m, mth) = FoldedTriangle::mirror_start(start, th);
            let mirrored = shoot(t.polygon(), m, mth, 30).unwrap();
            assert_eq!(fold_trajectory(&ft, &mirrored, 1e-9).unwrap().hit_edges(), folded.hit_edges());
        }
    }

    #[test]
    fn right_half_trajectory_only_relabels() {
        let t = iso(1, 4);
        let ft = FoldedTriangle::new(&t).unwrap();
        // stays right of the axis: base to leg 1 and back
        let f = shoot(t.polygon(), BoundaryPoint::new(3, 0.9), 2.0, 1).unwrap();
        let folded = fold_trajectory(&ft, &f, 1e-9).unwrap();
        assert_eq!(folded.hit_edges(), vec![1]);
    }

    #[test]
    fn chord_through_base_centre_is_a_vertex_hit() {
        let t = iso(3, 8);
        let ft = FoldedTriangle::new(&t).unwrap();
        let x = BoundaryPoint::new(1, 0.5);
        let aim = angle_of(-x.position(t.polygon()));
        let f = shoot(t.polygon(), x, aim, 3).unwrap();
        assert!(matches!(fold_trajectory(&ft, &f, 1e-9), Err(FoldError::VertexHit { vertex: 3, hit: 0 })));
        assert!(FoldedTriangle::new(&embed_triangle(AngleValue::Real(0.9), AngleValue::Real(1.0)).unwrap()).is_err());
    }

    #[test]
    fn mirror_check_cases() {
        let t = iso(3, 8);
        let x = BoundaryPoint::new(3, 0.8);
        let found = crate::search::discover_periodic(
            t.polygon(),
            x,
            crate::search::AngleWindow::new(0.2, 2.9),
            60,
            20,
            Default::default(),
            crate::par::Execution::Sequential,
        );
        let generic = found.iter().find(|o| (o.direction() - PI / 2.0).abs() > 1e-3).unwrap();
        assert!(!mirror_check(&t, generic, 1e-8).unwrap());
        let scalene = embed_triangle(AngleValue::Real(0.9), AngleValue::Real(1.0)).unwrap();
        assert!(mirror_check(&scalene, generic, 1e-8).is_err());
    }

    #[test]
    fn lifts_close_after_one_or_two_circuits() {
        let c = build_cover(&iso(3, 8)).unwrap();
        let tp = c.target.polygon.clone();
        let start = BoundaryPoint::new(3, 0.37);
        let found = crate::search::discover_periodic(
            &tp,
            start,
            crate::search::AngleWindow::new(0.1, 3.0),
            60,
            24,
            Default::default(),
            crate::par::Execution::Sequential,
        );
        assert!(!found.is_empty());
        let mut seen = std::collections::BTreeSet::new();
        for o in &found {
            let q = SurfacePoint { copy: 0, position: start.position(&tp) };
            let Ok(down) = straight_line_flow(&c.target, q, o.direction(), 200, 1e-9) else { continue };
            if !down.closed {
                continue;
            }
            let fib = c.fiber(&q);
            assert_eq!(fib.len(), 2);
            let d = c.deck().unwrap();
            assert!(c.source.same_point(&d.apply(&c.source, &fib[0]), &fib[1], 1e-12));
            for b in fib {
                let l = lift_trajectory(&c, &down, b).unwrap();
                assert!(l.max_deviation < 1e-9);
                seen.insert(l.circuits);
            }
        }
        assert!(seen.iter().all(|c| matches!(c, Some(1) | Some(2))));
    }
}
