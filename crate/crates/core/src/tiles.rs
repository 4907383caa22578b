//! Orbit tiles: the set of triangle shapes realising a given combinatorial type.
//!
//! A word `w` of even length is realised on `P` iff the period map of the
//! unfolding is a translation (its rotation `Θ(P)` vanishes mod 2π) and some
//! start `x` clears every gate when shooting in the translation direction
//! `D(P)`. For fixed `D` the clearance `Λ(x) = Ω(P, x, D)` is a minimum of
//! affine functions of `x`, so its maximum is found exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{AngleValue, RationalAngle};
use crate::comb_type::CombType;
use crate::geometry::{embed_triangle, unit, Polygon, TriangleShape};
use crate::par::Execution;
use crate::unfold::{clearance_pieces, closed_word, closing_direction, unfold_chain, UnfoldError};

pub const MARGIN_TOL: f64 = 0.0;
pub const ROTATION_TOL: f64 = 1e-10;
const BISECTION_TOL: f64 = 1e-12;
const EXACT_GATE_LIMIT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TileError {
    #[error("word must have even length and use triangle edges 1..=3")]
    BadWord,
    #[error("no member found within the search budget")]
    NotFound,
    #[error("tile is empty on every probe shape")]
    EmptyTile,
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
}

/// `Θ(θ₁, θ₂) = c1·θ₁ + c2·θ₂ + c0·π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineFunctional {
    pub c1: i64,
    pub c2: i64,
    pub c0: i64,
}

// interior angle at v1, v2, v3 as (θ₁, θ₂, π) coefficients
const VERTEX_ANGLE: [[i64; 3]; 3] = [[1, 0, 0], [-1, -1, 1], [0, 1, 0]];

fn next_edge(a: usize) -> usize {
    a % 3 + 1
}

impl AffineFunctional {
    pub const ZERO: AffineFunctional = AffineFunctional { c1: 0, c2: 0, c0: 0 };

    pub fn eval(&self, theta1: f64, theta2: f64) -> f64 {
        self.c1 as f64 * theta1 + self.c2 as f64 * theta2 + self.c0 as f64 * PI
    }

    /// Exact value as a multiple of π.
    pub fn eval_exact(&self, q1: RationalAngle, q2: RationalAngle) -> Option<RationalAngle> {
        q1.checked_mul_int(self.c1)
            .and_then(|a| a.checked_add(q2.checked_mul_int(self.c2)?))
            .and_then(|a| a.checked_add(RationalAngle::integer(self.c0)))
            .ok()
    }

    /// The rotation part is identically zero.
    pub fn is_constant(&self) -> bool {
        self.c1 == 0 && self.c2 == 0
    }

    pub fn is_even(&self) -> bool {
        self.c1 % 2 == 0 && self.c2 % 2 == 0 && self.c0 % 2 == 0
    }

    /// `Θ ≡ 0 (mod 2π)` at the given angles: exact for two rationals.
    pub fn vanishes_at(&self, theta1: &AngleValue, theta2: &AngleValue) -> bool {
        if let (Some(q1), Some(q2)) = (theta1.as_rational(), theta2.as_rational()) {
            if let Some(v) = self.eval_exact(q1, q2) {
                return v.is_integer() && v.numerator() % 2 == 0;
            }
        }
        let v = self.eval(theta1.radians(), theta2.radians());
        let r = v - 2.0 * PI * (v / (2.0 * PI)).round();
        r.abs() <= ROTATION_TOL
    }

    pub fn swap_legs(&self) -> AffineFunctional {
        AffineFunctional { c1: self.c2, c2: self.c1, c0: self.c0 }
    }
}

/// Rotation of the period map of a triangle word, as an affine functional.
///
/// The period's linear part is `r_{w₁} r_{w₂} ⋯ r_{w_{k−1}} r_{w₀}`; each
/// consecutive pair of reflections across edges meeting at a vertex rotates
/// by twice the vertex angle, with a sign given by the edge order.
pub fn rotation_functional(seq: &[usize]) -> Result<AffineFunctional, TileError> {
    let closed = closed_word(seq);
    let k = closed.len().saturating_sub(1);
    if k == 0 || k % 2 != 0 || closed.iter().any(|&e| !(1..=3).contains(&e)) {
        return Err(TileError::BadWord);
    }
    if closed.windows(2).any(|w| w[0] == w[1]) {
        return Err(TileError::BadWord);
    }
    let mut c = [0i64; 3];
    for pair in closed[1..].chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let (sign, vertex) = if b == next_edge(a) { (2, b) } else { (-2, a) };
        for (ci, vi) in c.iter_mut().zip(VERTEX_ANGLE[vertex - 1]) {
            *ci += sign * vi;
        }
    }
    Ok(AffineFunctional { c1: c[0], c2: c[1], c0: c[2] })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    Inside { witness: f64, margin: f64, direction: f64 },
    Outside { reason: OutsideReason },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutsideReason {
    RotationNonzero,
    NotATranslation,
    Outward,
    ParallelGate,
    NoClearance { margin: f64 },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }

    pub fn witness(&self) -> Option<f64> {
        match self {
            Membership::Inside { witness, .. } => Some(*witness),
            _ => None,
        }
    }

    pub fn margin(&self) -> Option<f64> {
        match self {
            Membership::Inside { margin, .. } => Some(*margin),
            Membership::Outside { reason: OutsideReason::NoClearance { margin } } => Some(*margin),
            _ => None,
        }
    }
}

fn eval_pieces(pieces: &[(f64, f64)], x: f64) -> f64 {
    pieces.iter().map(|(c, s)| c + s * x).fold(f64::INFINITY, f64::min)
}

/// Maximum over `[0, 1]` of `min_j (c_j + s_j·x)`.
pub fn maximize_min_affine(pieces: &[(f64, f64)]) -> (f64, f64) {
    if pieces.len() > 2 * EXACT_GATE_LIMIT {
        return golden_section(pieces);
    }
    let slopes_at = |x: f64| {
        let v = eval_pieces(pieces, x);
        let tie = 1e-13 * (1.0 + v.abs());
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (c, s) in pieces {
            if c + s * x <= v + tie {
                lo = lo.min(*s);
                hi = hi.max(*s);
            }
        }
        (lo, hi)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if slopes_at(0.0).1 <= 0.0 {
        return (0.0, eval_pieces(pieces, 0.0));
    }
    if slopes_at(1.0).0 >= 0.0 {
        return (1.0, eval_pieces(pieces, 1.0));
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let (right, left) = slopes_at(mid);
        if right > 0.0 {
            lo = mid;
        } else if left < 0.0 {
            hi = mid;
        } else {
            return (mid, eval_pieces(pieces, mid));
        }
    }
    // intersect the active rising and falling pieces for the exact breakpoint
    let active = |x: f64| pieces.iter().copied().min_by(|a, b| (a.0 + a.1 * x).total_cmp(&(b.0 + b.1 * x))).expect("nonempty");
    let (rise, fall) = (active(lo), active(hi));
    let mut best = (lo, eval_pieces(pieces, lo));
    if rise.1 != fall.1 {
        let x = (fall.0 - rise.0) / (rise.1 - fall.1);
        if (lo..=hi).contains(&x) {
            let v = eval_pieces(pieces, x);
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    let v = eval_pieces(pieces, hi);
    if v > best.1 {
        best = (hi, v);
    }
    best
}

fn golden_section(pieces: &[(f64, f64)]) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    while b - a > BISECTION_TOL {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if eval_pieces(pieces, x1) < eval_pieces(pieces, x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    let x = 0.5 * (a + b);
    (x, eval_pieces(pieces, x))
}

fn triangle_angles(p: &Polygon) -> (AngleValue, AngleValue) {
    (p.vertex_angle(1), p.vertex_angle(3))
}

/// Whether `P` admits a periodic orbit following the word of `c`.
pub fn tile_membership(p: &Polygon, c: &CombType) -> Membership {
    membership_of_word(p, c.word())
}

pub fn membership_of_word(p: &Polygon, word: &[usize]) -> Membership {
    let outside = |reason| Membership::Outside { reason };
    if p.edge_count() == 3 {
        if let Ok(f) = rotation_functional(word) {
            let (a, b) = triangle_angles(p);
            if !f.vanishes_at(&a, &b) {
                return outside(OutsideReason::RotationNonzero);
            }
        }
    }
    let direction = match closing_direction(p, word) {
        Ok(d) => d,
        Err(_) => return outside(OutsideReason::NotATranslation),
    };
    let chain = match unfold_chain(p, &closed_word(word)) {
        Ok(c) => c,
        Err(_) => return outside(OutsideReason::NotATranslation),
    };
    if unit(direction).dot(&p.inward_normal(word[0])) <= 0.0 {
        return outside(OutsideReason::Outward);
    }
    let pieces = match clearance_pieces(p, &chain, direction) {
        Ok(v) => v,
        Err(UnfoldError::ParallelRay(_)) => return outside(OutsideReason::ParallelGate),
        Err(_) => return outside(OutsideReason::Outward),
    };
    let (witness, margin) = maximize_min_affine(&pieces);
    if margin > MARGIN_TOL {
        Membership::Inside { witness, margin, direction }
    } else {
        outside(OutsideReason::NoClearance { margin })
    }
}

/// One of the lines `c1·θ₁ + c2·θ₂ = offset·π` making up `ker Θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelLine {
    pub c1: i64,
    pub c2: i64,
    /// Right-hand side in units of π.
    pub offset: i64,
    pub isosceles: bool,
    /// Probe shapes on this line found inside the tile.
    pub members: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TileClass {
    Open,
    LineSubset { lines: Vec<KernelLine> },
    Empty,
}

const PROBE_GRID: usize = 40;
const LINE_PROBES: usize = 200;

fn shape(theta1: f64, theta2: f64) -> Option<Polygon> {
    embed_triangle(AngleValue::Real(theta1), AngleValue::Real(theta2)).ok().map(|t| t.polygon().clone())
}

/// Points of the open simplex on `c1·θ₁ + c2·θ₂ = rhs`.
fn line_probe_points(c1: f64, c2: f64, rhs: f64, count: usize) -> Vec<(f64, f64)> {
    // parametrise by one coordinate and solve for the other
    let by_theta1 = c2.abs() >= c1.abs();
    let other = |s: f64| if by_theta1 { (rhs - c1 * s) / c2 } else { (rhs - c2 * s) / c1 };
    let ok = |s: f64| {
        let o = other(s);
        s > 0.0 && o > 0.0 && s + o < PI
    };
    let steps = 4096;
    let h = PI / steps as f64;
    let valid: Vec<f64> = (1..steps).map(|i| h * i as f64).filter(|&s| ok(s)).collect();
    let (Some(&first), Some(&last)) = (valid.first(), valid.last()) else {
        return Vec::new();
    };
    let (lo, hi) = ((first - h).max(0.0), (last + h).min(PI));
    (0..count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
        .filter(|&s| ok(s))
        .map(|s| if by_theta1 { (s, other(s)) } else { (other(s), s) })
        .collect()
}

pub fn kernel_lines(f: &AffineFunctional) -> Vec<KernelLine> {
    if f.is_constant() {
        return Vec::new();
    }
    // c1θ₁ + c2θ₂ ranges over (min, max)·π on the simplex, vertices (0,0), (π,0), (0,π)
    let corners = [0, f.c1, f.c2];
    let lo = *corners.iter().min().unwrap();
    let hi = *corners.iter().max().unwrap();
    let mut out = Vec::new();
    // c1θ₁ + c2θ₂ + c0π = 2πn  ⇔  c1θ₁ + c2θ₂ = (2n − c0)π
    let n_lo = (lo + f.c0).div_euclid(2) - 1;
    let n_hi = (hi + f.c0).div_euclid(2) + 1;
    for n in n_lo..=n_hi {
        let offset = 2 * n - f.c0;
        if offset <= lo || offset >= hi {
            continue;
        }
        out.push(KernelLine { c1: f.c1, c2: f.c2, offset, isosceles: f.c1 == -f.c2 && offset == 0, members: 0 });
    }
    out
}

/// Open, a subset of finitely many lines, or empty on every probe.
pub fn tile_classify(c: &CombType) -> Result<TileClass, TileError> {
    let f = rotation_functional(c.word())?;
    if f.is_constant() {
        let n = PROBE_GRID;
        for i in 0..n {
            for j in 0..n {
                let (t1, t2) = (PI * (i as f64 + 0.5) / n as f64, PI * (j as f64 + 0.5) / n as f64);
                if let Some(p) = shape(t1, t2) {
                    if tile_membership(&p, c).is_inside() {
                        return Ok(TileClass::Open);
                    }
                }
            }
        }
        return Ok(TileClass::Empty);
    }
    let mut lines = kernel_lines(&f);
    for line in &mut lines {
        let pts = line_probe_points(line.c1 as f64, line.c2 as f64, line.offset as f64 * PI, LINE_PROBES);
        line.members = pts.iter().filter_map(|&(a, b)| shape(a, b)).filter(|p| tile_membership(p, c).is_inside()).count();
    }
    lines.retain(|l| l.members > 0);
    if lines.is_empty() {
        Ok(TileClass::Empty)
    } else {
        Ok(TileClass::LineSubset { lines })
    }
}

pub fn is_stable(c: &CombType) -> bool {
    matches!(tile_classify(c), Ok(TileClass::Open))
}

/// A rectangle of `(θ₁, θ₂)` sampled at cell centres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileGrid {
    pub theta1: (f64, f64),
    pub theta2: (f64, f64),
    pub resolution: (usize, usize),
}

impl TileGrid {
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        Self { theta1: (lo, hi), theta2: (lo, hi), resolution: (n, n) }
    }

    /// Square window centred on `(c, c)`.
    pub fn centered(c: f64, half_width: f64, n: usize) -> Self {
        Self::square(c - half_width, c + half_width, n)
    }

    pub fn cell(&self, i: usize, j: usize) -> (f64, f64) {
        let axis = |(a, b): (f64, f64), k: usize, n: usize| a + (b - a) * (k as f64 + 0.5) / n as f64;
        (axis(self.theta1, i, self.resolution.0), axis(self.theta2, j, self.resolution.1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileSample {
    pub theta1: f64,
    pub theta2: f64,
    pub inside: bool,
    pub witness: Option<f64>,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileReport {
    pub comb_type: CombType,
    pub classification: TileClass,
    pub grid: TileGrid,
    /// Row-major over `θ₁` index then `θ₂` index.
    pub samples: Vec<TileSample>,
}

impl TileReport {
    pub fn sample(&self, i: usize, j: usize) -> &TileSample {
        &self.samples[i * self.grid.resolution.1 + j]
    }

    pub fn members(&self) -> usize {
        self.samples.iter().filter(|s| s.inside).count()
    }
}

fn membership_bitmap(c: &CombType, grid: &TileGrid, exec: Execution) -> Vec<TileSample> {
    let (n1, n2) = grid.resolution;
    exec.map_range(n1 * n2, |idx| {
        let (t1, t2) = grid.cell(idx / n2, idx % n2);
        match shape(t1, t2) {
            Some(p) => {
                let m = tile_membership(&p, c);
                TileSample { theta1: t1, theta2: t2, inside: m.is_inside(), witness: m.witness(), margin: m.margin() }
            }
            None => TileSample { theta1: t1, theta2: t2, inside: false, witness: None, margin: None },
        }
    })
}

pub fn tile_sample(c: &CombType, grid: TileGrid, exec: Execution) -> Result<TileReport, TileError> {
    if c.is_empty() || grid.resolution.0 == 0 || grid.resolution.1 == 0 {
        return Err(TileError::BadWord);
    }
    let classification = tile_classify(c)?;
    let samples = membership_bitmap(c, &grid, exec);
    Ok(TileReport { comb_type: c.clone(), classification, grid, samples })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub comb_type: CombType,
    pub applicable: bool,
    pub cells: usize,
    pub members: usize,
    pub asymmetric: Vec<(usize, usize)>,
    /// Asymmetric cells whose whole neighbourhood agrees in membership.
    pub interior_asymmetric: Vec<(usize, usize)>,
}

/// Compare tile membership at `(θ₁, θ₂)` and `(θ₂, θ₁)` on a square grid.
///
/// Relabelling the legs of the mirror shape is a tautology, so the check
/// uses the same word on both sides; it is only asserted when the tile meets
/// the isosceles diagonal somewhere in the window.
pub fn tile_symmetry_check(c: &CombType, grid: TileGrid, exec: Execution) -> SymmetryReport {
    let n = grid.resolution.0;
    let square = TileGrid { theta2: grid.theta1, resolution: (n, n), ..grid };
    let bits = membership_bitmap(c, &square, exec);
    let at = |i: usize, j: usize| bits[i * n + j].inside;
    let applicable = (0..n).any(|i| at(i, i));
    let mut asymmetric = Vec::new();
    let mut interior = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if at(i, j) == at(j, i) {
                continue;
            }
            asymmetric.push((i, j));
            let mut uniform = i > 0 && j > 0 && i + 1 < n && j + 1 < n;
            if uniform {
                'outer: for di in [-1i64, 0, 1] {
                    for dj in [-1i64, 0, 1] {
                        if at((i as i64 + di) as usize, (j as i64 + dj) as usize) != at(i, j) {
                            uniform = false;
                            break 'outer;
                        }
                    }
                }
            }
            if uniform {
                interior.push((i, j));
            }
        }
    }
    SymmetryReport {
        comb_type: c.clone(),
        applicable,
        cells: n * n,
        members: bits.iter().filter(|s| s.inside).count(),
        asymmetric,
        interior_asymmetric: interior,
    }
}

/// An isosceles member with base angle `(a/b)·π`, `b` even, near `near` (radians).
pub fn rational_even_member(c: &CombType, near: f64, max_den: i64) -> Result<TriangleShape, TileError> {
    let q = near / PI;
    let mut den = 2;
    while den <= max_den {
        let mut cands: Vec<i64> = (1..den).filter(|&a| a % 2 == 1 && 2 * a < den).collect();
        cands.sort_by(|a, b| {
            let (da, db) = ((*a as f64 / den as f64 - q).abs(), (*b as f64 / den as f64 - q).abs());
            da.total_cmp(&db).then(a.cmp(b))
        });
        for a in cands.into_iter().take(2) {
            if crate::angle::gcd(a, den) != 1 {
                continue;
            }
            let base = AngleValue::rational(a, den).expect("nonzero denominator");
            let t = embed_triangle(base, base).expect("0 < a/den < 1/2");
            if tile_membership(t.polygon(), c).is_inside() {
                return Ok(t);
            }
        }
        den += 2;
    }
    Err(TileError::NotFound)
}
