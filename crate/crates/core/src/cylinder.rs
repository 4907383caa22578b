//! Cylinders of parallel periodic orbits.

use serde::{Deserialize, Serialize};

use crate::billiard::{angle_of, detect_periodic, BilliardError, BoundaryPoint, PeriodicOrbit, DEFAULT_EPS_VERTEX};
use crate::comb_type::CombType;
use crate::geometry::{cross, unit, Polygon, Vec2};
use crate::unfold::{clearance_pieces, unfold_chain, UnfoldError};

/// The vertex that a boundary orbit of the cylinder runs into.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleEnd {
    /// Gate index along the closed word, 1-based.
    pub gate: usize,
    /// Vertex of the base polygon.
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub comb_type: CombType,
    pub direction: f64,
    pub start_edge: usize,
    /// Open interval of start parameters on `start_edge`.
    pub start_interval: (f64, f64),
    pub width: f64,
    pub lower: Option<SaddleEnd>,
    pub upper: Option<SaddleEnd>,
    /// The defining orbit starts within the vertex tube of a boundary orbit.
    pub near_boundary: bool,
}

impl Cylinder {
    pub fn contains(&self, t: f64) -> bool {
        self.start_interval.0 < t && t < self.start_interval.1
    }
}

fn saddle(p: &Polygon, seq: &[usize], piece: usize) -> SaddleEnd {
    let gate = piece / 2 + 1;
    let edge = seq[gate];
    let vertex = if piece % 2 == 0 { edge } else { edge % p.edge_count() + 1 };
    SaddleEnd { gate, vertex }
}

/// Maximal family of orbits with `f`'s word and direction: the start
/// parameters where every gate is cleared.
pub fn cylinder_of(p: &Polygon, f: &PeriodicOrbit) -> Result<Cylinder, UnfoldError> {
    let seq = f.closed_word();
    let chain = unfold_chain(p, &seq)?;
    let pieces = clearance_pieces(p, &chain, f.direction())?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut lower, mut upper) = (None, None);
    for (j, &(c, s)) in pieces.iter().enumerate() {
        if s > 0.0 {
            let r = -c / s;
            if r > lo {
                lo = r;
                lower = Some(saddle(p, &seq, j));
            }
        } else if s < 0.0 {
            let r = -c / s;
            if r < hi {
                hi = r;
                upper = Some(saddle(p, &seq, j));
            }
        } else if c <= 0.0 {
            hi = lo;
        }
    }
    let hi = hi.max(lo);
    let edge = p.edge_vector(f.start().edge);
    let sin = cross(edge.normalize(), unit(f.direction())).abs();
    let width = (hi - lo) * edge.norm() * sin;
    let t = f.start().t;
    let near_boundary = (t - lo).min(hi - t) * edge.norm() * sin < 10.0 * DEFAULT_EPS_VERTEX;
    Ok(Cylinder {
        comb_type: f.comb_type.clone(),
        direction: f.direction(),
        start_edge: f.start().edge,
        start_interval: (lo, hi),
        width,
        lower,
        upper,
        near_boundary,
    })
}

/// The orbit traversed backwards from the same start point.
pub fn reversed(p: &Polygon, f: &PeriodicOrbit, tol: f64) -> Result<Option<PeriodicOrbit>, BilliardError> {
    let last = f.trajectory.hits.last().expect("periodic orbits have hits");
    let back = angle_of(-unit(last.incoming));
    detect_periodic(p, f.start(), back, f.period, tol)
}

/// `g` restarted at its `s`-th bounce, if that bounce lies on `f`'s start edge
/// with `f`'s direction and the words agree from there.
fn aligned_start(f: &PeriodicOrbit, g: &PeriodicOrbit, s: usize, dir_tol: f64) -> Option<BoundaryPoint> {
    let k = f.period;
    let rotated: Vec<usize> = (0..k).map(|i| g.word[(i + s) % k]).collect();
    if rotated != f.word {
        return None;
    }
    let (point, dir) = if s == 0 {
        (g.start(), g.direction())
    } else {
        let h = &g.trajectory.hits[s - 1];
        (h.point, h.outgoing)
    };
    ((unit(dir) - unit(f.direction())).norm() < dir_tol).then_some(point)
}

fn strip_is_clear(p: &Polygon, f: &PeriodicOrbit, g_start: BoundaryPoint) -> bool {
    let seq = f.closed_word();
    let Ok(chain) = unfold_chain(p, &seq) else { return false };
    let z0 = f.start().position(p);
    let z1 = g_start.position(p);
    let d = unit(f.direction());
    let translation = chain.composed().translation;
    let along_max = translation.dot(&d);
    let n = Vec2::new(-d.y, d.x);
    let side = z1 - z0;
    let w1 = n.dot(&side);
    let eps = 1e-12;
    if w1.abs() <= eps {
        return true;
    }
    for copy in &chain.copies {
        for v in copy {
            let rel = v - z0;
            let lambda = n.dot(&rel) / w1;
            let along = d.dot(&rel) - lambda * d.dot(&side);
            if lambda * w1.abs() > eps && (1.0 - lambda) * w1.abs() > eps && along > eps && along < along_max - eps {
                return false;
            }
        }
    }
    true
}

/// Whether `f` and `g` (possibly reversed) lie in one cylinder: equal words
/// after realignment, equal directions, and a parallelogram between them in
/// the unfolding that contains no vertex.
pub fn same_cylinder(p: &Polygon, f: &PeriodicOrbit, g: &PeriodicOrbit) -> bool {
    let dir_tol = 1e-9;
    let tol = 1e-8;
    let mut variants = vec![g.clone()];
    if let Ok(Some(r)) = reversed(p, g, tol) {
        variants.push(r);
    }
    for h in &variants {
        if h.period != f.period {
            continue;
        }
        for s in 0..h.period {
            if let Some(start) = aligned_start(f, h, s, dir_tol) {
                if strip_is_clear(p, f, start) {
                    return true;
                }
            }
        }
    }
    false
}
