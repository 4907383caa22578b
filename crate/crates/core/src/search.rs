//! Angle scans: periodic-direction discovery and near-vertex shots.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::billiard::{detect_periodic_with, shoot_with, BilliardError, BoundaryPoint, Flow, PeriodicOrbit, Tolerances};
use crate::geometry::Polygon;
use crate::par::Execution;
use crate::unfold::{closing_direction, period_rotation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no direction found within the budget")]
    NotFound,
}

/// An open interval of directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleWindow {
    pub lo: f64,
    pub hi: f64,
}

impl AngleWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo < theta && theta < self.hi
    }

    /// `lo + (hi − lo)·i/n`; grids for `n` and `2n` share every other point.
    pub fn grid_point(&self, i: usize, n: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / n as f64
    }
}

const PROXIMITY_GRID: usize = 512;
const BISECTION_STEPS: usize = 64;

fn edges_or_vertex(p: &Polygon, x: BoundaryPoint, theta: f64, delta: f64, budget: usize) -> Result<Vec<usize>, bool> {
    match shoot_with(p, x, theta, budget, delta) {
        Ok(t) => Ok(t.hit_edges()),
        Err(BilliardError::VertexHit(_)) => Err(true),
        Err(_) => Err(false),
    }
}

/// Some direction in the window whose shot passes within `δ` of a vertex in
/// at most `budget` bounces: a grid scan, then bisection between neighbouring
/// grid directions whose edge sequences differ.
pub fn vertex_proximity_search(p: &Polygon, x: BoundaryPoint, window: AngleWindow, delta: f64, budget: usize) -> Result<f64, SearchError> {
    let n = PROXIMITY_GRID;
    let mut seqs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let theta = window.grid_point(i, n);
        match edges_or_vertex(p, x, theta, delta, budget) {
            Err(true) => return Ok(theta),
            r => seqs.push((theta, r.ok())),
        }
    }
    for pair in seqs.windows(2) {
        let ((mut lo, Some(left)), (mut hi, Some(right))) = (pair[0].clone(), pair[1].clone()) else { continue };
        let Some(split) = left.iter().zip(&right).position(|(a, b)| a != b) else { continue };
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            match edges_or_vertex(p, x, mid, delta, budget) {
                Err(true) => return Ok(mid),
                Err(false) => break,
                Ok(seq) => {
                    if seq[..=split] == left[..=split] {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
        }
    }
    Err(SearchError::NotFound)
}

/// Candidate periodic words seen while shooting at `theta`: every return to
/// the start edge whose composed reflection is the identity.
fn candidate_words(p: &Polygon, start: BoundaryPoint, theta: f64, max_hits: usize, tol: Tolerances) -> Vec<Vec<usize>> {
    let Ok(mut flow) = Flow::new(p, start, theta, tol.vertex) else { return Vec::new() };
    let mut word = vec![start.edge];
    let mut out = Vec::new();
    for _ in 0..max_hits {
        let Ok(h) = flow.step() else { break };
        if h.point.edge == start.edge && word.len() % 2 == 0 {
            let closes = match h.element {
                Some(g) => g.is_identity(),
                None => period_rotation(p, &word).is_ok_and(|r| r.abs() < tol.direction),
            };
            if closes {
                out.push(word.clone());
            }
        }
        word.push(h.point.edge);
    }
    out
}

/// Periodic orbits from `start` with directions in the window.
///
/// Each grid direction is simulated; every candidate word it produces
/// yields an exact closing direction, which is then verified by simulation.
/// Results are deduplicated by direction (to 1e−9) and sorted.
pub fn discover_periodic(
    p: &Polygon,
    start: BoundaryPoint,
    window: AngleWindow,
    n_angles: usize,
    max_hits: usize,
    tol: Tolerances,
    exec: Execution,
) -> Vec<PeriodicOrbit> {
    let per_angle = exec.map_range(n_angles.saturating_sub(1), |i| {
        let theta = window.grid_point(i + 1, n_angles);
        let mut found = Vec::new();
        for w in candidate_words(p, start, theta, max_hits, tol) {
            let Ok(d) = closing_direction(p, &w) else { continue };
            if !window.contains(d) {
                continue;
            }
            if let Ok(Some(o)) = detect_periodic_with(p, start, d, max_hits, tol) {
                found.push(o);
            }
        }
        found
    });
    let mut unique: BTreeMap<i64, PeriodicOrbit> = BTreeMap::new();
    for o in per_angle.into_iter().flatten() {
        let key = (o.direction() * 1e9).round() as i64;
        unique.entry(key).or_insert(o);
    }
    unique.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::AngleValue;
    use crate::geometry::embed_triangle;
    use std::f64::consts::PI;

    fn equilateral() -> Polygon {
        let t = AngleValue::rational(1, 3).unwrap();
        embed_triangle(t, t).unwrap().polygon().clone()
    }

    #[test]
    fn apex_found_on_the_axis() {
        let w = AngleWindow::new(PI / 2.0 - 0.1, PI / 2.0 + 0.1);
        let theta = vertex_proximity_search(&equilateral(), BoundaryPoint::new(3, 0.5), w, 1e-9, 10).unwrap();
        assert!((theta - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn square_corner_reachable() {
        let s = Polygon::unit_square();
        let theta = vertex_proximity_search(&s, BoundaryPoint::new(3, 0.5), AngleWindow::new(0.7, 0.9), 1e-3, 20).unwrap();
        assert!(AngleWindow::new(0.7, 0.9).contains(theta) || theta == 0.7 || theta == 0.9);
    }

    #[test]
    fn discovery_finds_square_families() {
        let s = Polygon::unit_square();
        let found = discover_periodic(
            &s,
            BoundaryPoint::new(3, 0.3),
            AngleWindow::new(0.0, PI),
            64,
            20,
            Tolerances::default(),
            Execution::Sequential,
        );
        assert!(found.iter().any(|o| (o.direction() - PI / 2.0).abs() < 1e-12));
        for o in &found {
            assert_eq!(o.period % 2, 0);
        }
        let dirs: Vec<f64> = found.iter().map(|o| o.direction()).collect();
        assert!(dirs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn refinement_is_monotone() {
        let p = equilateral();
        let start = BoundaryPoint::new(3, 0.37);
        let w = AngleWindow::new(0.05, PI - 0.05);
        let key = |v: &[PeriodicOrbit]| v.iter().map(|o| (o.direction() * 1e9).round() as i64).collect::<Vec<_>>();
        let coarse = key(&discover_periodic(&p, start, w, 100, 30, Tolerances::default(), Execution::Sequential));
        let fine = key(&discover_periodic(&p, start, w, 200, 30, Tolerances::default(), Execution::Parallel));
        assert!(!coarse.is_empty());
        assert!(coarse.iter().all(|k| fine.contains(k)));
    }
}
