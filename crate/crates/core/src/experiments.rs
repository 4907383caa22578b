//! Batch checks of the fold results on concrete triangles.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::AngleValue;
use crate::billiard::{detect_periodic_with, BoundaryPoint, PeriodicOrbit, Tolerances};
use crate::comb_type::CombType;
use crate::cylinder::{cylinder_of, same_cylinder};
use crate::fold::{mirror_orbit, FoldedTriangle};
use crate::geometry::{embed_triangle, Polygon, TriangleShape};
use crate::par::Execution;
use crate::search::{discover_periodic, AngleWindow};
use crate::tiles::is_stable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("triangle is not isosceles")]
    NotIsosceles,
    #[error("base angle {0} does not satisfy the parity condition")]
    ConditionFails(String),
    #[error("base angle {0} has an even denominator; the scan needs an odd one")]
    EvenDenominator(String),
    #[error("start point is the centre of the base")]
    CenterStart,
    #[error("base coordinate {0} is outside (-1/2, 1/2)")]
    BadStart(f64),
    #[error("orbit of type {0} is not stable")]
    UnstableInput(CombType),
    #[error("angle grid must be at least 1")]
    EmptyGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub shape: TriangleShape,
    /// Start parameters on the base edge.
    pub start_params: Vec<f64>,
    pub angle_window: AngleWindow,
    pub angle_grid: usize,
    pub max_hits: usize,
    pub tolerances: Tolerances,
    /// Compare combinatorial types up to cyclic shift as well as reversal.
    pub cyclic: bool,
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

impl ExperimentConfig {
    /// 50 base starts, 200 directions in `(0, π)`, at most 40 bounces.
    pub fn theorem1_default(shape: TriangleShape) -> Self {
        Self {
            shape,
            start_params: (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect(),
            angle_window: AngleWindow::new(0.0, PI),
            angle_grid: 200,
            max_hits: 40,
            tolerances: Tolerances::default(),
            cyclic: true,
            seed: 0,
            execution: Execution::Parallel,
        }
    }

    /// One base start at coordinate `x`, 2000 directions in `(0.05, π/2 − 0.05)`.
    pub fn theorem3_default(shape: TriangleShape, x: f64) -> Self {
        Self {
            shape,
            start_params: vec![x + 0.5],
            angle_window: AngleWindow::new(0.05, PI / 2.0 - 0.05),
            angle_grid: 2000,
            max_hits: 30,
            tolerances: Tolerances::default(),
            cyclic: true,
            seed: 0,
            execution: Execution::Parallel,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.angle_grid < 1 {
            return Err(ExperimentError::EmptyGrid);
        }
        Ok(())
    }
}

/// A replayable instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub theta1: AngleValue,
    pub theta2: AngleValue,
    pub start: BoundaryPoint,
    pub direction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Annotation {
    /// Direction within tolerance of `nπ/b` (`half = false`) or `π/2 + nπ/b`.
    SpecialAngle {
        n: i64,
        half: bool,
    },
    MirrorCylinder,
    /// Fails the mirror criterion.
    Unsatisfied,
    /// Satisfies the mirror criterion with neither explanation.
    Unexplained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub start: BoundaryPoint,
    pub direction: f64,
    pub period: usize,
    pub comb_type: CombType,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub folded_type: Option<CombType>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annotation: Option<Annotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub key: CombType,
    pub members: Vec<usize>,
    pub types: Vec<CombType>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub message: String,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub orbits: Vec<OrbitRecord>,
    pub groups: Vec<Grouping>,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    fn new(name: &str) -> Self {
        Self { experiment: name.into(), orbits: Vec::new(), groups: Vec::new(), violations: Vec::new(), notes: Vec::new() }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, f: impl Fn(&Annotation) -> bool) -> usize {
        self.orbits.iter().filter(|o| o.annotation.as_ref().is_some_and(&f)).count()
    }
}

fn witness(shape: &TriangleShape, o: &PeriodicOrbit) -> Witness {
    Witness { theta1: shape.theta1(), theta2: shape.theta2(), start: o.start(), direction: o.direction() }
}

/// Base angle is irrational (real-valued) or `aπ/b` with `b` even.
pub fn condition_check(t: &TriangleShape) -> Result<bool, ExperimentError> {
    if !t.is_isosceles() {
        return Err(ExperimentError::NotIsosceles);
    }
    Ok(match t.theta1() {
        AngleValue::Rational(q) => q.denominator() % 2 == 0,
        AngleValue::Real(_) => true,
    })
}

/// Closest `aπ/b` with `b` even, `b ≤ max_den`, `a` odd.
pub fn even_neighbor(beta: f64, max_den: i64) -> AngleValue {
    let mut best = (f64::INFINITY, 1, 2);
    for b in (2..=max_den).step_by(2) {
        let a = (beta / PI * b as f64).round() as i64;
        for a in [a - 1, a, a + 1] {
            if a <= 0 || a % 2 == 0 || 2 * a >= b {
                continue;
            }
            let d = (a as f64 / b as f64 * PI - beta).abs();
            if d < best.0 {
                best = (d, a, b);
            }
        }
    }
    AngleValue::rational(best.1, best.2).expect("nonzero denominator")
}

fn discover_all(p: &Polygon, cfg: &ExperimentConfig, starts: &[BoundaryPoint]) -> Vec<PeriodicOrbit> {
    let per_start = cfg
        .execution
        .map(starts, |&x| discover_periodic(p, x, cfg.angle_window, cfg.angle_grid, cfg.max_hits, cfg.tolerances, Execution::Sequential));
    per_start.into_iter().flatten().collect()
}

/// For every periodic orbit found from the base, fold it, group by folded
/// type and require one unfolded type per group.
pub fn theorem1_verify(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let mut shape = cfg.shape.clone();
    let mut report = ExperimentReport::new("theorem1");
    if !condition_check(&shape)? {
        return Err(ExperimentError::ConditionFails(shape.theta1().to_string()));
    }
    if let AngleValue::Real(beta) = shape.theta1() {
        let q = even_neighbor(beta, 64);
        report.notes.push(format!("irrational base angle probed at its even-denominator neighbour {q}"));
        shape = embed_triangle(q, q).map_err(|_| ExperimentError::NotIsosceles)?;
    }
    let ft = FoldedTriangle::new(&shape).map_err(|_| ExperimentError::NotIsosceles)?;
    let p = shape.polygon();
    let starts: Vec<BoundaryPoint> = cfg.start_params.iter().map(|&t| BoundaryPoint::new(3, t)).collect();
    let orbits = discover_all(p, cfg, &starts);

    let folded = cfg.execution.map(&orbits, |o| {
        let (x, th) = ft.fold_start(o.start(), o.direction());
        detect_periodic_with(ft.right.polygon(), x, th, 4 * cfg.max_hits, cfg.tolerances).ok().flatten()
    });
    let mut by_fold: BTreeMap<CombType, Vec<usize>> = BTreeMap::new();
    let mut unfoldable = 0;
    for (o, f) in orbits.iter().zip(folded) {
        let folded_type = f.map(|f| f.comb_type(cfg.cyclic));
        match &folded_type {
            Some(k) => by_fold.entry(k.clone()).or_default().push(report.orbits.len()),
            None => unfoldable += 1,
        }
        report.orbits.push(OrbitRecord {
            start: o.start(),
            direction: o.direction(),
            period: o.period,
            comb_type: o.comb_type(cfg.cyclic),
            folded_type,
            annotation: None,
        });
    }
    for (key, members) in by_fold {
        let mut types: Vec<CombType> = members.iter().map(|&i| report.orbits[i].comb_type.clone()).collect();
        types.sort();
        types.dedup();
        if types.len() > 1 {
            let ws = types
                .iter()
                .map(|t| {
                    let i = members.iter().find(|&&i| &report.orbits[i].comb_type == t).unwrap();
                    let r = &report.orbits[*i];
                    Witness { theta1: shape.theta1(), theta2: shape.theta2(), start: r.start, direction: r.direction }
                })
                .collect();
            report.violations.push(Violation { message: format!("folded type {key} has unfolded types {types:?}"), witnesses: ws });
        }
        report.groups.push(Grouping { key, members, types });
    }
    if unfoldable > 0 {
        report.notes.push(format!("{unfoldable} orbits could not be folded (fold passes a vertex of the half triangle)"));
    }
    if report.orbits.is_empty() {
        report.notes.push("no periodic orbits found".into());
    }
    Ok(report)
}

fn special_angle(theta: f64, b: i64, tol: f64) -> Option<Annotation> {
    let step = PI / b as f64;
    for (offset, half) in [(0.0, false), (PI / 2.0, true)] {
        let n = ((theta - offset) / step).round();
        if (theta - offset - n * step).abs() < tol {
            return Some(Annotation::SpecialAngle { n: n as i64, half });
        }
    }
    None
}

/// Whether some restart of `f` at a base hit lies in a cylinder that also
/// contains the orbit through the centre of the base.
fn in_mirror_cylinder(p: &Polygon, f: &PeriodicOrbit, tol: Tolerances) -> bool {
    let mut restarts = vec![(f.start(), f.direction())];
    for h in &f.trajectory.hits {
        if h.point.edge == 3 {
            restarts.push((h.point, h.outgoing));
        }
    }
    restarts.into_iter().any(|(x, th)| {
        if x.edge != 3 {
            return false;
        }
        let Ok(Some(g)) = detect_periodic_with(p, x, th, f.period, tol) else { return false };
        cylinder_of(p, &g).is_ok_and(|c| c.contains(0.5))
    })
}

fn odd_denominator(t: &TriangleShape) -> Result<i64, ExperimentError> {
    if !t.is_isosceles() {
        return Err(ExperimentError::NotIsosceles);
    }
    match t.theta1() {
        AngleValue::Rational(q) if q.denominator() % 2 == 1 => Ok(q.denominator()),
        a => Err(ExperimentError::EvenDenominator(a.to_string())),
    }
}

fn annotate(p: &Polygon, f: &PeriodicOrbit, b: i64, cfg: &ExperimentConfig, satisfied: bool) -> Annotation {
    if !satisfied {
        return Annotation::Unsatisfied;
    }
    if let Some(a) = special_angle(f.direction(), b, 1e-6) {
        return a;
    }
    if in_mirror_cylinder(p, f, cfg.tolerances) {
        return Annotation::MirrorCylinder;
    }
    Annotation::Unexplained
}

/// Periodic directions from a base point off the centre, with the mirror
/// criterion `f ∼ r₂∘f` checked by simulating the axis-mirrored orbit.
/// Every satisfying direction must be special or lie in a mirror cylinder.
pub fn theorem3_scan(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let b = odd_denominator(&cfg.shape)?;
    let mut report = ExperimentReport::new("theorem3");
    let p = cfg.shape.polygon();
    for &t in &cfg.start_params {
        let x = t - 0.5;
        if x.abs() < 1e-12 {
            return Err(ExperimentError::CenterStart);
        }
        if !(0.0..1.0).contains(&t) {
            return Err(ExperimentError::BadStart(x));
        }
    }
    let starts: Vec<BoundaryPoint> = cfg.start_params.iter().map(|&t| BoundaryPoint::new(3, t)).collect();
    let orbits = discover_all(p, cfg, &starts);
    let records = cfg.execution.map(&orbits, |f| {
        let g = mirror_orbit(&cfg.shape, f, cfg.tolerances.position).ok().flatten();
        let satisfied = g.is_some_and(|g| g.comb_type(cfg.cyclic) == f.comb_type(cfg.cyclic));
        OrbitRecord {
            start: f.start(),
            direction: f.direction(),
            period: f.period,
            comb_type: f.comb_type(cfg.cyclic),
            folded_type: None,
            annotation: Some(annotate(p, f, b, cfg, satisfied)),
        }
    });
    for (f, r) in orbits.iter().zip(records) {
        if r.annotation == Some(Annotation::Unexplained) {
            report.violations.push(Violation {
                message: format!("direction {:.12} satisfies the mirror criterion without explanation", r.direction),
                witnesses: vec![witness(&cfg.shape, f)],
            });
        }
        report.orbits.push(r);
    }
    let satisfying: Vec<f64> =
        report.orbits.iter().filter(|o| !matches!(o.annotation, Some(Annotation::Unsatisfied))).map(|o| o.direction).collect();
    report.notes.push(format!(
        "{} periodic directions, {} satisfy the mirror criterion, {} do not",
        report.orbits.len(),
        satisfying.len(),
        report.orbits.len() - satisfying.len()
    ));
    if report.orbits.is_empty() {
        report.notes.push("insufficient data: no periodic directions in the window".into());
    }
    Ok(report)
}

/// Classify stable orbits on an odd-denominator shape as special-argument or
/// mirror-cylinder; anything else is a violation.
pub fn stable_classification_check(cfg: &ExperimentConfig, orbits: &[PeriodicOrbit]) -> Result<ExperimentReport, ExperimentError> {
    let b = odd_denominator(&cfg.shape)?;
    let p = cfg.shape.polygon();
    let mut report = ExperimentReport::new("stable");
    for f in orbits {
        let c = f.comb_type(false);
        if !is_stable(&c) {
            return Err(ExperimentError::UnstableInput(c));
        }
    }
    let annotations = cfg.execution.map(orbits, |f| annotate(p, f, b, cfg, true));
    for (f, a) in orbits.iter().zip(annotations) {
        if a == Annotation::Unexplained {
            report.violations.push(Violation {
                message: format!("stable orbit {} at direction {:.12} is unclassified", f.comb_type(cfg.cyclic), f.direction()),
                witnesses: vec![witness(&cfg.shape, f)],
            });
        }
        report.orbits.push(OrbitRecord {
            start: f.start(),
            direction: f.direction(),
            period: f.period,
            comb_type: f.comb_type(cfg.cyclic),
            folded_type: None,
            annotation: Some(a),
        });
    }
    Ok(report)
}

/// Stable orbits among those found by a scan, one per combinatorial type.
pub fn stable_samples(cfg: &ExperimentConfig) -> Vec<PeriodicOrbit> {
    let p = cfg.shape.polygon();
    let starts: Vec<BoundaryPoint> = cfg.start_params.iter().map(|&t| BoundaryPoint::new(3, t)).collect();
    let orbits = discover_all(p, cfg, &starts);
    let mut by_type: BTreeMap<CombType, PeriodicOrbit> = BTreeMap::new();
    for o in orbits {
        by_type.entry(o.comb_type(false)).or_insert(o);
    }
    let keys: Vec<CombType> = by_type.keys().cloned().collect();
    let stable = cfg.execution.map(&keys, is_stable);
    keys.into_iter().zip(stable).filter(|(_, s)| *s).map(|(k, _)| by_type.remove(&k).unwrap()).collect()
}

/// Pairs of periodic orbits of equal type found from independent random
/// starts on the same edge, each required to lie in one cylinder.
pub fn lemma26_property_test(p: &Polygon, trials: usize, cfg: &ExperimentConfig) -> ExperimentReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = ExperimentReport::new("lemma26");
    let edges = p.edge_count();
    let jobs: Vec<(usize, f64, f64)> =
        (0..trials).map(|_| (rng.gen_range(1..=edges), rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95))).collect();
    let found = cfg.execution.map(&jobs, |&(e, t1, t2)| {
        let run = |t| {
            discover_periodic(
                p,
                BoundaryPoint::new(e, t),
                cfg.angle_window,
                cfg.angle_grid,
                cfg.max_hits,
                cfg.tolerances,
                Execution::Sequential,
            )
        };
        let (a, b) = (run(t1), run(t2));
        let mut pairs = Vec::new();
        for f in &a {
            if let Some(g) = b.iter().find(|g| g.comb_type(cfg.cyclic) == f.comb_type(cfg.cyclic)) {
                pairs.push((f.clone(), g.clone(), same_cylinder(p, f, g)));
            }
        }
        pairs
    });
    for (f, g, ok) in found.into_iter().flatten() {
        let key = f.comb_type(cfg.cyclic);
        let i = report.orbits.len();
        for o in [&f, &g] {
            report.orbits.push(OrbitRecord {
                start: o.start(),
                direction: o.direction(),
                period: o.period,
                comb_type: key.clone(),
                folded_type: None,
                annotation: None,
            });
        }
        if !ok {
            let w = |o: &PeriodicOrbit| Witness {
                theta1: p.vertex_angle(1),
                theta2: p.vertex_angle(3),
                start: o.start(),
                direction: o.direction(),
            };
            report.violations.push(Violation { message: format!("pair of type {key} not in one cylinder"), witnesses: vec![w(&f), w(&g)] });
        }
        report.groups.push(Grouping { key: key.clone(), members: vec![i, i + 1], types: vec![key] });
    }
    report.notes.push(format!("{} same-type pairs from {trials} trials", report.groups.len()));
    report
}
