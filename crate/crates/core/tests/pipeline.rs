use std::f64::consts::PI;

use billiards::cylinder::{cylinder_of, same_cylinder};
use billiards::fold::{build_cover, lift_trajectory, mirror_check};
use billiards::search::{discover_periodic, AngleWindow};
use billiards::surface::{straight_line_flow, SurfacePoint};
use billiards::tiles::{tile_membership, tile_sample, TileGrid};
use billiards::unfold::closing_direction;
use billiards::{detect_periodic, embed_triangle, AngleValue, BoundaryPoint, Execution, Tolerances, TriangleShape};

fn iso(a: i64, b: i64) -> TriangleShape {
    let q = AngleValue::rational(a, b).unwrap();
    embed_triangle(q, q).unwrap()
}

#[test]
fn discovered_orbits_lie_in_tiles_of_their_type() {
    let t = iso(3, 8);
    let found = discover_periodic(
        t.polygon(),
        BoundaryPoint::new(3, 0.3),
        AngleWindow::new(0.1, PI - 0.1),
        60,
        20,
        Tolerances::default(),
        Execution::Parallel,
    );
    assert!(!found.is_empty());
    for o in &found {
        assert!(tile_membership(t.polygon(), &o.comb_type).is_inside(), "{}", o.comb_type);
        let d = closing_direction(t.polygon(), &o.word).unwrap();
        assert!((d - o.direction()).abs() < 1e-9);
        let cyl = cylinder_of(t.polygon(), o).unwrap();
        assert!(cyl.contains(o.start().t));
    }
}

#[test]
fn neighbouring_starts_share_a_cylinder() {
    let s = billiards::Polygon::unit_square();
    let a = detect_periodic(&s, BoundaryPoint::new(3, 0.3), PI / 4.0, 10, 1e-9).unwrap().unwrap();
    let b = detect_periodic(&s, BoundaryPoint::new(3, 0.35), PI / 4.0, 10, 1e-9).unwrap().unwrap();
    assert!(same_cylinder(&s, &a, &b));
}

#[test]
fn target_flow_lifts_and_projects_back() {
    let t = iso(3, 8);
    let cover = build_cover(&t).unwrap();
    let right = cover.target.polygon.clone();
    let o = discover_periodic(
        &right,
        BoundaryPoint::new(3, 0.4),
        AngleWindow::new(0.2, PI / 2.0),
        40,
        16,
        Tolerances::default(),
        Execution::Sequential,
    )
    .into_iter()
    .next()
    .expect("a periodic orbit on the half triangle");
    let start = SurfacePoint { copy: 0, position: o.start().position(&right) };
    let f = straight_line_flow(&cover.target, start, o.direction(), 4 * o.period + 4, 1e-9).unwrap();
    assert!(f.closed);
    let base = cover.fiber(&start)[0];
    let lift = lift_trajectory(&cover, &f, base).unwrap();
    assert!(matches!(lift.circuits, Some(1 | 2)));
    assert!(lift.max_deviation < 1e-9);
}

#[test]
fn centre_starts_are_their_own_mirror() {
    let t = iso(3, 8);
    let found = discover_periodic(
        t.polygon(),
        BoundaryPoint::new(3, 0.5),
        AngleWindow::new(0.1, PI / 2.0 - 0.05),
        40,
        20,
        Tolerances::default(),
        Execution::Sequential,
    );
    assert!(!found.is_empty());
    for o in &found {
        assert!(mirror_check(&t, o, 1e-9).unwrap());
    }
}

#[test]
fn sequential_and_parallel_tiles_agree() {
    let c = "3132".parse().unwrap();
    let g = TileGrid::centered(0.9, 0.2, 12);
    assert_eq!(tile_sample(&c, g, Execution::Parallel).unwrap(), tile_sample(&c, g, Execution::Sequential).unwrap());
}
