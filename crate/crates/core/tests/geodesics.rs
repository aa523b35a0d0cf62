mod common;

use geocirc_core::geodesic::{connect, distance, distance_with, geodesic_ivp, ShootOptions};
use geocirc_core::{MetricSurface, Point2, UnitTangent};
use proptest::prelude::*;

fn presets() -> Vec<MetricSurface> {
    vec![
        MetricSurface::flat(),
        MetricSurface::hyperbolic(),
        MetricSurface::hyperbolic_scaled(0.5),
        MetricSurface::gaussian_bump(),
    ]
}

#[test]
fn curvature_matches_brioschi_oracle() {
    for surface in presets() {
        for p in [Point2::new(0.0, 0.0), Point2::new(0.6, -0.4), Point2::new(-1.1, 0.8)] {
            let k = surface.gaussian_curvature(p).unwrap();
            let oracle = common::brioschi_curvature(&surface, p, 1e-3);
            assert!(
                (k - oracle).abs() < 1e-5 * (1.0 + k.abs()),
                "{surface:?} {p:?}: {k} vs {oracle}"
            );
        }
    }
}

#[test]
fn axis_distance_agrees_with_grid_oracle() {
    let hyp = MetricSurface::hyperbolic();
    let (lo, hi) = (Point2::new(-1.0, -1.5), Point2::new(1.0, 2.5));
    let d = distance(&hyp, Point2::new(0.0, 1.0), Point2::new(0.0, -1.0)).unwrap();
    let oracle = common::grid_distance(&hyp, Point2::new(0.0, 1.0), Point2::new(0.0, -1.0), lo, hi, 401, 5);
    assert!((d - 2.0).abs() < 1e-10);
    assert!((d - oracle).abs() < 1e-3, "{d} vs {oracle}");

    let d = distance(&hyp, Point2::new(0.0, 0.0), Point2::new(0.0, 2.0)).unwrap();
    let oracle = common::grid_distance(&hyp, Point2::new(0.0, 0.0), Point2::new(0.0, 2.0), lo, hi, 401, 5);
    assert!((d - oracle).abs() < 1e-3);
}

#[test]
fn bent_distance_agrees_with_grid_oracle() {
    // the geodesic from (1, 0) to (1, 1) bends toward the axis
    let hyp = MetricSurface::hyperbolic();
    let (p, q) = (Point2::new(1.0, 0.0), Point2::new(1.0, 1.0));
    let d = distance(&hyp, p, q).unwrap();
    let oracle = common::grid_distance(&hyp, p, q, Point2::new(0.0, -0.5), Point2::new(2.0, 1.5), 401, 5);
    assert!(d < 1f64.cosh());
    assert!((d - oracle).abs() < 1e-3, "{d} vs {oracle}");
}

#[test]
fn flat_distance_is_euclidean() {
    let flat = MetricSurface::flat();
    for (p, q) in [
        ((0.0, 0.0), (3.0, 4.0)),
        ((-1.5, 2.0), (7.25, -3.0)),
        ((1e-3, 0.0), (0.0, 1e-3)),
    ] {
        let d = distance(&flat, Point2::new(p.0, p.1), Point2::new(q.0, q.1)).unwrap();
        assert!((d - (q.0 - p.0).hypot(q.1 - p.1)).abs() < 1e-10);
    }
}

#[test]
fn connect_is_reversible() {
    let opts = ShootOptions::default();
    for surface in [MetricSurface::hyperbolic(), MetricSurface::gaussian_bump()] {
        let (x, y) = (Point2::new(-0.4, 0.3), Point2::new(0.8, -0.6));
        let fwd = connect(&surface, x, y, &opts).unwrap();
        let back = connect(&surface, y, x, &opts).unwrap().reversed();
        assert!((fwd.length() - back.length()).abs() < 1e-9);
        let len = fwd.length();
        for k in 0..=20 {
            let r = len * k as f64 / 20.0;
            let p = fwd.point_at(r).unwrap();
            let q = back.point_at(r - len).unwrap();
            assert!((p.coords() - q.coords()).norm() < 1e-6);
        }
    }
}

#[test]
fn step_halving_shows_fourth_order() {
    // integrate a curved geodesic with coarse steps and compare endpoint errors
    let bump = MetricSurface::gaussian_bump();
    let v = UnitTangent::at_angle(&bump, Point2::new(-0.5, 0.2), 0.4).unwrap();
    let end = |step: f64| geodesic_ivp(&bump, v, 2.0, step).unwrap().end().base().coords();
    let reference = end(1e-4);
    let e1 = (end(0.1) - reference).norm();
    let e2 = (end(0.05) - reference).norm();
    let ratio = e1 / e2;
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");

    // the same for distances through the shooting solver
    let hyp = MetricSurface::hyperbolic();
    let (x, y) = (Point2::new(0.3, 0.0), Point2::new(1.2, 1.7));
    let d = |step: f64| distance_with(&hyp, x, y, &ShootOptions::with_step(step)).unwrap();
    let exact = (0.3f64.cosh() * 1.2f64.cosh() * 1.7f64.cosh() - 0.3f64.sinh() * 1.2f64.sinh()).acosh();
    let ratio = (d(0.1) - exact).abs() / (d(0.05) - exact).abs();
    assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn triangle_inequality(
        which in 0usize..4,
        a in prop::array::uniform2(-1.2f64..1.2),
        b in prop::array::uniform2(-1.2f64..1.2),
        c in prop::array::uniform2(-1.2f64..1.2),
    ) {
        let surface = &presets()[which];
        let (a, b, c) = (Point2::new(a[0], a[1]), Point2::new(b[0], b[1]), Point2::new(c[0], c[1]));
        let ab = distance(surface, a, b).unwrap();
        let bc = distance(surface, b, c).unwrap();
        let ac = distance(surface, a, c).unwrap();
        prop_assert!(ab + bc - ac >= -1e-8);
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn ivp_stays_unit_speed(angle in 0.0f64..std::f64::consts::TAU, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let bump = MetricSurface::gaussian_bump();
        let v = UnitTangent::at_angle(&bump, Point2::new(x, y), angle).unwrap();
        let path = geodesic_ivp(&bump, v, 1.5, 1e-3).unwrap();
        prop_assert!(path.max_speed_defect().unwrap() <= 1e-8);
        prop_assert!(path.max_equation_residual().unwrap() <= 1e-6);
    }
}
