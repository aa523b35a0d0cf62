use geocirc_core::jacobi::{asymptotic_curvature, circle_profile, hs_solution, limit_solution, unit_bvp, JacobiKind};
use geocirc_core::{MetricSurface, Point2, UnitTangent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-3;

fn presets() -> Vec<(&'static str, MetricSurface)> {
    vec![
        ("flat", MetricSurface::flat()),
        ("hyperbolic", MetricSurface::hyperbolic()),
        ("hyperbolic-a", MetricSurface::hyperbolic_scaled(0.5)),
        ("gaussian-bump", MetricSurface::gaussian_bump()),
    ]
}

fn random_tangent(surface: &MetricSurface, rng: &mut ChaCha8Rng) -> UnitTangent {
    let p = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    UnitTangent::at_angle(surface, p, rng.gen_range(0.0..std::f64::consts::TAU)).unwrap()
}

#[test]
fn hs_convexity_and_monotonicity_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, surface) in presets() {
        let v = random_tangent(&surface, &mut rng);
        for s in [1.0, 2.0, 4.0, 8.0] {
            let hs = hs_solution(&surface, v, s, STEP).unwrap();
            assert_eq!(hs.kind(), JacobiKind::BvpHs { s });
            for (r, h) in hs.r_values().zip(hs.values()) {
                assert!(*h >= 0.0 && *h <= 1.0 + r / s + 1e-12, "{name} s={s} r={r} h={h}");
            }
            let delta = 1e-3;
            let wider = hs_solution(&surface, v, s + delta, STEP).unwrap();
            for (k, (r, h)) in hs.r_values().zip(hs.values()).enumerate() {
                if r >= 0.0 || k % 50 != 0 {
                    continue;
                }
                let dh = (wider.eval(r).unwrap().0 - h) / delta;
                assert!(dh > 0.0 && dh <= -r / (s * s) + 1e-6, "{name} s={s} r={r} dh={dh}");
            }
            let double = hs_solution(&surface, v, 2.0 * s, STEP).unwrap();
            for (r, h) in hs.r_values().zip(hs.values()).step_by(25) {
                assert!((double.eval(r).unwrap().0 - h).abs() <= -r / s + 1e-12);
            }
        }
    }
}

#[test]
fn unit_interval_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, surface) in presets() {
        let v = random_tangent(&surface, &mut rng);
        for length in [1.0, 2.0, 4.0, 8.0] {
            let sol = unit_bvp(&surface, v, length, STEP).unwrap();
            for (r, h) in sol.r_values().zip(sol.values()) {
                let rho = r / length;
                assert!(*h >= -1e-12 && *h <= 1.0 - rho + 1e-12, "{name} L={length} r={r}");
            }
            let slope = sol.unit_end_slope().unwrap();
            assert!((-1.0 - 1e-9..=0.0).contains(&slope), "{name} L={length} slope={slope}");
        }
    }
}

#[test]
fn limit_solution_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (_, surface) in presets() {
        let v = random_tangent(&surface, &mut rng);
        let sol = limit_solution(&surface, v, 30.0, STEP).unwrap();
        for (r, h) in sol.r_values().zip(sol.values()) {
            if r < 0.0 {
                assert!(*h > 0.0 && *h <= 1.0);
            }
        }
        assert!(sol.residual().unwrap() <= 1e-6);
    }
}

#[test]
fn asymptotic_curvature_nonnegative_and_continuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (name, surface) in presets() {
        for _ in 0..50 {
            let v = random_tangent(&surface, &mut rng);
            let k = asymptotic_curvature(&surface, v, 20.0, false, 1e-2).unwrap();
            assert!(k.value >= -1e-9, "{name}: {}", k.value);
            assert!(k.history.windows(2).all(|w| w[0].1 >= w[1].1 - 1e-12));
            let angle = v.frame_angle(&surface).unwrap();
            let nudged = UnitTangent::at_angle(&surface, v.base(), angle + 1e-3).unwrap();
            let k2 = asymptotic_curvature(&surface, nudged, 20.0, false, 1e-2).unwrap();
            assert!((k.value - k2.value).abs() <= 1e-2);
        }
    }
}

#[test]
fn circle_sandwich_on_every_preset() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, surface) in presets() {
        for _ in 0..3 {
            let v = random_tangent(&surface, &mut rng);
            for r in [2.0, 4.0, 8.0] {
                let circle = circle_profile(&surface, v, r, STEP).unwrap();
                let k = asymptotic_curvature(&surface, circle.end, 2.0 * r + 10.0, false, STEP).unwrap();
                let gap = circle.curvature - k.value;
                assert!(gap > 0.0 && gap <= 1.0 / r + 1e-6, "{name} r={r} gap={gap}");
            }
        }
    }
}
