mod common;

use std::f64::consts::{PI, TAU};

use geocirc_core::oscillatory::{decay_fit, period_integral, period_nodes_required, LatticeEigenfunction, Window};
use geocirc_core::phase::{CurveKind, ParamCurve};
use geocirc_core::MetricSurface;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_circle() -> ParamCurve {
    ParamCurve::unit_speed(
        &MetricSurface::flat(),
        CurveKind::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        },
    )
    .unwrap()
}

fn x_axis() -> ParamCurve {
    ParamCurve::unit_speed(
        &MetricSurface::flat(),
        CurveKind::Line {
            point: [0.0, 0.0],
            direction: [1.0, 0.0],
        },
    )
    .unwrap()
}

fn floor(curve: &ParamCurve, window: &Window, lambda: f64) -> usize {
    period_nodes_required(curve, window, lambda).unwrap()
}

#[test]
fn circle_integrals_match_bessel_oracle() {
    let circle = unit_circle();
    let window = Window::closed(0.0, TAU);
    for lambda in [1i64, 5, 17, 50, 123, 200] {
        let eig = LatticeEigenfunction::single_mode([lambda, 0]).unwrap();
        let r = period_integral(&circle, &window, &eig, floor(&circle, &window, lambda as f64)).unwrap();
        let oracle = TAU * common::bessel_j0(lambda as f64);
        assert!((r.value - Complex64::new(oracle, 0.0)).norm() <= 1e-6, "λ={lambda}");
        assert!(r.error <= 1e-6);
    }
    let eig = LatticeEigenfunction::single_mode([5, 0]).unwrap();
    let r = period_integral(&circle, &window, &eig, 100).unwrap();
    assert!((r.value.re + 1.115_873).abs() < 1e-6);
}

#[test]
fn bump_on_geodesic_decays_fast() {
    // nonstationary phase: faster than any power of λ, but for this bump the
    // rate only overtakes λ^-N for modest N in this range of λ
    let line = x_axis();
    let window = Window::bump(0.5, 0.5);
    let at = |lambda: i64| {
        let eig = LatticeEigenfunction::single_mode([lambda, 0]).unwrap();
        period_integral(&line, &window, &eig, 4 * floor(&line, &window, lambda as f64))
            .unwrap()
            .value
            .norm()
    };
    let (i50, i100) = (at(50), at(100));
    // reference magnitudes from an independent adaptive quadrature
    assert!(i100 / i50 < 2f64.powi(-4), "{i50} {i100}");
    assert!((i50 - 1.949_081_258_927e-3).abs() < 1e-12 && (i100 - 9.053_925_200_35e-5).abs() < 1e-13);
}

#[test]
fn parseval_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let first = LatticeEigenfunction::random(25, &mut rng).unwrap();
    let second = LatticeEigenfunction::random(25, &mut rng).unwrap();
    assert_eq!(first.modes().len(), 12);
    let n1 = first.torus_l2_norm(32);
    let n2 = second.torus_l2_norm(32);
    assert!((n1 - TAU).abs() < 1e-10, "{n1}");
    assert!((n1 / n2 - 1.0).abs() < 1e-10);
}

#[test]
fn cauchy_schwarz_chain() {
    let circle = unit_circle();
    let window = Window::bump(1.0, 0.8);
    let modes = geocirc_core::oscillatory::torus_lattice_modes(25);
    let nodes = 4 * floor(&circle, &window, 5.0);
    let singles: Vec<f64> = modes
        .iter()
        .map(|&m| {
            let eig = LatticeEigenfunction::single_mode(m).unwrap();
            period_integral(&circle, &window, &eig, nodes).unwrap().value.norm()
        })
        .collect();
    let max_single = singles.iter().cloned().fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let eig = LatticeEigenfunction::random(25, &mut rng).unwrap();
        let total = period_integral(&circle, &window, &eig, nodes).unwrap().value.norm();
        let weighted: f64 = eig.coefficients().iter().zip(&singles).map(|(a, i)| a.norm() * i).sum();
        assert!(total <= weighted + 1e-12);
        assert!(weighted <= (modes.len() as f64).sqrt() * max_single + 1e-12);
    }
}

#[test]
fn doubling_error_decreases_past_the_floor() {
    let circle = unit_circle();
    let window = Window::bump(PI, 1.5);
    let eig = LatticeEigenfunction::single_mode([30, 40]).unwrap();
    let base = floor(&circle, &window, 50.0);
    let errors: Vec<f64> = (0..4)
        .map(|k| period_integral(&circle, &window, &eig, base << k).unwrap().error)
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] <= w[0] || w[1] < 1e-14, "{errors:?}");
    }
}

#[test]
fn bessel_sweep_fit_matches_oracle_regression() {
    // the fit through the quadrature values and through the oracle agree
    let circle = unit_circle();
    let window = Window::closed(0.0, TAU);
    let lambdas: Vec<i64> = (1..=20).map(|k| 10 * k).collect();
    let series: Vec<(f64, f64)> = lambdas
        .iter()
        .map(|&l| {
            let eig = LatticeEigenfunction::single_mode([l, 0]).unwrap();
            let r = period_integral(&circle, &window, &eig, floor(&circle, &window, l as f64)).unwrap();
            (l as f64, r.value.norm())
        })
        .collect();
    let fit = decay_fit(&series).unwrap();
    let xs: Vec<f64> = lambdas.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = lambdas
        .iter()
        .map(|&l| (TAU * common::bessel_j0(l as f64)).abs().ln())
        .collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((fit.slope - slope).abs() < 1e-6, "{} vs {slope}", fit.slope);
}
