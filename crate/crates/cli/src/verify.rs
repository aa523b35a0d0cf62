//! The invariant suite behind `geocirc verify`, run on the built-in presets.

use std::f64::consts::{PI, TAU};

use geocirc_core::jacobi::{
    asymptotic_curvature, circle_curvature, circle_profile, hs_increment, hs_solution, riccati_residual, unit_bvp,
    RiccatiQuantity,
};
use geocirc_core::oscillatory::{
    decay_fit, grid_nodes_required, period_integral, period_nodes_required, torus_lattice_modes, LatticeEigenfunction,
    PhaseGrid, Window,
};
use geocirc_core::phase::{self, classify_critical, find_critical_points, Classification};
use geocirc_core::{Error, MetricSurface, Point2, Rect, UnitTangent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::torus_curve;
use crate::config::TorusCurve;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = Result<(bool, String), Error>;
type NamedCheck = (&'static str, fn(u64) -> Check);

fn presets() -> Vec<(&'static str, MetricSurface)> {
    vec![
        ("flat", MetricSurface::flat()),
        ("hyperbolic", MetricSurface::hyperbolic()),
        ("hyperbolic-a(0.5)", MetricSurface::hyperbolic_scaled(0.5)),
        ("hyperbolic-a(2)", MetricSurface::hyperbolic_scaled(2.0)),
        ("gaussian-bump", MetricSurface::gaussian_bump()),
    ]
}

fn tangents(surface: &MetricSurface, n: usize, seed: u64) -> Result<Vec<UnitTangent>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            UnitTangent::at_angle(surface, p, rng.gen_range(0.0..TAU))
        })
        .collect()
}

fn nonpositive_presets(_: u64) -> Check {
    let mut worst = f64::NEG_INFINITY;
    for (_, s) in presets() {
        let report = s.validate_nonpositive(Rect::square(3.0), 0.1)?;
        if !report.passed() {
            return Ok((false, format!("{s:?} has max K = {}", report.max_curvature)));
        }
        worst = worst.max(report.max_curvature);
    }
    Ok((true, format!("max K over presets {worst:.3e}")))
}

fn flat_asymptotic(seed: u64) -> Check {
    let flat = MetricSurface::flat();
    let mut hi: f64 = 0.0;
    let mut lo = f64::INFINITY;
    for v in tangents(&flat, 5, seed)? {
        let k = asymptotic_curvature(&flat, v, 1000.0, false, 1e-2)?.value;
        hi = hi.max(k);
        lo = lo.min(k);
    }
    Ok((lo > 0.0 && hi <= 2e-3, format!("k in [{lo:.3e}, {hi:.3e}]")))
}

fn constant_curvature_asymptotic(seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    for a in [1.0, 0.5, 2.0] {
        let s = MetricSurface::hyperbolic_scaled(a);
        for v in tangents(&s, 5, seed)? {
            worst = worst.max((asymptotic_curvature(&s, v, 20.0, false, 1e-3)?.value - a).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max |k - a| {worst:.3e}")))
}

fn circle_closed_forms(seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    for v in tangents(&MetricSurface::flat(), 2, seed)? {
        for r in [0.1, 1.0, 10.0] {
            let k = circle_curvature(&MetricSurface::flat(), v.base(), v.dir(), r, 1e-3)?;
            worst = worst.max((k * r - 1.0).abs());
        }
    }
    let hyp = MetricSurface::hyperbolic();
    for v in tangents(&hyp, 2, seed)? {
        for r in [0.1, 1.0, 10.0] {
            let k = circle_curvature(&hyp, v.base(), v.dir(), r, 1e-3)?;
            worst = worst.max((k * r.tanh() - 1.0).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.3e}")))
}

fn riccati(seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    for (_, s) in presets() {
        for v in tangents(&s, 2, seed)? {
            worst = worst.max(riccati_residual(&s, v, (0.5, 8.0), RiccatiQuantity::Circle, 1e-3)?);
        }
    }
    Ok((worst <= 1e-5, format!("max residual {worst:.3e}")))
}

fn sandwich(seed: u64) -> Check {
    let (mut min_gap, mut worst) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in [
        MetricSurface::flat(),
        MetricSurface::hyperbolic(),
        MetricSurface::gaussian_bump(),
    ] {
        for v in tangents(&s, 2, seed)? {
            for r in [2.0, 4.0, 8.0, 16.0] {
                let c = circle_profile(&s, v, r, 1e-3)?;
                let gap = c.curvature - asymptotic_curvature(&s, c.end, 1e4 / r, false, 1e-2)?.value;
                min_gap = min_gap.min(gap);
                worst = worst.max(gap - 1.0 / r);
            }
        }
    }
    Ok((
        min_gap > 0.0 && worst <= 1e-4,
        format!("min gap {min_gap:.3e}, max gap - 1/r {worst:.3e}"),
    ))
}

fn jacobi_bounds(seed: u64) -> Check {
    let mut bad = 0usize;
    let mut total = 0usize;
    for (_, s) in presets() {
        let v = tangents(&s, 1, seed)?[0];
        for len in [1.0, 2.0, 4.0, 8.0] {
            let hs = hs_solution(&s, v, len, 1e-3)?;
            for (r, &h) in hs.r_values().zip(hs.values()) {
                total += 1;
                bad += usize::from(!(h >= 0.0 && h <= 1.0 + r / len + 1e-12));
            }
            for (r, d) in hs_increment(&s, v, len, 1e-3, 1e-3)? {
                total += 1;
                bad += usize::from(r < 0.0 && !(d > 0.0 && d <= -r / (len * len) + 1e-6));
            }
            let bvp = unit_bvp(&s, v, len, 1e-3)?;
            for (r, &h) in bvp.r_values().zip(bvp.values()) {
                total += 1;
                bad += usize::from(!(h >= -1e-12 && h <= 1.0 - r / len + 1e-12));
            }
            let slope = bvp.unit_end_slope().unwrap_or(f64::NAN);
            total += 1;
            bad += usize::from(!(-1.0 - 1e-9..=0.0).contains(&slope));
        }
    }
    Ok((bad == 0, format!("{bad} of {total} samples out of bounds")))
}

fn phase_derivatives(seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for name in [
        "flat-circle-translate",
        "hyperbolic-axis-yshift6",
        "hyperbolic-parabola",
    ] {
        let f = phase::shipped(name)?;
        let w = f.window();
        for _ in 0..10 {
            let (s, t) = (rng.gen_range(w.s.0..w.s.1), rng.gen_range(w.t.0..w.t.1));
            let g = f.gradient(s, t)?;
            let fd = f.gradient_fd(s, t, 1e-4)?;
            let (gap, _) = f.diagonal_discrepancy(s, t, 1e-3)?;
            worst = worst.max((g[0] - fd[0]).abs()).max((g[1] - fd[1]).abs()).max(gap);
        }
    }
    Ok((worst <= 1e-4, format!("max deviation {worst:.3e}")))
}

fn mixed_exactness(_: u64) -> Check {
    let lines = phase::shipped("flat-parallel-lines")?;
    let found = find_critical_points(&lines, 10, 1e-10)?;
    let worst = found
        .points
        .iter()
        .map(|p| (p.hessian[0][1].abs() * p.phi - 1.0).abs())
        .fold(0.0, f64::max);
    let circle = phase::shipped("flat-circle-translate")?;
    let h = circle.hessian(PI, 0.0)?;
    let diag = (h.matrix[0][0] - 1.5).abs().max((h.matrix[1][1] - 1.5).abs());
    Ok((
        !found.points.is_empty() && worst <= 1e-8 && diag <= 1e-6,
        format!("lines max ||Hst| phi - 1| {worst:.2e}; circle diagonal error {diag:.2e}"),
    ))
}

fn classification(_: u64) -> Check {
    let f = phase::shipped("hyperbolic-axis-yshift6")?;
    let found = find_critical_points(&f, 8, 1e-10)?;
    let det = match found.points.first().map(|p| classify_critical(p, 0.5)) {
        Some(Ok(Classification::NonDegenerate { det, .. })) => det,
        other => return Ok((false, format!("shifted axis: {other:?}"))),
    };
    let lines = phase::shipped("flat-parallel-lines")?;
    let found = find_critical_points(&lines, 10, 1e-10)?;
    let degenerate = found
        .points
        .iter()
        .all(|p| matches!(classify_critical(p, 1.0), Ok(Classification::Degenerate)));
    Ok((
        det >= 3.0 / 16.0 - 1e-3 && degenerate && found.degenerate_line,
        format!("shifted axis det {det:.6}; parallel lines degenerate: {degenerate}"),
    ))
}

fn torus(seed: u64) -> Check {
    let circle = torus_curve(TorusCurve::Circle);
    let line = torus_curve(TorusCurve::Line);
    let window = Window::closed(0.0, TAU);
    let counts = (
        torus_lattice_modes(1).len(),
        torus_lattice_modes(25).len(),
        torus_lattice_modes(3).len(),
    );
    let mut series = Vec::new();
    let mut aligned: f64 = 0.0;
    for l in (1..=40).map(|k| 5 * k) {
        let nodes = period_nodes_required(&circle, &window, l as f64)?;
        let r = period_integral(&circle, &window, &LatticeEigenfunction::single_mode([l, 0])?, nodes)?;
        series.push((l as f64, r.value.norm()));
        let r = period_integral(&line, &window, &LatticeEigenfunction::single_mode([0, l])?, nodes)?;
        aligned = aligned.max((r.value.norm() - TAU).abs());
    }
    let slope = decay_fit(&series)?.slope;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = LatticeEigenfunction::random(25, &mut rng)?.torus_l2_norm(32);
    Ok((
        counts == (4, 12, 0) && aligned <= 1e-10 && (slope + 0.5).abs() <= 0.1 && (norm - TAU).abs() <= 1e-10,
        format!("mode counts {counts:?}, circle slope {slope:.4}, aligned error {aligned:.2e}, L2 norm {norm:.12}"),
    ))
}

fn oscillatory_sweep(_: u64) -> Check {
    let lambdas: Vec<f64> = (1..=8).map(|k| 20.0 * k as f64).collect();
    let slope = |name: &str, ws: Window, wt: Window| -> Result<f64, Error> {
        let field = phase::shipped(name)?;
        let grid = PhaseGrid::new(&field, &ws, &wt, grid_nodes_required(&ws, &wt, 160.0))?;
        let series = grid
            .sweep(&lambdas)
            .into_iter()
            .map(|r| r.map(|r| (r.lambda, r.value.norm())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(decay_fit(&series)?.slope)
    };
    let nondegenerate = slope("flat-circle-translate", Window::bump(PI, 1.0), Window::bump(0.0, 1.0))?;
    let degenerate = slope("flat-parallel-lines", Window::bump(0.0, 1.0), Window::bump(0.0, 1.0))?;
    Ok((
        (nondegenerate + 1.0).abs() <= 0.15 && (degenerate + 0.5).abs() <= 0.15,
        format!("slopes {nondegenerate:.4} (non-degenerate), {degenerate:.4} (degenerate line)"),
    ))
}

pub fn run(seed: u64) -> Vec<CheckResult> {
    let checks: [NamedCheck; 12] = [
        ("presets have nonpositive curvature", nonpositive_presets),
        ("flat asymptotic curvature vanishes", flat_asymptotic),
        ("constant curvature asymptotic curvature", constant_curvature_asymptotic),
        ("circle curvature closed forms", circle_closed_forms),
        ("circle curvature Riccati residual", riccati),
        ("circle curvature sandwich", sandwich),
        ("Jacobi field bounds", jacobi_bounds),
        ("phase derivatives match finite differences", phase_derivatives),
        ("mixed derivative saturates its bound", mixed_exactness),
        ("critical point classification", classification),
        ("torus period integrals", torus),
        ("two-dimensional oscillatory decay", oscillatory_sweep),
    ];
    checks
        .par_iter()
        .map(|(name, check)| match check(seed) {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}
