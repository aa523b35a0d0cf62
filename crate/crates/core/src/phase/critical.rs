//! Critical points of a phase field and their classification.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::field::{PhaseField, PureSecond};

/// Tolerance of the `|∂_s∂_t φ| · φ ≤ 1` check at critical points.
pub const MIXED_BOUND_TOL: f64 = 1e-4;
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Distance from a fitted curve below which converged points count as collinear.
pub const LINE_FIT_TOL: f64 = 1e-4;
const NEWTON_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalReport {
    pub location: [f64; 2],
    pub phi: f64,
    pub gradient_norm: f64,
    pub hessian: [[f64; 2]; 2],
    pub det: f64,
    /// `|∂_s∂_t φ| · φ`.
    pub mixed_bound: f64,
    pub mixed_bound_ok: bool,
    pub s_decomposition: PureSecond,
    pub t_decomposition: PureSecond,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSearch {
    pub points: Vec<CriticalReport>,
    /// Converged points fill out a curve: a critical manifold rather than isolated points.
    pub degenerate_line: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum Classification {
    NonDegenerate { det: f64, margin: f64 },
    Degenerate,
}

fn report_at(field: &PhaseField, s: f64, t: f64) -> Result<CriticalReport> {
    let phi = field.phase(s, t)?;
    let g = field.gradient(s, t)?;
    let hess = field.hessian(s, t)?;
    let mixed_bound = hess.matrix[0][1].abs() * phi;
    Ok(CriticalReport {
        location: [s, t],
        phi,
        gradient_norm: g[0].hypot(g[1]),
        hessian: hess.matrix,
        det: hess.det(),
        mixed_bound,
        mixed_bound_ok: mixed_bound <= 1.0 + MIXED_BOUND_TOL,
        s_decomposition: hess.s_part,
        t_decomposition: hess.t_part,
    })
}

/// Damped Newton with minimum-norm steps, so that it also converges onto
/// critical manifolds where the Hessian is singular.
fn newton(field: &PhaseField, start: [f64; 2], tol: f64, slack: f64) -> Result<Option<[f64; 2]>> {
    let window = field.window();
    let mut x = start;
    let mut g = field.gradient(x[0], x[1])?;
    let mut gnorm = g[0].hypot(g[1]);
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if gnorm <= tol {
            return Ok(Some(x));
        }
        let h = field.hessian(x[0], x[1])?.matrix;
        let m = Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1]);
        let scale = m.abs().max().max(1e-300);
        let pinv = match m.pseudo_inverse(1e-10 * scale) {
            Ok(p) => p,
            Err(_) => return Ok(None),
        };
        let step = pinv * Vector2::new(-g[0], -g[1]);
        let mut damping = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let cand = [x[0] + damping * step[0], x[1] + damping * step[1]];
            if !window.contains(cand[0], cand[1], slack) {
                damping *= 0.5;
                continue;
            }
            let gc = field.gradient(cand[0], cand[1])?;
            let norm = gc[0].hypot(gc[1]);
            if norm < gnorm {
                x = cand;
                g = gc;
                gnorm = norm;
                moved = true;
                break;
            }
            damping *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((gnorm <= tol).then_some(x))
}

/// Whether the points lie within [`LINE_FIT_TOL`] of a quadratic curve
/// fitted in their principal-axis coordinates.
fn lies_on_curve(points: &[[f64; 2]]) -> bool {
    let n = points.len() as f64;
    if points.len() < 4 {
        return false;
    }
    let mean = points
        .iter()
        .fold([0.0, 0.0], |m, p| [m[0] + p[0] / n, m[1] + p[1] / n]);
    let mut cov = Matrix2::zeros();
    for p in points {
        let d = Vector2::new(p[0] - mean[0], p[1] - mean[1]);
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let major = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let axis = eig.eigenvectors.column(major).into_owned();
    let normal = Vector2::new(-axis.y, axis.x);
    let coords: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let d = Vector2::new(p[0] - mean[0], p[1] - mean[1]);
            (d.dot(&axis), d.dot(&normal))
        })
        .collect();
    // least squares v = c0 + c1 u + c2 u²
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for &(u, v) in &coords {
        let row = nalgebra::Vector3::new(1.0, u, u * u);
        ata += row * row.transpose();
        atb += row * v;
    }
    let Some(c) = ata.lu().solve(&atb) else {
        return false;
    };
    coords
        .iter()
        .all(|&(u, v)| (c[0] + c[1] * u + c[2] * u * u - v).abs() <= LINE_FIT_TOL)
}

/// Newton from every cell of an `n × n` grid whose corner gradients change
/// sign in both components; results are deduplicated.
pub fn find_critical_points(field: &PhaseField, n: usize, newton_tol: f64) -> Result<CriticalSearch> {
    if n < 8 {
        return Err(Error::Config(format!("critical-point search needs n ≥ 8, got {n}")));
    }
    let w = field.window();
    let (hs, ht) = ((w.s.1 - w.s.0) / (n - 1) as f64, (w.t.1 - w.t.0) / (n - 1) as f64);
    let node = |i: usize, j: usize| (w.s.0 + hs * i as f64, w.t.0 + ht * j as f64);
    let mut grads = vec![[0.0; 2]; n * n];
    for i in 0..n {
        for j in 0..n {
            let (s, t) = node(i, j);
            grads[i * n + j] = field.gradient(s, t)?;
        }
    }
    let slack = hs.max(ht);
    let mut found: Vec<[f64; 2]> = Vec::new();
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let corners = [
                grads[i * n + j],
                grads[(i + 1) * n + j],
                grads[i * n + j + 1],
                grads[(i + 1) * n + j + 1],
            ];
            let changes = |k: usize| {
                let lo = corners.iter().map(|g| g[k]).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(|g| g[k]).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if !(changes(0) && changes(1)) {
                continue;
            }
            let (s0, t0) = node(i, j);
            let start = [s0 + hs / 2.0, t0 + ht / 2.0];
            if let Some(x) = newton(field, start, newton_tol, slack)? {
                if !w.contains(x[0], x[1], 1e-9) {
                    continue;
                }
                if found.iter().all(|f| (f[0] - x[0]).hypot(f[1] - x[1]) > DEDUP_RADIUS) {
                    found.push(x);
                }
            }
        }
    }
    found.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let degenerate_line = found.len() >= n && lies_on_curve(&found);
    let points = found
        .iter()
        .map(|x| report_at(field, x[0], x[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CriticalSearch {
        points,
        degenerate_line,
    })
}

/// Far-regime classification with threshold `ε`; requires `φ ≥ 2/ε`.
///
/// Non-degenerate means `|∂²_s φ| ≥ ε`, `|∂²_t φ| ≥ ε` and `|∂_s∂_t φ| ≤ ε/2`,
/// which forces `|det| ≥ ε² − ε²/4` (a saddle has negative determinant).
pub fn classify_critical(report: &CriticalReport, eps: f64) -> Result<Classification> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
    }
    if report.phi < 2.0 / eps {
        return Err(Error::Precondition(format!(
            "phi = {} is below 2/epsilon = {}",
            report.phi,
            2.0 / eps
        )));
    }
    let h = &report.hessian;
    if h[0][0].abs() >= eps && h[1][1].abs() >= eps && h[0][1].abs() <= eps / 2.0 {
        let floor = 0.75 * eps * eps;
        let margin = report.det.abs() - floor;
        if margin < -1e-12 * floor.max(1.0) {
            return Err(Error::Internal(format!(
                "determinant {} below the guaranteed floor {floor}",
                report.det
            )));
        }
        Ok(Classification::NonDegenerate {
            det: report.det,
            margin,
        })
    } else {
        Ok(Classification::Degenerate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_fit_detects_lines() {
        let line: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 * 0.3, i as f64 * 0.3]).collect();
        assert!(lies_on_curve(&line));
        let scattered = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.2]];
        assert!(!lies_on_curve(&scattered));
    }
}
