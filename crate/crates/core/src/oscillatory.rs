//! Period integrals of flat-torus eigenfunctions, two-dimensional oscillatory
//! integrals over a distance phase, and power-law decay fits.
//!
//! All quadratures are trapezoid rules whose error is estimated by node
//! doubling. Sums are pairwise in a fixed order so that results are
//! bit-reproducible regardless of thread count.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::Connection;
use crate::phase::{ParamCurve, PhaseField};

/// Minimum quadrature nodes per oscillation of the integrand.
pub const NODES_PER_PERIOD: f64 = 20.0;
/// Largest accepted change under node doubling.
pub const DOUBLING_TOL: f64 = 1e-6;
/// Allowed deviation of `Σ |a(m)|²` from 1.
pub const NORM_TOL: f64 = 1e-12;
/// Label of the amplitude used by [`oscillatory_integral_2d`].
pub const AMPLITUDE_MODEL: &str = "b(s) b(t) phi^(-1/2)";

const PAIRWISE_BLOCK: usize = 16;

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc + v);
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// All `m ∈ ℤ²` with `|m|² = n`, sorted lexicographically.
pub fn torus_lattice_modes(n: u64) -> Vec<[i64; 2]> {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n as i64 {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n as i64 {
        r += 1;
    }
    let mut modes = Vec::new();
    for m1 in -r..=r {
        let rest = n as i64 - m1 * m1;
        let mut m2 = (rest as f64).sqrt().round() as i64;
        while m2 * m2 > rest {
            m2 -= 1;
        }
        if m2 * m2 != rest {
            continue;
        }
        modes.push([m1, -m2]);
        if m2 != 0 {
            modes.push([m1, m2]);
        }
    }
    modes
}

/// Cutoff function `b` of a one-dimensional integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Window {
    /// `exp(1 − 1/(1 − x²))` with `x = (t − center)/halfwidth`, zero for `|x| ≥ 1`.
    Bump { center: f64, halfwidth: f64 },
    /// `b ≡ 1` over `[t0, t0 + period]`, for integrals over a whole closed curve.
    ClosedCurve { t0: f64, period: f64 },
}

impl Window {
    pub fn bump(center: f64, halfwidth: f64) -> Self {
        Window::Bump { center, halfwidth }
    }

    pub fn closed(t0: f64, period: f64) -> Self {
        Window::ClosedCurve { t0, period }
    }

    pub fn validate(&self) -> Result<()> {
        let (ok, what) = match *self {
            Window::Bump { center, halfwidth } => (
                center.is_finite() && halfwidth > 0.0 && halfwidth.is_finite(),
                "bump halfwidth",
            ),
            Window::ClosedCurve { t0, period } => (t0.is_finite() && period > 0.0 && period.is_finite(), "period"),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid window {self:?}: {what} must be positive and finite"
            )))
        }
    }

    /// Interval outside of which `b` vanishes (or, for a closed curve, one period).
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Window::Bump { center, halfwidth } => (center - halfwidth, center + halfwidth),
            Window::ClosedCurve { t0, period } => (t0, t0 + period),
        }
    }

    pub fn width(&self) -> f64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Window::Bump { center, halfwidth } => {
                let x = (t - center) / halfwidth;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - x * x)).exp()
                }
            }
            Window::ClosedCurve { .. } => 1.0,
        }
    }

    /// Nodes `lo + k h`, `k < n`, with trapezoid weights `h · b`. The endpoint
    /// is dropped: a bump vanishes there and a closed-curve integrand is periodic.
    fn nodes(&self, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.support();
        let h = (hi - lo) / n as f64;
        (0..n)
            .map(|k| {
                let t = lo + k as f64 * h;
                (t, h * self.eval(t))
            })
            .collect()
    }
}

/// `e(x) = Σ a(m) e^{i x·m}` over lattice points of one circle `|m| = λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeEigenfunction {
    modes: Vec<[i64; 2]>,
    coefficients: Vec<Complex64>,
    lambda: f64,
}

impl LatticeEigenfunction {
    pub fn new(modes: Vec<[i64; 2]>, coefficients: Vec<Complex64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Eigenfunction("no modes".into()));
        }
        if modes.len() != coefficients.len() {
            return Err(Error::Eigenfunction(format!(
                "{} modes but {} coefficients",
                modes.len(),
                coefficients.len()
            )));
        }
        let n = modes[0][0] * modes[0][0] + modes[0][1] * modes[0][1];
        if let Some(m) = modes.iter().find(|m| m[0] * m[0] + m[1] * m[1] != n) {
            return Err(Error::Eigenfunction(format!("mode {m:?} is not on |m|² = {n}")));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::Eigenfunction(format!("duplicate mode {m:?}")));
            }
        }
        let norm: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Eigenfunction(format!("Σ|a(m)|² = {norm}, expected 1")));
        }
        Ok(Self {
            modes,
            coefficients,
            lambda: (n as f64).sqrt(),
        })
    }

    /// `e^{i x·m}`.
    pub fn single_mode(m: [i64; 2]) -> Result<Self> {
        Self::new(vec![m], vec![Complex64::new(1.0, 0.0)])
    }

    /// Random unit-normalized coefficients over every mode with `|m|² = n`.
    pub fn random<R: Rng>(n: u64, rng: &mut R) -> Result<Self> {
        let modes = torus_lattice_modes(n);
        if modes.is_empty() {
            return Err(Error::Eigenfunction(format!("{n} is not a sum of two squares")));
        }
        let raw: Vec<Complex64> = modes
            .iter()
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Self::new(modes, raw.into_iter().map(|a| a / norm).collect())
    }

    pub fn modes(&self) -> &[[i64; 2]] {
        &self.modes
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eval(&self, x: [f64; 2]) -> Complex64 {
        let terms: Vec<Complex64> = self
            .modes
            .iter()
            .zip(&self.coefficients)
            .map(|(m, a)| a * Complex64::from_polar(1.0, m[0] as f64 * x[0] + m[1] as f64 * x[1]))
            .collect();
        pairwise_sum(&terms)
    }

    /// `‖e‖_{L²}` over the fundamental domain `[0, 2π)²`, by an `n × n` trapezoid rule
    /// (exact once `n` exceeds twice the largest mode component).
    pub fn torus_l2_norm(&self, n: usize) -> f64 {
        let h = TAU / n as f64;
        let rows: Vec<Complex64> = (0..n)
            .map(|i| {
                let row: Vec<Complex64> = (0..n)
                    .map(|j| Complex64::new(self.eval([i as f64 * h, j as f64 * h]).norm_sqr(), 0.0))
                    .collect();
                pairwise_sum(&row)
            })
            .collect();
        (pairwise_sum(&rows).re * h * h).sqrt()
    }
}

/// Result of a quadrature with a doubling error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodResult {
    pub lambda: f64,
    pub value: Complex64,
    /// Nodes behind `value` (twice the requested count).
    pub nodes: usize,
    /// `|I_{2n} − I_n|`.
    pub error: f64,
}

fn node_floor(lambda: f64, length: f64) -> usize {
    (NODES_PER_PERIOD * lambda * length / TAU).ceil().max(2.0) as usize
}

fn check_floor(nodes: usize, lambda: f64, length: f64) -> Result<()> {
    let required = node_floor(lambda, length);
    if nodes < required {
        Err(Error::InsufficientNodes { nodes, required })
    } else {
        Ok(())
    }
}

/// Smallest node count accepted by [`period_integral`] for this curve, window and frequency.
pub fn period_nodes_required(curve: &ParamCurve, window: &Window, lambda: f64) -> Result<usize> {
    Ok(node_floor(lambda, curve_length(curve, window)?))
}

/// Length of the curve over the window support, by Gauss–Legendre panels.
fn curve_length(curve: &ParamCurve, window: &Window) -> Result<f64> {
    const GL: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    if curve.is_unit_speed() {
        return Ok(window.width());
    }
    let (lo, hi) = window.support();
    let panels = 256;
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * h;
        for (x, w) in GL {
            let t = mid + 0.5 * h * x;
            let jet = curve.jet(t)?;
            total += 0.5 * h * w * curve.surface().norm(jet.point, jet.velocity)?;
        }
    }
    Ok(total)
}

fn period_sum(curve: &ParamCurve, window: &Window, eig: &LatticeEigenfunction, n: usize) -> Result<Complex64> {
    let terms = window
        .nodes(n)
        .into_iter()
        .map(|(t, w)| {
            if w == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let p = curve.point(t)?;
            Ok(eig.eval([p.x, p.y]) * w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// `∫ b(t) e(γ(t)) dt` by the trapezoid rule on `nodes` and `2·nodes` points.
///
/// The curve must live on the flat chart of the torus. `nodes` must give at
/// least 20 nodes per oscillation, `λ · length / 2π` oscillations in all.
pub fn period_integral(
    curve: &ParamCurve,
    window: &Window,
    eig: &LatticeEigenfunction,
    nodes: usize,
) -> Result<PeriodResult> {
    if !curve.surface().is_flat() {
        return Err(Error::Precondition(
            "period integrals need a curve on the flat torus chart".into(),
        ));
    }
    window.validate()?;
    check_floor(nodes, eig.lambda, curve_length(curve, window)?)?;
    let coarse = period_sum(curve, window, eig, nodes)?;
    let fine = period_sum(curve, window, eig, 2 * nodes)?;
    let error = (fine - coarse).norm();
    if !(error <= DOUBLING_TOL) {
        return Err(Error::UnderResolved { change: error });
    }
    Ok(PeriodResult {
        lambda: eig.lambda,
        value: fine,
        nodes: 2 * nodes,
        error,
    })
}

/// Distance phase and amplitude sampled once on the doubled tensor grid, so
/// that a sweep over `λ` costs no further geodesic solves.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    nodes: (usize, usize),
    widths: (f64, f64),
    /// Row-major over the `2n_s × 2n_t` grid; entries with zero weight are unused.
    phi: Vec<f64>,
    weight: Vec<f64>,
}

impl PhaseGrid {
    /// Samples `φ` at `2·nodes` points per axis over the window supports,
    /// which must lie inside the field's parameter window.
    pub fn new(field: &PhaseField, ws: &Window, wt: &Window, nodes: (usize, usize)) -> Result<Self> {
        ws.validate()?;
        wt.validate()?;
        if nodes.0 < 2 || nodes.1 < 2 {
            return Err(Error::Config(format!("need at least 2 nodes per axis, got {nodes:?}")));
        }
        let (s_lo, s_hi) = ws.support();
        let (t_lo, t_hi) = wt.support();
        if !(field.window().contains(s_lo, t_lo, 1e-12) && field.window().contains(s_hi, t_hi, 1e-12)) {
            return Err(Error::Precondition(format!(
                "window supports [{s_lo}, {s_hi}] × [{t_lo}, {t_hi}] leave the field window {:?}",
                field.window()
            )));
        }
        let s_nodes = ws.nodes(2 * nodes.0);
        let t_nodes = wt.nodes(2 * nodes.1);
        let rows = s_nodes
            .par_iter()
            .map(|&(s, ws_k)| {
                let mut phi = vec![0.0; t_nodes.len()];
                let mut weight = vec![0.0; t_nodes.len()];
                let mut prev: Option<Connection> = None;
                for (j, &(t, wt_k)) in t_nodes.iter().enumerate() {
                    let w = ws_k * wt_k;
                    if w == 0.0 {
                        continue;
                    }
                    let conn = field.connection_near(s, t, prev.as_ref())?;
                    phi[j] = conn.length;
                    weight[j] = w / conn.length.sqrt();
                    prev = Some(conn);
                }
                Ok((phi, weight))
            })
            .collect::<Result<Vec<_>>>()?;
        let (phi, weight): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        Ok(Self {
            nodes,
            widths: (ws.width(), wt.width()),
            phi: phi.concat(),
            weight: weight.concat(),
        })
    }

    pub fn nodes(&self) -> (usize, usize) {
        self.nodes
    }

    /// Sum over every `stride`-th node per axis; stride 2 is the coarse grid.
    fn sum(&self, lambda: f64, stride: usize) -> Complex64 {
        let cols = 2 * self.nodes.1;
        let scale = (stride * stride) as f64;
        let rows: Vec<Complex64> = (0..2 * self.nodes.0)
            .step_by(stride)
            .map(|i| {
                let terms: Vec<Complex64> = (0..cols)
                    .step_by(stride)
                    .map(|j| {
                        let k = i * cols + j;
                        let w = self.weight[k];
                        if w == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::from_polar(w * scale, lambda * self.phi[k])
                        }
                    })
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
        pairwise_sum(&rows)
    }

    /// `∫∫ b(s) b(t) φ^{-1/2} e^{iλφ} ds dt`, with the node floor checked
    /// against the coarse grid.
    pub fn integral(&self, lambda: f64) -> Result<PeriodResult> {
        check_floor(self.nodes.0, lambda, self.widths.0)?;
        check_floor(self.nodes.1, lambda, self.widths.1)?;
        let coarse = self.sum(lambda, 2);
        let fine = self.sum(lambda, 1);
        let error = (fine - coarse).norm();
        if !(error <= DOUBLING_TOL) {
            return Err(Error::UnderResolved { change: error });
        }
        Ok(PeriodResult {
            lambda,
            value: fine,
            nodes: 4 * self.nodes.0 * self.nodes.1,
            error,
        })
    }

    /// [`PhaseGrid::integral`] at each `λ`, in input order.
    pub fn sweep(&self, lambdas: &[f64]) -> Vec<Result<PeriodResult>> {
        lambdas.par_iter().map(|&l| self.integral(l)).collect()
    }
}

/// Nodes per axis needed by [`oscillatory_integral_2d`] at frequency `λ`.
pub fn grid_nodes_required(ws: &Window, wt: &Window, lambda: f64) -> (usize, usize) {
    (node_floor(lambda, ws.width()), node_floor(lambda, wt.width()))
}

/// `∫∫ b(s) b(t) φ(s,t)^{-1/2} e^{iλφ(s,t)} ds dt` by a tensor trapezoid rule.
///
/// The amplitude `φ^{-1/2}` is a model with the homogeneity of a wave kernel
/// amplitude in two dimensions; its constants are not meaningful.
pub fn oscillatory_integral_2d(
    field: &PhaseField,
    ws: &Window,
    wt: &Window,
    lambda: f64,
    nodes: (usize, usize),
) -> Result<PeriodResult> {
    let (ns, nt) = grid_nodes_required(ws, wt, lambda);
    if nodes.0 < ns || nodes.1 < nt {
        return Err(Error::InsufficientNodes {
            nodes: nodes.0.min(nodes.1),
            required: if nodes.0 < ns { ns } else { nt },
        });
    }
    PhaseGrid::new(field, ws, wt, nodes)?.integral(lambda)
}

/// Least-squares line through `(log λ, log |I|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn decay_fit(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < 4 {
        return Err(Error::TooFewPoints(series.len()));
    }
    if let Some(&(lambda, value)) = series.iter().find(|(l, v)| !(*v > 0.0) || !(*l > 0.0)) {
        return Err(Error::NonPositiveMagnitude { lambda, value });
    }
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|(l, _)| l.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition(
            "decay fit needs at least two distinct frequencies".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        residual,
    })
}
