//! Scalar Jacobi fields `h'' + K h = 0` along unit-speed geodesics, the
//! curvature of geodesic circles, and the asymptotic (horocyclic)
//! curvature obtained by sending the circle's center to infinity.
//!
//! Everything is built from the fundamental pair `a, b` integrated together
//! with the geodesic (see `flow`). Boundary-value problems are solved by
//! linearity, so each solve costs one integration.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{self, FlowState};
use crate::geodesic::{GeodesicPath, PathSample};
use crate::metric::{MetricSurface, Point2, UnitTangent, Vec2};

/// Smallest `|h|` at which `h'/h` is still evaluated.
pub const MIN_JACOBI_MAGNITUDE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum JacobiKind {
    /// Initial values `h, h'` at the start of the path.
    Ivp { h0: f64, dh0: f64 },
    /// `h_s(-s) = 0`, `h_s(0) = 1`.
    BvpHs { s: f64 },
    /// The bounded solution, approximated by `h_{s_max}` on `[-s_max/2, 0]`.
    LimitHinf { s_max: f64 },
    /// `h(0) = 1`, `h(length) = 0` along a geodesic of the given length.
    UnitBvp { length: f64 },
}

/// A sampled solution of `h'' + K h = 0` along a geodesic.
#[derive(Debug, Clone)]
pub struct JacobiSolution {
    kind: JacobiKind,
    path: GeodesicPath,
    h: Vec<f64>,
    dh: Vec<f64>,
}

impl JacobiSolution {
    pub fn kind(&self) -> JacobiKind {
        self.kind
    }

    pub fn path(&self) -> &GeodesicPath {
        &self.path
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.dh
    }

    pub fn r_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.path.samples().iter().map(|s| s.r)
    }

    /// `(h(r), h'(r))` by cubic Hermite interpolation, using `h'' = -K h`
    /// for the derivative.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let samples = self.path.samples();
        let (lo, hi) = (self.path.r_start(), self.path.r_end());
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(r >= lo - slack && r <= hi + slack) {
            return Err(Error::OutOfRange {
                value: r,
                min: lo,
                max: hi,
            });
        }
        let i = self.path.locate(r);
        let (r0, r1) = (samples[i].r, samples[i + 1].r);
        let len = r1 - r0;
        let t = ((r - r0) / len).clamp(0.0, 1.0);
        let (p0, p1) = (self.h[i], self.h[i + 1]);
        let (m0, m1) = (self.dh[i] * len, self.dh[i + 1] * len);
        let t2 = t * t;
        let t3 = t2 * t;
        let value =
            p0 * (2.0 * t3 - 3.0 * t2 + 1.0) + m0 * (t3 - 2.0 * t2 + t) + p1 * (-2.0 * t3 + 3.0 * t2) + m1 * (t3 - t2);
        // the derivative is interpolated the same way from (h', h'')
        let surface = self.path.surface();
        let k0 = surface.gaussian_curvature(samples[i].point)?;
        let k1 = surface.gaussian_curvature(samples[i + 1].point)?;
        let (q0, q1) = (self.dh[i], self.dh[i + 1]);
        let (n0, n1) = (-k0 * p0 * len, -k1 * p1 * len);
        let slope =
            q0 * (2.0 * t3 - 3.0 * t2 + 1.0) + n0 * (t3 - 2.0 * t2 + t) + q1 * (-2.0 * t3 + 3.0 * t2) + n1 * (t3 - t2);
        Ok((value, slope))
    }

    /// Largest `|h'' + K h| / max(1, |h|)` over interior samples, with `h''`
    /// from a five-point stencil on `h'`.
    pub fn residual(&self) -> Result<f64> {
        let samples = self.path.samples();
        let surface = self.path.surface();
        let mut worst: f64 = 0.0;
        for i in 2..samples.len().saturating_sub(2) {
            let step = (samples[i + 2].r - samples[i - 2].r) / 4.0;
            let d2 = five_point(&self.dh, i, step);
            let k = surface.gaussian_curvature(samples[i].point)?;
            worst = worst.max((d2 + k * self.h[i]).abs() / self.h[i].abs().max(1.0));
        }
        Ok(worst)
    }

    /// `h'(1)` of the solution rescaled to the unit interval, for [`JacobiKind::UnitBvp`].
    pub fn unit_end_slope(&self) -> Option<f64> {
        match self.kind {
            JacobiKind::UnitBvp { length } => self.dh.last().map(|d| d * length),
            _ => None,
        }
    }

    /// Writes `r,h,dh,kappa` rows; `kappa` is empty where `|h|` is too small.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,h,dh,kappa")?;
        for (i, s) in self.path.samples().iter().enumerate() {
            let (h, dh) = (self.h[i], self.dh[i]);
            if h.abs() >= MIN_JACOBI_MAGNITUDE {
                writeln!(out, "{},{},{},{}", s.r, h, dh, dh / h)?;
            } else {
                writeln!(out, "{},{},{},", s.r, h, dh)?;
            }
        }
        Ok(())
    }
}

fn five_point(v: &[f64], i: usize, step: f64) -> f64 {
    (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * step)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Config(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

struct PairRun {
    samples: Vec<PathSample>,
    pair: Vec<[f64; 4]>,
}

/// Integrates the geodesic and the fundamental pair from `start` over `n`
/// steps of size `h`, labelling the last sample `r_end`. Samples before
/// `keep_from` are not stored. With `rescale`, the pair is kept in range and
/// stored values are scaled along with it.
fn run_pair(
    surface: &MetricSurface,
    start: UnitTangent,
    n: usize,
    h: f64,
    r_end: f64,
    keep_from: usize,
    rescale: bool,
) -> Result<PairRun> {
    let kept = n + 1 - keep_from.min(n + 1);
    let mut run = PairRun {
        samples: Vec::with_capacity(kept),
        pair: Vec::with_capacity(kept),
    };
    flow::integrate(
        surface,
        flow::initial_state(start.base(), start.dir()),
        n,
        h,
        |i, _, s: &mut FlowState| {
            if rescale {
                let factor = flow::rescale_pair(s);
                if factor != 1.0 {
                    for p in run.pair.iter_mut().flatten() {
                        *p *= factor;
                    }
                }
            }
            if i >= keep_from {
                let r = if i == n { r_end } else { r_end - (n - i) as f64 * h };
                run.samples.push(PathSample {
                    r,
                    point: flow::position(s),
                    tangent: flow::velocity(s),
                });
                run.pair.push([s[4], s[5], s[6], s[7]]);
            }
        },
    )?;
    Ok(run)
}

/// Solves `h'' + K h = 0` along `path` with `h = h0, h' = dh0` at its start.
/// The geodesic is re-integrated from its initial tangent at the path's step.
pub fn jacobi_ivp(path: &GeodesicPath, h0: f64, dh0: f64) -> Result<JacobiSolution> {
    let surface = path.surface();
    let (n, h) = flow::step_count(path.length(), path.step(), 1);
    let run = run_pair(surface, path.start(), n, h, path.r_end(), 0, false)?;
    let values = run.pair.iter().map(|p| h0 * p[0] + dh0 * p[2]).collect();
    let slopes = run.pair.iter().map(|p| h0 * p[1] + dh0 * p[3]).collect();
    Ok(JacobiSolution {
        kind: JacobiKind::Ivp { h0, dh0 },
        path: GeodesicPath::from_samples(surface, run.samples, path.step()),
        h: values,
        dh: slopes,
    })
}

/// The point `ζ(-s)` of the geodesic with `ζ'(0) = v`, with its forward tangent.
fn backward_start(surface: &MetricSurface, v: UnitTangent, n: usize, h: f64) -> Result<UnitTangent> {
    let end = flow::integrate(surface, flow::initial_state(v.base(), -v.dir()), n, h, |_, _, _| {})?;
    Ok(UnitTangent::from_raw(flow::position(&end), -flow::velocity(&end)))
}

/// `u / u(0)` for the solution with `u(-s) = 0, u'(-s) = 1`, keeping
/// samples with `r ≥ -keep`.
fn normalized_from_behind(
    surface: &MetricSurface,
    v: UnitTangent,
    s: f64,
    keep: f64,
    step: f64,
) -> Result<(GeodesicPath, Vec<f64>, Vec<f64>)> {
    check_positive("s", s)?;
    check_positive("step", step)?;
    if step > s {
        return Err(Error::Config(format!("step {step} exceeds s = {s}")));
    }
    let (n, h) = flow::step_count(s, step, 1);
    let start = backward_start(surface, v, n, h)?;
    let keep_from = n - ((keep / h + 1e-9).floor() as usize).min(n);
    let run = run_pair(surface, start, n, h, 0.0, keep_from, true)?;
    let u0 = run.pair[run.pair.len() - 1][2];
    if !(u0.abs() >= 1e-12) {
        return Err(Error::Internal(format!(
            "Jacobi field vanished at the base point (u(0) = {u0:e}); this needs a conjugate point"
        )));
    }
    let values: Vec<f64> = run.pair.iter().map(|p| p[2] / u0).collect();
    let slopes: Vec<f64> = run.pair.iter().map(|p| p[3] / u0).collect();
    let mut samples = run.samples;
    // the forward re-integration lands on v up to integration error; pin it
    if let Some(end) = samples.last_mut() {
        end.point = v.base();
        end.tangent = v.dir();
    }
    Ok((GeodesicPath::from_samples(surface, samples, step), values, slopes))
}

/// `h_s` on `[-s, 0]`: `h_s(-s) = 0`, `h_s(0) = 1` along the geodesic with
/// `ζ'(0) = v`.
pub fn hs_solution(surface: &MetricSurface, v: UnitTangent, s: f64, step: f64) -> Result<JacobiSolution> {
    let (path, h, dh) = normalized_from_behind(surface, v, s, s, step)?;
    let mut h = h;
    h[0] = 0.0;
    Ok(JacobiSolution {
        kind: JacobiKind::BvpHs { s },
        path,
        h,
        dh,
    })
}

/// `(h_{s+δ}(r) − h_s(r)) / δ` on `[-s, 0]`, in increasing `r`.
///
/// The difference is the Jacobi field vanishing at 0 that equals
/// `h_{s+δ}(-s)` at `-s`, so it is assembled from two well-conditioned
/// solves instead of by subtraction, which loses every digit once `h_s`
/// saturates in strong negative curvature.
pub fn hs_increment(surface: &MetricSurface, v: UnitTangent, s: f64, delta: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    check_positive("delta", delta)?;
    let wider = hs_solution(surface, v, s + delta, step)?;
    let at_end = wider.eval(-s)?.0;
    check_positive("s", s)?;
    check_positive("step", step)?;
    let (n, h) = flow::step_count(s, step, 1);
    let run = run_pair(surface, v.reversed(), n, h, s, 0, true)?;
    let b_end = run.pair[n][2];
    Ok((0..=n)
        .rev()
        .map(|i| {
            let r = if i == n { -s } else { -(i as f64) * h };
            (r, at_end * (run.pair[i][2] / b_end) / delta)
        })
        .collect())
}

/// Approximation of the bounded solution `h_∞` by `h_{s_max}` restricted to
/// `[-s_max/2, 0]`. The error there is at most `-r/s_max`, and in negative
/// curvature decays exponentially in `s_max`.
pub fn limit_solution(surface: &MetricSurface, v: UnitTangent, s_max: f64, step: f64) -> Result<JacobiSolution> {
    let (path, h, dh) = normalized_from_behind(surface, v, s_max, s_max / 2.0, step)?;
    Ok(JacobiSolution {
        kind: JacobiKind::LimitHinf { s_max },
        path,
        h,
        dh,
    })
}

/// The Jacobi field with `h(0) = 1`, `h(length) = 0` along the geodesic
/// from `v`. Rescaled to the unit interval it solves `h'' + length² K h = 0`.
pub fn unit_bvp(surface: &MetricSurface, v: UnitTangent, length: f64, step: f64) -> Result<JacobiSolution> {
    check_positive("length", length)?;
    check_positive("step", step)?;
    if step > length {
        return Err(Error::Config(format!("step {step} exceeds length {length}")));
    }
    let (n, h) = flow::step_count(length, step, 1);
    let run = run_pair(surface, v, n, h, length, 0, false)?;
    let end = run.pair[n];
    let c = end[0] / end[2];
    let mut values: Vec<f64> = run.pair.iter().map(|p| p[0] - c * p[2]).collect();
    let slopes = run.pair.iter().map(|p| p[1] - c * p[3]).collect();
    values[n] = 0.0;
    Ok(JacobiSolution {
        kind: JacobiKind::UnitBvp { length },
        path: GeodesicPath::from_samples(surface, run.samples, step),
        h: values,
        dh: slopes,
    })
}

/// A geodesic circle of radius `r` seen at the end of one radial geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleProfile {
    pub radius: f64,
    pub curvature: f64,
    /// Outward unit normal of the circle (the radial tangent) at its point.
    pub end: UnitTangent,
}

/// Integrates the radial geodesic from `v` to radius `r` and returns the
/// circle curvature `b'(r)/b(r)` there.
pub fn circle_profile(surface: &MetricSurface, v: UnitTangent, r: f64, step: f64) -> Result<CircleProfile> {
    check_positive("step", step)?;
    if !(r > step) {
        return Err(Error::RadiusTooSmall { radius: r, step });
    }
    let (n, h) = flow::step_count(r, step, 1);
    let mut rescaled = false;
    let end = flow::integrate(surface, flow::initial_state(v.base(), v.dir()), n, h, |_, _, s| {
        rescaled |= flow::rescale_pair(s) != 1.0
    })?;
    if !rescaled && end[6] < MIN_JACOBI_MAGNITUDE {
        return Err(Error::RadiusTooSmall { radius: r, step });
    }
    Ok(CircleProfile {
        radius: r,
        curvature: end[7] / end[6],
        end: UnitTangent::from_raw(flow::position(&end), flow::velocity(&end)),
    })
}

/// Curvature at radius `r` of the geodesic circle about `center`, measured on
/// the radial geodesic leaving in `direction` (normalized here).
pub fn circle_curvature(surface: &MetricSurface, center: Point2, direction: Vec2, r: f64, step: f64) -> Result<f64> {
    let v = UnitTangent::new(surface, center, direction)?;
    Ok(circle_profile(surface, v, r, step)?.curvature)
}

/// Certified upper approximation of the asymptotic curvature at `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticCurvature {
    /// `κ_{s_max}(0)`, never below the true value.
    pub value: f64,
    /// Richardson estimate `2κ_s − κ_{s/2}`, when requested. Not certified.
    pub extrapolated: Option<f64>,
    /// `value − 1/s_max` ≤ true value ≤ `value`.
    pub guaranteed_upper_gap: f64,
    pub s_max: f64,
    /// `(s, κ_s(0))` at `s_max/4`, `s_max/2`, `s_max`.
    pub history: Vec<(f64, f64)>,
}

/// Curvature at `ζ(0)` of the geodesic circle centered at `ζ(-s)`, for
/// `s = s_max` and the history points.
///
/// With the fundamental pair `a, b` integrated backward from `-v`, the
/// solution vanishing at `-s` is `a − (a(s)/b(s)) b`, so `κ_s(0) = a(s)/b(s)`
/// and only one pass without storage is needed.
pub fn asymptotic_curvature(
    surface: &MetricSurface,
    v: UnitTangent,
    s_max: f64,
    richardson: bool,
    step: f64,
) -> Result<AsymptoticCurvature> {
    check_positive("step", step)?;
    if !(s_max > 1.0) || !s_max.is_finite() {
        return Err(Error::Config(format!("s_max must exceed 1, got {s_max}")));
    }
    let (n, h) = flow::step_count(s_max, step, 4);
    let marks = [n / 4, n / 2, n];
    let mut history = Vec::with_capacity(3);
    flow::integrate(surface, flow::initial_state(v.base(), -v.dir()), n, h, |i, r, s| {
        flow::rescale_pair(s);
        flow::recenter(surface, s);
        if marks.contains(&i) {
            let r = if i == n { s_max } else { r };
            history.push((r, s[4] / s[6]));
        }
    })?;
    let value = history[2].1;
    Ok(AsymptoticCurvature {
        value,
        extrapolated: richardson.then(|| 2.0 * value - history[1].1),
        guaranteed_upper_gap: 1.0 / s_max,
        s_max,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RiccatiQuantity {
    /// Circle curvature about `ζ(0)` along `r > 0`.
    Circle,
    /// Asymptotic curvature `h'/h` of the limit solution along `r ≤ 0`.
    Asymptotic { s_max: f64 },
}

/// Largest `|κ' + κ² + K|` over samples in `r_range`, with `κ'` from a
/// five-point central stencil.
pub fn riccati_residual(
    surface: &MetricSurface,
    v: UnitTangent,
    r_range: (f64, f64),
    quantity: RiccatiQuantity,
    step: f64,
) -> Result<f64> {
    let (lo, hi) = r_range;
    if !(lo < hi) {
        return Err(Error::Config(format!("empty range [{lo}, {hi}]")));
    }
    let (samples, kappa): (Vec<PathSample>, Vec<f64>) = match quantity {
        RiccatiQuantity::Circle => {
            check_positive("step", step)?;
            if !(lo > step) {
                return Err(Error::RadiusTooSmall { radius: lo, step });
            }
            let (n, h) = flow::step_count(hi, step, 1);
            let run = run_pair(surface, v, n, h, hi, 0, true)?;
            let kappa = run.pair.iter().map(|p| p[3] / p[2]).collect();
            (run.samples, kappa)
        }
        RiccatiQuantity::Asymptotic { s_max } => {
            if lo < -s_max / 2.0 || hi > 0.0 {
                return Err(Error::OutOfRange {
                    value: lo,
                    min: -s_max / 2.0,
                    max: 0.0,
                });
            }
            let sol = limit_solution(surface, v, s_max, step)?;
            let kappa = sol.h.iter().zip(&sol.dh).map(|(h, d)| d / h).collect();
            (sol.path.samples().to_vec(), kappa)
        }
    };
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for i in 2..samples.len().saturating_sub(2) {
        let r = samples[i].r;
        if r < lo - 1e-12 || r > hi + 1e-12 {
            continue;
        }
        let h = (samples[i + 2].r - samples[i - 2].r) / 4.0;
        let dk = five_point(&kappa, i, h);
        let k = surface.gaussian_curvature(samples[i].point)?;
        worst = worst.max((dk + kappa[i] * kappa[i] + k).abs());
        checked += 1;
    }
    if checked == 0 {
        return Err(Error::Config(format!("no interior samples in [{lo}, {hi}]")));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::geodesic_ivp;

    const STEP: f64 = 1e-3;

    fn tangent(surface: &MetricSurface, x: f64, y: f64, angle: f64) -> UnitTangent {
        UnitTangent::at_angle(surface, Point2::new(x, y), angle).unwrap()
    }

    #[test]
    fn ivp_closed_forms() {
        let flat = MetricSurface::flat();
        let path = geodesic_ivp(&flat, tangent(&flat, 0.0, 0.0, 0.3), 4.0, 1e-2).unwrap();
        let sol = jacobi_ivp(&path, 1.0, 0.0).unwrap();
        assert!(sol.values().iter().all(|h| (h - 1.0).abs() < 1e-14));

        let hyp = MetricSurface::hyperbolic();
        let path = geodesic_ivp(&hyp, tangent(&hyp, 0.2, -0.4, 1.1), 5.0, STEP).unwrap();
        let sol = jacobi_ivp(&path, 0.0, 1.0).unwrap();
        for (r, h) in sol.r_values().zip(sol.values()).skip(1) {
            assert!((h / r.sinh() - 1.0).abs() < 1e-8, "r={r}");
        }
        assert!(sol.residual().unwrap() < 1e-6);

        let steep = MetricSurface::hyperbolic_scaled(2.0);
        let path = geodesic_ivp(&steep, tangent(&steep, 0.0, 0.0, 0.7), 3.0, STEP).unwrap();
        let sol = jacobi_ivp(&path, 1.0, 2.0).unwrap();
        for (r, h) in sol.r_values().zip(sol.values()) {
            assert!((h / (2.0 * r).exp() - 1.0).abs() < 1e-8);
        }
        let (h, dh) = sol.eval(1.2345).unwrap();
        assert!((h / 2.469f64.exp() - 1.0).abs() < 1e-8);
        assert!((dh / (2.0 * 2.469f64.exp()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn circle_curvature_closed_forms() {
        let flat = MetricSurface::flat();
        let k = circle_curvature(&flat, Point2::new(1.0, 2.0), Vec2::new(3.0, -1.0), 2.0, STEP).unwrap();
        assert!((k - 0.5).abs() < 1e-12);

        let hyp = MetricSurface::hyperbolic();
        let k = circle_curvature(&hyp, Point2::new(0.0, 0.0), Vec2::new(1.0, 1.0), 1.0, STEP).unwrap();
        assert!((k - 1.3130352854993315).abs() < 1e-10);

        let steep = MetricSurface::hyperbolic_scaled(2.0);
        let k = circle_curvature(&steep, Point2::new(0.1, 0.0), Vec2::new(0.0, 1.0), 1.0, STEP).unwrap();
        assert!((k - 2.0746294414550963).abs() < 1e-10);

        assert!(matches!(
            circle_curvature(&flat, Point2::new(0.0, 0.0), Vec2::new(1.0, 0.0), 1e-3, STEP),
            Err(Error::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn hs_closed_forms_and_bounds() {
        let flat = MetricSurface::flat();
        let sol = hs_solution(&flat, tangent(&flat, 0.0, 0.0, 0.5), 2.0, STEP).unwrap();
        for (r, h) in sol.r_values().zip(sol.values()) {
            assert!((h - (1.0 + r / 2.0)).abs() < 1e-12);
        }

        let hyp = MetricSurface::hyperbolic();
        let sol = hs_solution(&hyp, tangent(&hyp, 0.3, 0.1, 2.0), 2.0, STEP).unwrap();
        for (r, h) in sol.r_values().zip(sol.values()) {
            assert!((h - (r + 2.0).sinh() / 2f64.sinh()).abs() < 1e-8);
        }
        assert_eq!(*sol.values().last().unwrap(), 1.0);

        for surface in [flat, hyp, MetricSurface::gaussian_bump()] {
            let sol = hs_solution(&surface, tangent(&surface, 0.1, -0.2, 0.8), 3.0, STEP).unwrap();
            assert!(sol.values()[0].abs() <= 1e-8);
            assert!((sol.values().last().unwrap() - 1.0).abs() <= 1e-10);
            for (r, h) in sol.r_values().zip(sol.values()) {
                assert!(*h >= 0.0 && *h <= 1.0 + r / 3.0 + 1e-12);
            }
            assert!(sol.residual().unwrap() < 1e-6);
        }
    }

    #[test]
    fn asymptotic_closed_forms() {
        let flat = MetricSurface::flat();
        let k = asymptotic_curvature(&flat, tangent(&flat, 0.0, 0.0, 1.0), 1000.0, true, 1e-2).unwrap();
        assert!(k.value > 0.0 && k.value <= 1e-3 + 1e-15);
        assert!(k.extrapolated.unwrap().abs() < 1e-12);

        let hyp = MetricSurface::hyperbolic();
        let k = asymptotic_curvature(&hyp, tangent(&hyp, 0.5, 0.5, -0.3), 20.0, false, STEP).unwrap();
        assert!((k.value - 1.0).abs() < 1e-9);
        assert_eq!(k.history.len(), 3);
        assert!(k.history.windows(2).all(|w| w[0].1 >= w[1].1 - 1e-12));

        let steep = MetricSurface::hyperbolic_scaled(2.0);
        let k = asymptotic_curvature(&steep, tangent(&steep, 0.0, 0.0, 0.0), 10.0, false, STEP).unwrap();
        assert!((k.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn asymptotic_agrees_with_hs_slope() {
        let bump = MetricSurface::gaussian_bump();
        let v = tangent(&bump, 0.2, 0.3, 2.4);
        let k = asymptotic_curvature(&bump, v, 6.0, false, STEP).unwrap();
        let sol = hs_solution(&bump, v, 6.0, STEP).unwrap();
        let slope = *sol.derivatives().last().unwrap();
        assert!((k.value - slope).abs() < 1e-9, "{} vs {}", k.value, slope);
    }

    #[test]
    fn riccati_residuals() {
        let flat = MetricSurface::flat();
        let v = tangent(&flat, 0.0, 0.0, 0.0);
        assert!(riccati_residual(&flat, v, (1.0, 5.0), RiccatiQuantity::Circle, STEP).unwrap() <= 1e-6);

        let hyp = MetricSurface::hyperbolic();
        let v = tangent(&hyp, 0.4, 0.0, 1.0);
        assert!(riccati_residual(&hyp, v, (0.5, 6.0), RiccatiQuantity::Circle, STEP).unwrap() <= 1e-6);
        let res = riccati_residual(&hyp, v, (-5.0, 0.0), RiccatiQuantity::Asymptotic { s_max: 12.0 }, STEP).unwrap();
        assert!(res <= 1e-6);

        let bump = MetricSurface::gaussian_bump();
        let v = tangent(&bump, -0.3, 0.2, 0.6);
        assert!(riccati_residual(&bump, v, (0.5, 4.0), RiccatiQuantity::Circle, STEP).unwrap() <= 1e-5);
    }

    #[test]
    fn unit_bvp_flat_is_linear() {
        let flat = MetricSurface::flat();
        let sol = unit_bvp(&flat, tangent(&flat, 0.0, 0.0, 0.2), 2.0, STEP).unwrap();
        for (r, h) in sol.r_values().zip(sol.values()) {
            assert!((h - (1.0 - r / 2.0)).abs() < 1e-12);
        }
        assert!((sol.unit_end_slope().unwrap() + 1.0).abs() < 1e-12);
        let hyp = MetricSurface::hyperbolic();
        let sol = unit_bvp(&hyp, tangent(&hyp, 0.0, 0.0, 0.2), 2.0, STEP).unwrap();
        // h'(1) = -L / b(L) = -2 / sinh 2
        assert!((sol.unit_end_slope().unwrap() + 2.0 / 2f64.sinh()).abs() < 1e-9);
    }

    #[test]
    fn hs_increment_closed_forms() {
        let (s, delta) = (3.0, 1e-3);
        let flat = MetricSurface::flat();
        for (r, d) in hs_increment(&flat, tangent(&flat, 0.2, 0.1, 1.0), s, delta, STEP).unwrap() {
            assert!((d + r / (s * (s + delta))).abs() < 1e-9, "r={r}");
        }
        // h_s(r) = sinh(s + r) / sinh s on the hyperbolic plane
        let hyp = MetricSurface::hyperbolic();
        let hs = |s: f64, r: f64| (s + r).sinh() / s.sinh();
        for (r, d) in hs_increment(&hyp, tangent(&hyp, -0.4, 0.3, 2.0), s, delta, STEP).unwrap() {
            let exact = (hs(s + delta, r) - hs(s, r)) / delta;
            assert!((d - exact).abs() < 1e-7 * (1.0 + exact.abs()), "r={r}: {d} vs {exact}");
        }
    }

    #[test]
    fn recentering_follows_long_geodesics() {
        let surface = MetricSurface::hyperbolic_scaled(2.0);
        let v = tangent(&surface, 0.3, -0.2, 0.7);
        let k = asymptotic_curvature(&surface, v, 2000.0, false, 1e-2).unwrap();
        assert!((k.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bad_arguments() {
        let flat = MetricSurface::flat();
        let v = tangent(&flat, 0.0, 0.0, 0.0);
        assert!(matches!(
            asymptotic_curvature(&flat, v, 0.5, false, STEP),
            Err(Error::Config(_))
        ));
        assert!(matches!(hs_solution(&flat, v, -1.0, STEP), Err(Error::Config(_))));
        let sol = hs_solution(&flat, v, 1.0, STEP).unwrap();
        assert!(matches!(sol.eval(0.5), Err(Error::OutOfRange { .. })));
    }
}
