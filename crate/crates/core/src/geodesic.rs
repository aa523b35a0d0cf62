//! Geodesics: initial-value integration, two-point shooting and distance.
//!
//! Every geodesic is integrated at unit speed with the classic fixed-step
//! RK4 scheme. Two-point problems are solved by shooting from the first
//! point: the launch angle is corrected by Newton's method using the
//! scalar Jacobi field `b` (with `b(0) = 0, b'(0) = 1`) carried along the
//! flow, while the arc length absorbs the tangential component of the miss.

use std::io::{self, Write};

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{self, FlowState};
use crate::metric::{MetricSurface, Point2, UnitTangent, Vec2};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_CONNECT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;

/// Numerical settings shared by every geodesic computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootOptions {
    pub step: f64,
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            tol: DEFAULT_CONNECT_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl ShootOptions {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub r: f64,
    pub point: Point2,
    pub tangent: Vec2,
}

/// A sampled unit-speed geodesic `r ↦ ζ(r)` on `[r_start, r_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    surface: MetricSurface,
    samples: Vec<PathSample>,
    step: f64,
}

impl GeodesicPath {
    pub(crate) fn from_samples(surface: &MetricSurface, samples: Vec<PathSample>, step: f64) -> Self {
        Self {
            surface: surface.clone(),
            samples,
            step,
        }
    }

    pub fn surface(&self) -> &MetricSurface {
        &self.surface
    }

    pub fn samples(&self) -> &[PathSample] {
        &self.samples
    }

    /// Nominal integrator step.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn r_start(&self) -> f64 {
        self.samples[0].r
    }

    pub fn r_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].r
    }

    pub fn length(&self) -> f64 {
        self.r_end() - self.r_start()
    }

    pub fn start(&self) -> UnitTangent {
        let s = &self.samples[0];
        UnitTangent::from_raw(s.point, s.tangent)
    }

    pub fn end(&self) -> UnitTangent {
        let s = &self.samples[self.samples.len() - 1];
        UnitTangent::from_raw(s.point, s.tangent)
    }

    fn check_range(&self, r: f64) -> Result<()> {
        let (lo, hi) = (self.r_start(), self.r_end());
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if r < lo - slack || r > hi + slack || r.is_nan() {
            return Err(Error::OutOfRange {
                value: r,
                min: lo,
                max: hi,
            });
        }
        Ok(())
    }

    /// Index `i` with `r_i ≤ r ≤ r_{i+1}`.
    pub(crate) fn locate(&self, r: f64) -> usize {
        let n = self.samples.len();
        let idx = self.samples.partition_point(|s| s.r <= r);
        idx.saturating_sub(1).min(n.saturating_sub(2))
    }

    /// Position and unit tangent at `r` by cubic Hermite interpolation.
    pub fn tangent_at(&self, r: f64) -> Result<UnitTangent> {
        self.check_range(r)?;
        if self.samples.len() == 1 {
            return Ok(self.start());
        }
        let i = self.locate(r);
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        let h = s1.r - s0.r;
        let t = ((r - s0.r) / h).clamp(0.0, 1.0);
        let (p0, p1) = (s0.point.coords(), s1.point.coords());
        let (m0, m1) = (s0.tangent * h, s1.tangent * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let pos =
            p0 * (2.0 * t3 - 3.0 * t2 + 1.0) + m0 * (t3 - 2.0 * t2 + t) + p1 * (-2.0 * t3 + 3.0 * t2) + m1 * (t3 - t2);
        let vel = (p0 * (6.0 * t2 - 6.0 * t)
            + m0 * (3.0 * t2 - 4.0 * t + 1.0)
            + p1 * (-6.0 * t2 + 6.0 * t)
            + m1 * (3.0 * t2 - 2.0 * t))
            / h;
        let point = Point2::from_coords(pos);
        UnitTangent::new(&self.surface, point, vel)
    }

    pub fn point_at(&self, r: f64) -> Result<Point2> {
        Ok(self.tangent_at(r)?.base())
    }

    /// The same geodesic traversed backwards, reparametrized by `r ↦ -r`.
    pub fn reversed(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|s| PathSample {
                r: -s.r,
                point: s.point,
                tangent: -s.tangent,
            })
            .collect();
        Self {
            surface: self.surface.clone(),
            samples,
            step: self.step,
        }
    }

    /// Writes `r,x,y,v1,v2` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,x,y,v1,v2")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{}",
                s.r, s.point.x, s.point.y, s.tangent.x, s.tangent.y
            )?;
        }
        Ok(())
    }

    /// Largest deviation of `|ζ'|_g` from 1.
    pub fn max_speed_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            worst = worst.max((self.surface.norm(s.point, s.tangent)? - 1.0).abs());
        }
        Ok(worst)
    }

    /// Largest residual of the geodesic equation, with `ζ''` taken by
    /// central differences of the sampled tangent.
    pub fn max_equation_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(3) {
            let (a, b, c) = (&w[0], &w[1], &w[2]);
            let accel = (c.tangent - a.tangent) / (c.r - a.r);
            let gamma = self.surface.christoffel_at(b.point)?;
            let res = accel + gamma.contract(b.tangent, b.tangent);
            worst = worst.max(res.norm());
        }
        Ok(worst)
    }
}

fn sample_of(r: f64, s: &FlowState) -> PathSample {
    PathSample {
        r,
        point: flow::position(s),
        tangent: flow::velocity(s),
    }
}

fn integrate_path(surface: &MetricSurface, start: UnitTangent, length: f64, step: f64) -> Result<Vec<PathSample>> {
    let (n, h) = flow::step_count(length, step, 1);
    let mut samples = Vec::with_capacity(n + 1);
    flow::integrate(
        surface,
        flow::initial_state(start.base(), start.dir()),
        n,
        h,
        |_, r, s| samples.push(sample_of(r, s)),
    )?;
    Ok(samples)
}

fn check_length_and_step(length: f64, step: f64) -> Result<()> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Config(format!("geodesic length must be positive, got {length}")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(format!("integrator step must be positive, got {step}")));
    }
    if step > length {
        return Err(Error::Config(format!(
            "integrator step {step} exceeds geodesic length {length}"
        )));
    }
    Ok(())
}

/// Integrates the unit-speed geodesic with `ζ'(0) = start` over `[0, length]`.
pub fn geodesic_ivp(surface: &MetricSurface, start: UnitTangent, length: f64, step: f64) -> Result<GeodesicPath> {
    check_length_and_step(length, step)?;
    Ok(GeodesicPath {
        surface: surface.clone(),
        samples: integrate_path(surface, start, length, step)?,
        step,
    })
}

/// The geodesic through `v` (at `r = 0`) sampled on `[r_min, r_max]`, with
/// `r_min ≤ 0 ≤ r_max`. The backward half is integrated from `-v`.
pub fn geodesic_through(
    surface: &MetricSurface,
    v: UnitTangent,
    r_min: f64,
    r_max: f64,
    step: f64,
) -> Result<GeodesicPath> {
    if !(r_min <= 0.0 && r_max >= 0.0) || r_max - r_min <= 0.0 {
        return Err(Error::Config(format!(
            "parameter range [{r_min}, {r_max}] must contain 0 and be nonempty"
        )));
    }
    if !(step > 0.0) {
        return Err(Error::Config(format!("integrator step must be positive, got {step}")));
    }
    let mut samples = Vec::new();
    if r_min < 0.0 {
        let back = integrate_path(surface, v.reversed(), -r_min, step)?;
        samples.extend(back.iter().rev().map(|s| PathSample {
            r: -s.r,
            point: s.point,
            tangent: -s.tangent,
        }));
    }
    if r_max > 0.0 {
        let fwd = integrate_path(surface, v, r_max, step)?;
        let skip = usize::from(!samples.is_empty());
        samples.extend(fwd.into_iter().skip(skip));
    }
    Ok(GeodesicPath {
        surface: surface.clone(),
        samples,
        step,
    })
}

/// Unit normal `w(r)` along the path: the tangent rotated by +90° in the
/// oriented orthonormal frame. In two dimensions this is the parallel
/// transport of `w(r_start)`.
pub fn transport_perp(path: &GeodesicPath, r: f64) -> Result<UnitTangent> {
    let t = path.tangent_at(r)?;
    let n = path.surface.rotate_perp(t.base(), t.dir())?;
    Ok(UnitTangent::from_raw(t.base(), n))
}

/// Values at `r = L` of the fundamental Jacobi pair launched at the start
/// of a geodesic of length `L`: `a(0) = 1, a'(0) = 0` and `b(0) = 0, b'(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiEnds {
    pub a: f64,
    pub da: f64,
    pub b: f64,
    pub db: f64,
}

/// A solved two-point problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Connection {
    pub length: f64,
    /// Unit tangent leaving the first point.
    pub start: UnitTangent,
    /// Unit tangent arriving at the second point.
    pub end: UnitTangent,
    pub jacobi: JacobiEnds,
    pub iterations: usize,
    pub residual: f64,
}

impl Connection {
    /// Curvature at the second point of the geodesic circle centered at the
    /// first point.
    pub fn circle_curvature_at_end(&self) -> f64 {
        self.jacobi.db / self.jacobi.b
    }

    /// Curvature at the first point of the geodesic circle centered at the
    /// second point.
    pub fn circle_curvature_at_start(&self) -> f64 {
        self.jacobi.a / self.jacobi.b
    }

    /// The launch angle in the orthonormal frame at the first point.
    pub fn launch_angle(&self, surface: &MetricSurface) -> Result<f64> {
        self.start.frame_angle(surface)
    }
}

struct Shot {
    end: FlowState,
    miss: Vec2,
    err: f64,
}

fn fire(surface: &MetricSurface, x: Point2, y: Point2, angle: f64, length: f64, step: f64) -> Result<Shot> {
    let start = UnitTangent::at_angle(surface, x, angle)?;
    let (n, h) = flow::step_count(length, step, 1);
    let end = flow::integrate(surface, flow::initial_state(x, start.dir()), n, h, |_, _, _| {})?;
    let miss = flow::position(&end).coords() - y.coords();
    Ok(Shot {
        end,
        miss,
        err: miss.norm(),
    })
}

fn flat_connection(x: Point2, y: Point2) -> Connection {
    let d = y.coords() - x.coords();
    let length = d.norm();
    let dir = d / length;
    Connection {
        length,
        start: UnitTangent::from_raw(x, dir),
        end: UnitTangent::from_raw(y, dir),
        jacobi: JacobiEnds {
            a: 1.0,
            da: 0.0,
            b: length,
            db: 1.0,
        },
        iterations: 0,
        residual: 0.0,
    }
}

/// Solves the two-point problem from `x` to `y` by shooting.
///
/// `guess` is an optional `(launch angle, length)` warm start; otherwise the
/// Euclidean direction and the midpoint-metric length are used.
pub fn shoot(
    surface: &MetricSurface,
    x: Point2,
    y: Point2,
    opts: &ShootOptions,
    guess: Option<(f64, f64)>,
) -> Result<Connection> {
    if x == y {
        return Err(Error::Precondition("connect needs distinct points".into()));
    }
    if surface.is_flat() {
        return Ok(flat_connection(x, y));
    }
    let (mut angle, mut length) = match guess {
        Some(g) => g,
        None => {
            let d = y.coords() - x.coords();
            let mid = Point2::from_coords((x.coords() + y.coords()) * 0.5);
            let length = surface.norm(mid, d)?;
            let angle = UnitTangent::new(surface, x, d)?.frame_angle(surface)?;
            (angle, length)
        }
    };
    let step = opts.step;
    let mut shot = fire(surface, x, y, angle, length, step)?;
    let mut converged_at: Option<usize> = None;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if shot.err <= opts.tol && converged_at.is_none() {
            converged_at = Some(iterations);
        }
        // after reaching tolerance, polish for at most two more iterations
        if let Some(k) = converged_at {
            if iterations >= k + 2 || shot.err < 1e-14 {
                break;
            }
        }
        iterations += 1;
        let end_pos = flow::position(&shot.end);
        let tangent = flow::velocity(&shot.end);
        let normal = surface.rotate_perp(end_pos, tangent)?;
        let b = shot.end[6];
        let jac = Matrix2::from_columns(&[tangent, normal * b]);
        let delta = match jac.try_inverse() {
            Some(inv) => inv * (-shot.miss),
            None => {
                return Err(Error::Internal(
                    "singular shooting Jacobian; conjugate point on a nonpositively curved plane".into(),
                ))
            }
        };
        let (mut d_len, mut d_ang) = (delta[0], delta[1]);
        if d_ang.abs() > 0.5 {
            let s = 0.5 / d_ang.abs();
            d_ang *= s;
            d_len *= s;
        }
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand_len = length + damping * d_len;
            if cand_len > 0.0 {
                let cand_ang = angle + damping * d_ang;
                let cand = fire(surface, x, y, cand_ang, cand_len, step)?;
                if cand.err < shot.err || shot.err <= opts.tol {
                    accepted = Some((cand_ang, cand_len, cand));
                    break;
                }
            }
            damping *= 0.5;
        }
        match accepted {
            Some((a, l, s)) => {
                let stalled = converged_at.is_some() && s.err >= shot.err;
                angle = a;
                length = l;
                if stalled {
                    break;
                }
                shot = s;
            }
            None => break,
        }
    }
    if shot.err > opts.tol {
        return Err(Error::NoConvergence {
            iterations,
            residual: shot.err,
        });
    }
    let start = UnitTangent::at_angle(surface, x, angle)?;
    let end = &shot.end;
    Ok(Connection {
        length,
        start,
        end: UnitTangent::from_raw(y, flow::velocity(end)),
        jacobi: JacobiEnds {
            a: end[4],
            da: end[5],
            b: end[6],
            db: end[7],
        },
        iterations,
        residual: shot.err,
    })
}

/// The unit-speed geodesic from `x` to `y`, with endpoint error at most `tol`.
pub fn connect(surface: &MetricSurface, x: Point2, y: Point2, opts: &ShootOptions) -> Result<GeodesicPath> {
    let c = shoot(surface, x, y, opts, None)?;
    let step = opts.step.min(c.length);
    geodesic_ivp(surface, c.start, c.length, step)
}

/// Riemannian distance; `0` exactly when `x == y`.
pub fn distance(surface: &MetricSurface, x: Point2, y: Point2) -> Result<f64> {
    distance_with(surface, x, y, &ShootOptions::default())
}

pub fn distance_with(surface: &MetricSurface, x: Point2, y: Point2, opts: &ShootOptions) -> Result<f64> {
    if x == y {
        return Ok(0.0);
    }
    Ok(shoot(surface, x, y, opts, None)?.length)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyperbolic_distance(p: Point2, q: Point2) -> f64 {
        (p.x.cosh() * q.x.cosh() * (p.y - q.y).cosh() - p.x.sinh() * q.x.sinh()).acosh()
    }

    #[test]
    fn flat_ivp_is_straight() {
        let s = MetricSurface::flat();
        let v = UnitTangent::new(&s, Point2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        let path = geodesic_ivp(&s, v, 5.0, 1e-3).unwrap();
        let end = path.end().base();
        assert!((end.x - 5.0).abs() < 1e-12 && end.y.abs() < 1e-15);
        assert!((path.length() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_axes_are_geodesics() {
        let s = MetricSurface::hyperbolic();
        let up = UnitTangent::new(&s, Point2::new(0.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        let path = geodesic_ivp(&s, up, 2.5, 1e-3).unwrap();
        let end = path.end().base();
        assert!(end.x.abs() < 1e-14 && (end.y - 2.5).abs() < 1e-10);

        let right = UnitTangent::new(&s, Point2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        let path = geodesic_ivp(&s, right, 3.0, 1e-3).unwrap();
        let end = path.end().base();
        assert!((end.x - 3.0).abs() < 1e-10 && end.y.abs() < 1e-14);
        assert!(path.max_speed_defect().unwrap() < 1e-12);
    }

    #[test]
    fn ivp_rejects_bad_steps() {
        let s = MetricSurface::flat();
        let v = UnitTangent::new(&s, Point2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!(matches!(geodesic_ivp(&s, v, 1.0, 2.0), Err(Error::Config(_))));
        assert!(matches!(geodesic_ivp(&s, v, 1.0, 0.0), Err(Error::Config(_))));
        assert!(matches!(geodesic_ivp(&s, v, -1.0, 0.1), Err(Error::Config(_))));
    }

    #[test]
    fn geodesic_equation_residual_is_small() {
        let s = MetricSurface::gaussian_bump();
        let v = UnitTangent::at_angle(&s, Point2::new(0.3, -0.2), 0.9).unwrap();
        let path = geodesic_ivp(&s, v, 4.0, 1e-3).unwrap();
        assert!(path.max_speed_defect().unwrap() < 1e-8);
        assert!(path.max_equation_residual().unwrap() < 1e-6);
    }

    #[test]
    fn connect_flat_and_axis() {
        let flat = MetricSurface::flat();
        let path = connect(
            &flat,
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 4.0),
            &ShootOptions::default(),
        )
        .unwrap();
        assert!((path.length() - 5.0).abs() < 1e-12);

        let hyp = MetricSurface::hyperbolic();
        let path = connect(
            &hyp,
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 2.0),
            &ShootOptions::default(),
        )
        .unwrap();
        assert!((path.length() - 2.0).abs() < 1e-10);
        for s in path.samples().iter().step_by(100) {
            assert!(s.point.x.abs() < 1e-9);
        }
    }

    #[test]
    fn distance_matches_hyperboloid_formula() {
        let s = MetricSurface::hyperbolic();
        let pairs = [
            (Point2::new(0.0, 0.0), Point2::new(3.0, 0.0)),
            (Point2::new(0.5, 0.0), Point2::new(0.5, 1.0)),
            (Point2::new(-1.0, 0.3), Point2::new(0.7, -1.2)),
            (Point2::new(0.0, 1.0), Point2::new(0.0, -1.0)),
        ];
        for (p, q) in pairs {
            let d = distance(&s, p, q).unwrap();
            assert!((d - hyperbolic_distance(p, q)).abs() < 1e-10, "{d}");
        }
    }

    #[test]
    fn distance_zero_iff_equal() {
        let s = MetricSurface::gaussian_bump();
        let p = Point2::new(0.2, 0.4);
        assert_eq!(distance(&s, p, p).unwrap(), 0.0);
        assert!(distance(&s, p, Point2::new(0.2, 0.41)).unwrap() > 0.0);
        assert!(matches!(
            connect(&s, p, p, &ShootOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn transport_perp_is_unit_normal() {
        let flat = MetricSurface::flat();
        let v = UnitTangent::new(&flat, Point2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        let path = geodesic_ivp(&flat, v, 3.0, 1e-2).unwrap();
        let w = transport_perp(&path, 1.7).unwrap();
        assert!((w.dir() - Vec2::new(0.0, 1.0)).norm() < 1e-14);

        let hyp = MetricSurface::hyperbolic();
        let up = UnitTangent::new(&hyp, Point2::new(0.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        let path = geodesic_ivp(&hyp, up, 2.0, 1e-3).unwrap();
        let w = transport_perp(&path, 1.0).unwrap();
        assert!((w.dir().x.abs() - 1.0).abs() < 1e-12 && w.dir().y.abs() < 1e-12);

        let bump = MetricSurface::gaussian_bump();
        let v = UnitTangent::at_angle(&bump, Point2::new(-0.4, 0.1), 2.0).unwrap();
        let path = geodesic_ivp(&bump, v, 3.0, 1e-3).unwrap();
        for k in 0..50 {
            let r = 3.0 * k as f64 / 49.0;
            let t = path.tangent_at(r).unwrap();
            let w = transport_perp(&path, r).unwrap();
            assert!(bump.inner(t.base(), t.dir(), w.dir()).unwrap().abs() < 1e-12);
            assert!((bump.norm(t.base(), w.dir()).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(transport_perp(&path, 3.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn shooting_reports_no_convergence() {
        let s = MetricSurface::hyperbolic();
        let opts = ShootOptions {
            max_iterations: 1,
            ..ShootOptions::default()
        };
        let r = shoot(
            &s,
            Point2::new(-1.0, 0.0),
            Point2::new(1.5, 2.0),
            &opts,
            Some((2.5, 0.3)),
        );
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn reversed_path_round_trip() {
        let s = MetricSurface::gaussian_bump();
        let v = UnitTangent::at_angle(&s, Point2::new(0.1, 0.1), 0.3).unwrap();
        let path = geodesic_through(&s, v, -1.5, 2.0, 1e-3).unwrap();
        assert!((path.r_start() + 1.5).abs() < 1e-12 && (path.r_end() - 2.0).abs() < 1e-12);
        let mid = path.tangent_at(0.0).unwrap();
        assert!((mid.base().coords() - v.base().coords()).norm() < 1e-15);
        let back = path.reversed();
        let p = back.point_at(-0.7).unwrap();
        let q = path.point_at(0.7).unwrap();
        assert!((p.coords() - q.coords()).norm() < 1e-15);
    }
}
