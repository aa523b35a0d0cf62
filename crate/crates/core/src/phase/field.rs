//! The distance phase `φ(s, t) = d(A(s), B(t))` and its derivatives.
//!
//! `A = α ∘ base` and `B = base` for a deck-style configuration, but any two
//! disjoint unit-speed curves may be paired.
//!
//! First derivatives come from the first variation of arc length along the
//! connecting geodesic. The pure second derivatives come from the geodesic
//! curvature of the curve and the curvature of the distance circle:
//!
//! `∂²_s φ = ± κ_A cos θ + κ cos² θ`,
//!
//! where `θ` is the angle between `A'(s)` and the circle about `B(t)` through
//! `A(s)`, and `κ` is that circle's curvature. For unit-speed curves this holds
//! at every `(s, t)`, not only at critical points. The mixed derivative is a
//! central difference of the exact gradient.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{shoot, Connection, ShootOptions};
use crate::metric::{MetricSurface, Vec2};
use crate::phase::curve::{covariant_acceleration, CurveJet, ParamCurve};
use crate::phase::isometry::Isometry;

pub const MIXED_STEP: f64 = 1e-4;
pub const DISJOINT_SAMPLES: usize = 200;
pub const MIN_SEPARATION: f64 = 1e-3;
/// Geometric diagonal entries further than this from finite differences are flagged.
pub const DISCREPANCY_FLAG: f64 = 1e-3;

/// A curve placed on the surface by an isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedCurve {
    pub curve: ParamCurve,
    pub isometry: Isometry,
}

impl PlacedCurve {
    pub fn new(curve: ParamCurve, isometry: Isometry) -> Self {
        Self { curve, isometry }
    }

    pub fn plain(curve: ParamCurve) -> Self {
        Self::new(curve, Isometry::Identity)
    }

    pub fn jet(&self, t: f64) -> Result<CurveJet> {
        let jet = self.curve.jet(t)?;
        Ok(CurveJet {
            point: self.isometry.apply(jet.point),
            velocity: self.isometry.differential(jet.velocity),
            acceleration: self.isometry.differential(jet.acceleration),
        })
    }
}

/// Rectangle of parameters `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamWindow {
    pub s: (f64, f64),
    pub t: (f64, f64),
}

impl ParamWindow {
    pub fn new(s: (f64, f64), t: (f64, f64)) -> Self {
        Self { s, t }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self::new((lo, hi), (lo, hi))
    }

    pub fn contains(&self, s: f64, t: f64, slack: f64) -> bool {
        s >= self.s.0 - slack && s <= self.s.1 + slack && t >= self.t.0 - slack && t <= self.t.1 + slack
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.t, self.s)
    }
}

/// The pieces of one geometric pure second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PureSecond {
    /// Angle in `[0, π/2]` between the curve and the distance circle.
    pub theta: f64,
    /// Geodesic curvature of the curve.
    pub curve_curvature: f64,
    /// Curvature of the distance circle through the curve point.
    pub circle_curvature: f64,
    /// Sign of the curve's covariant acceleration against the outward radial direction.
    pub sign: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseHessian {
    pub matrix: [[f64; 2]; 2],
    pub s_part: PureSecond,
    pub t_part: PureSecond,
}

impl PhaseHessian {
    pub fn det(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

type CacheKey = (u64, u64);

/// `φ(s, t) = d(A(s), B(t))` with cached geodesic connections.
#[derive(Debug)]
pub struct PhaseField {
    surface: MetricSurface,
    a: PlacedCurve,
    b: PlacedCurve,
    window: ParamWindow,
    opts: ShootOptions,
    cache: Mutex<HashMap<CacheKey, Connection>>,
}

impl Clone for PhaseField {
    fn clone(&self) -> Self {
        Self {
            surface: self.surface.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            window: self.window,
            opts: self.opts,
            cache: Mutex::new(self.cache.lock().map(|c| c.clone()).unwrap_or_default()),
        }
    }
}

impl PhaseField {
    /// Pairs two placed curves, checking that they stay apart over `window`.
    pub fn new(
        surface: &MetricSurface,
        a: PlacedCurve,
        b: PlacedCurve,
        window: ParamWindow,
        opts: ShootOptions,
    ) -> Result<Self> {
        if !(window.s.0 < window.s.1 && window.t.0 < window.t.1) {
            return Err(Error::Config(format!("empty parameter window {window:?}")));
        }
        a.isometry.validate(surface)?;
        b.isometry.validate(surface)?;
        let field = Self {
            surface: surface.clone(),
            a,
            b,
            window,
            opts,
            cache: Mutex::new(HashMap::new()),
        };
        let separation = field.min_separation(DISJOINT_SAMPLES)?;
        if separation < MIN_SEPARATION {
            return Err(Error::CurvesIntersect { separation });
        }
        Ok(field)
    }

    /// `A = α ∘ base`, `B = base`.
    pub fn deck(
        surface: &MetricSurface,
        base: ParamCurve,
        isometry: Isometry,
        window: ParamWindow,
        opts: ShootOptions,
    ) -> Result<Self> {
        Self::new(
            surface,
            PlacedCurve::new(base.clone(), isometry),
            PlacedCurve::plain(base),
            window,
            opts,
        )
    }

    /// The field with the roles of the curves exchanged: `φ'(t, s) = φ(s, t)`.
    pub fn swapped(&self) -> Self {
        Self {
            surface: self.surface.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
            window: self.window.swapped(),
            opts: self.opts,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn surface(&self) -> &MetricSurface {
        &self.surface
    }

    pub fn window(&self) -> ParamWindow {
        self.window
    }

    pub fn options(&self) -> &ShootOptions {
        &self.opts
    }

    pub fn curve_a(&self) -> &PlacedCurve {
        &self.a
    }

    pub fn curve_b(&self) -> &PlacedCurve {
        &self.b
    }

    /// Smallest coordinate distance between the curves on an `n`-point grid
    /// per curve over the window.
    pub fn min_separation(&self, n: usize) -> Result<f64> {
        let grid = |(lo, hi): (f64, f64), c: &PlacedCurve| -> Result<Vec<Vec2>> {
            (0..n)
                .map(|k| {
                    let u = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                    Ok(c.jet(u)?.point.coords())
                })
                .collect()
        };
        let pa = grid(self.window.s, &self.a)?;
        let pb = grid(self.window.t, &self.b)?;
        let mut best = f64::INFINITY;
        for p in &pa {
            for q in &pb {
                best = best.min((p - q).norm());
            }
        }
        Ok(best)
    }

    fn cached(&self, key: CacheKey) -> Option<Connection> {
        self.cache.lock().ok().and_then(|c| c.get(&key).copied())
    }

    fn connection_with(&self, s: f64, t: f64, hint: Option<&Connection>) -> Result<Connection> {
        let key = (s.to_bits(), t.to_bits());
        if let Some(c) = self.cached(key) {
            return Ok(c);
        }
        let conn = self.connection_near(s, t, hint)?;
        if let Ok(mut cache) = self.cache.lock() {
            cache.insert(key, conn);
        }
        Ok(conn)
    }

    /// The geodesic from `A(s)` to `B(t)`, warm-started from a nearby
    /// connection and bypassing the cache. Meant for dense sweeps where
    /// caching every node would only cost memory.
    pub fn connection_near(&self, s: f64, t: f64, hint: Option<&Connection>) -> Result<Connection> {
        let x = self.a.jet(s)?.point;
        let y = self.b.jet(t)?.point;
        let guess = match hint {
            Some(h) => Some((h.launch_angle(&self.surface)?, h.length)),
            None => None,
        };
        let conn = match shoot(&self.surface, x, y, &self.opts, guess) {
            Ok(c) => c,
            // a stale warm start can fail where the default guess succeeds
            Err(_) if guess.is_some() => shoot(&self.surface, x, y, &self.opts, None)?,
            Err(e) => return Err(e),
        };
        Ok(conn)
    }

    /// The geodesic from `A(s)` to `B(t)`.
    pub fn connection(&self, s: f64, t: f64) -> Result<Connection> {
        self.connection_with(s, t, None)
    }

    pub fn phase(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.connection(s, t)?.length)
    }

    fn gradient_of(&self, s: f64, t: f64, conn: &Connection) -> Result<[f64; 2]> {
        let ja = self.a.jet(s)?;
        let jb = self.b.jet(t)?;
        let ds = -self.surface.inner(ja.point, ja.velocity, conn.start.dir())?;
        let dt = self.surface.inner(jb.point, jb.velocity, conn.end.dir())?;
        Ok([ds, dt])
    }

    fn gradient_near(&self, s: f64, t: f64, hint: &Connection) -> Result<[f64; 2]> {
        let conn = self.connection_with(s, t, Some(hint))?;
        self.gradient_of(s, t, &conn)
    }

    /// `(∂_s φ, ∂_t φ)` from the endpoint tangents of the connecting geodesic.
    pub fn gradient(&self, s: f64, t: f64) -> Result<[f64; 2]> {
        let conn = self.connection(s, t)?;
        self.gradient_of(s, t, &conn)
    }

    /// The geometric pure second derivative at one end of the connection.
    ///
    /// `outward` is the unit radial direction at the curve point pointing away
    /// from the circle's center, `kappa` the circle's curvature there.
    fn pure_second(&self, jet: &CurveJet, outward: Vec2, kappa: f64) -> Result<PureSecond> {
        let surface = &self.surface;
        let p = jet.point;
        let speed = surface.norm(p, jet.velocity)?;
        let circle_tangent = surface.rotate_perp(p, outward)?;
        let cos_theta = (surface.inner(p, jet.velocity, circle_tangent)? / speed).abs().min(1.0);
        let acc = covariant_acceleration(surface, jet)?;
        let radial = surface.inner(p, acc, outward)?;
        let curvature = {
            let normal = surface.rotate_perp(p, jet.velocity / speed)?;
            surface.inner(p, acc, normal)?.abs() / (speed * speed)
        };
        let sign = if radial < 0.0 { -1.0 } else { 1.0 };
        Ok(PureSecond {
            theta: cos_theta.acos(),
            curve_curvature: curvature,
            circle_curvature: kappa,
            sign,
            value: sign * curvature * cos_theta + kappa * cos_theta * cos_theta,
        })
    }

    /// Hessian with geometric diagonal and differenced mixed entry.
    pub fn hessian(&self, s: f64, t: f64) -> Result<PhaseHessian> {
        let conn = self.connection(s, t)?;
        let ja = self.a.jet(s)?;
        let jb = self.b.jet(t)?;
        let s_part = self.pure_second(&ja, -conn.start.dir(), conn.circle_curvature_at_start())?;
        let t_part = self.pure_second(&jb, conn.end.dir(), conn.circle_curvature_at_end())?;
        let h = MIXED_STEP;
        let dt_plus = self.gradient_near(s, t + h, &conn)?[0];
        let dt_minus = self.gradient_near(s, t - h, &conn)?[0];
        let ds_plus = self.gradient_near(s + h, t, &conn)?[1];
        let ds_minus = self.gradient_near(s - h, t, &conn)?[1];
        let mixed = 0.5 * ((dt_plus - dt_minus) + (ds_plus - ds_minus)) / (2.0 * h);
        Ok(PhaseHessian {
            matrix: [[s_part.value, mixed], [mixed, t_part.value]],
            s_part,
            t_part,
        })
    }

    /// Central differences of `φ` with step `h`.
    pub fn gradient_fd(&self, s: f64, t: f64, h: f64) -> Result<[f64; 2]> {
        let conn = self.connection(s, t)?;
        let f = |ds: f64, dt: f64| -> Result<f64> { Ok(self.connection_with(s + ds, t + dt, Some(&conn))?.length) };
        Ok([
            (f(h, 0.0)? - f(-h, 0.0)?) / (2.0 * h),
            (f(0.0, h)? - f(0.0, -h)?) / (2.0 * h),
        ])
    }

    /// Second central differences of `φ` with step `h`.
    pub fn hessian_fd(&self, s: f64, t: f64, h: f64) -> Result<[[f64; 2]; 2]> {
        let conn = self.connection(s, t)?;
        let f = |ds: f64, dt: f64| -> Result<f64> { Ok(self.connection_with(s + ds, t + dt, Some(&conn))?.length) };
        let c = conn.length;
        let ss = (f(h, 0.0)? - 2.0 * c + f(-h, 0.0)?) / (h * h);
        let tt = (f(0.0, h)? - 2.0 * c + f(0.0, -h)?) / (h * h);
        let st = (f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?) / (4.0 * h * h);
        Ok([[ss, st], [st, tt]])
    }

    /// Largest gap between the geometric diagonal and second differences at
    /// step `h`, and whether it exceeds the flag threshold.
    pub fn diagonal_discrepancy(&self, s: f64, t: f64, h: f64) -> Result<(f64, bool)> {
        let geo = self.hessian(s, t)?.matrix;
        let fd = self.hessian_fd(s, t, h)?;
        let gap = (geo[0][0] - fd[0][0]).abs().max((geo[1][1] - fd[1][1]).abs());
        Ok((gap, gap > DISCREPANCY_FLAG))
    }

    /// Evaluates `φ` on an `n × n` grid over the window, row-major in `s`.
    pub fn grid(&self, n: usize) -> Result<Vec<(f64, f64, f64)>> {
        if n < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points per axis, got {n}")));
        }
        let w = self.window;
        let mut out = Vec::with_capacity(n * n);
        let mut prev: Option<Connection> = None;
        for i in 0..n {
            let s = w.s.0 + (w.s.1 - w.s.0) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let t = w.t.0 + (w.t.1 - w.t.0) * j as f64 / (n - 1) as f64;
                let conn = self.connection_with(s, t, prev.as_ref())?;
                out.push((s, t, conn.length));
                prev = Some(conn);
            }
        }
        Ok(out)
    }

    /// Writes the `s,t,phi` heatmap of [`PhaseField::grid`].
    pub fn write_heatmap<W: Write>(&self, n: usize, mut out: W) -> io::Result<()> {
        let grid = self.grid(n).map_err(io::Error::other)?;
        writeln!(out, "s,t,phi")?;
        for (s, t, phi) in grid {
            writeln!(out, "{s},{t},{phi}")?;
        }
        Ok(())
    }
}
