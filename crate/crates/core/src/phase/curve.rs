//! Parametrized plane curves, optionally reparametrized by `g`-arc length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricSurface, Point2, Vec2};

/// Coordinate description of a curve `u ↦ c(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveKind {
    /// `c(u) = point + u · direction`.
    Line { point: [f64; 2], direction: [f64; 2] },
    /// `c(u) = center + radius (cos u, sin u)`.
    Circle { center: [f64; 2], radius: f64 },
    /// `c(u) = (u, Σ c_k u^k)`.
    Graph { coefficients: Vec<f64> },
    /// Natural cubic spline through the knots, parametrized by knot index.
    Sampled { knots: Vec<[f64; 2]> },
}

/// Second-derivative coefficients of a natural cubic spline with unit knot spacing.
fn natural_spline_moments(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm for M_{i-1} + 4 M_i + M_{i+1} = 6 Δ²y_i on the interior
    let k = n - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        let rhs = 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]);
        if j == 0 {
            c[j] = 1.0 / 4.0;
            d[j] = rhs / 4.0;
        } else {
            let denom = 4.0 - c[j - 1];
            c[j] = 1.0 / denom;
            d[j] = (rhs - d[j - 1]) / denom;
        }
    }
    for j in (0..k).rev() {
        let next = if j + 1 < k { m[j + 2] } else { 0.0 };
        m[j + 1] = d[j] - c[j] * next;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Line {
        point: Vec2,
        direction: Vec2,
    },
    Circle {
        center: Vec2,
        radius: f64,
    },
    Graph {
        coefficients: Vec<f64>,
    },
    Spline {
        knots: Vec<Vec2>,
        mx: Vec<f64>,
        my: Vec<f64>,
    },
}

impl Shape {
    fn new(kind: &CurveKind) -> Result<Self> {
        Ok(match kind {
            CurveKind::Line { point, direction } => {
                let direction = Vec2::from(*direction);
                if direction.norm() == 0.0 || !direction.iter().all(|v| v.is_finite()) {
                    return Err(Error::Config("line direction must be nonzero".into()));
                }
                Shape::Line {
                    point: Vec2::from(*point),
                    direction,
                }
            }
            CurveKind::Circle { center, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::Config(format!("circle radius must be positive, got {radius}")));
                }
                Shape::Circle {
                    center: Vec2::from(*center),
                    radius: *radius,
                }
            }
            CurveKind::Graph { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::Config("graph needs at least one coefficient".into()));
                }
                Shape::Graph {
                    coefficients: coefficients.clone(),
                }
            }
            CurveKind::Sampled { knots } => {
                if knots.len() < 3 {
                    return Err(Error::TooFewPoints(knots.len()));
                }
                let xs: Vec<f64> = knots.iter().map(|k| k[0]).collect();
                let ys: Vec<f64> = knots.iter().map(|k| k[1]).collect();
                Shape::Spline {
                    knots: knots.iter().map(|k| Vec2::from(*k)).collect(),
                    mx: natural_spline_moments(&xs),
                    my: natural_spline_moments(&ys),
                }
            }
        })
    }

    fn natural_domain(&self) -> Option<(f64, f64)> {
        match self {
            Shape::Spline { knots, .. } => Some((0.0, (knots.len() - 1) as f64)),
            _ => None,
        }
    }

    /// `(c, c', c'')` at raw parameter `u`.
    fn jet(&self, u: f64) -> (Vec2, Vec2, Vec2) {
        match self {
            Shape::Line { point, direction } => (point + direction * u, *direction, Vec2::zeros()),
            Shape::Circle { center, radius } => {
                let (s, c) = u.sin_cos();
                (
                    center + Vec2::new(c, s) * *radius,
                    Vec2::new(-s, c) * *radius,
                    Vec2::new(-c, -s) * *radius,
                )
            }
            Shape::Graph { coefficients } => {
                let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
                for &ck in coefficients.iter().rev() {
                    ddp = ddp * u + 2.0 * dp;
                    dp = dp * u + p;
                    p = p * u + ck;
                }
                (Vec2::new(u, p), Vec2::new(1.0, dp), Vec2::new(0.0, ddp))
            }
            Shape::Spline { knots, mx, my } => {
                let n = knots.len();
                let i = (u.floor().max(0.0) as usize).min(n - 2);
                let w = u - i as f64;
                let v = 1.0 - w;
                let piece = |y: &dyn Fn(usize) -> f64, m: &[f64]| {
                    let (y0, y1, m0, m1) = (y(i), y(i + 1), m[i], m[i + 1]);
                    let val = m0 * v * v * v / 6.0 + m1 * w * w * w / 6.0 + (y0 - m0 / 6.0) * v + (y1 - m1 / 6.0) * w;
                    let d = -m0 * v * v / 2.0 + m1 * w * w / 2.0 + (y1 - y0) - (m1 - m0) / 6.0;
                    let dd = m0 * v + m1 * w;
                    (val, d, dd)
                };
                let (x, dx, ddx) = piece(&|j| knots[j].x, mx);
                let (y, dy, ddy) = piece(&|j| knots[j].y, my);
                (Vec2::new(x, y), Vec2::new(dx, dy), Vec2::new(ddx, ddy))
            }
        }
    }
}

// 5-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

const ARC_TABLE_INTERVALS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
enum Reparam {
    /// `u = t`.
    Identity,
    /// `u = anchor + t / speed`.
    Linear { speed: f64, anchor: f64 },
    /// Cumulative arc length at uniformly spaced raw parameters.
    Table { u: Vec<f64>, arc: Vec<f64>, offset: f64 },
}

/// Coordinate position and derivatives at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub point: Point2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

/// A curve on a metric surface. When built unit-speed, the parameter is
/// `g`-arc length measured from raw parameter 0 (or the start of the domain
/// if 0 lies outside it).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCurve {
    surface: MetricSurface,
    kind: CurveKind,
    shape: Shape,
    domain: (f64, f64),
    reparam: Reparam,
}

impl ParamCurve {
    /// `domain` bounds the raw parameter; it is only used where an arc-length
    /// table is needed or for spline curves (whose domain is the knot range).
    pub fn new(surface: &MetricSurface, kind: CurveKind, unit_speed: bool, domain: (f64, f64)) -> Result<Self> {
        let shape = Shape::new(&kind)?;
        let domain = shape.natural_domain().unwrap_or(domain);
        if !(domain.0 < domain.1) {
            return Err(Error::Config(format!(
                "empty curve domain [{}, {}]",
                domain.0, domain.1
            )));
        }
        let mut curve = Self {
            surface: surface.clone(),
            kind,
            shape,
            domain,
            reparam: Reparam::Identity,
        };
        if unit_speed {
            curve.reparam = curve.build_reparam()?;
        }
        Ok(curve)
    }

    /// Unit-speed curve on the default raw domain `[-10, 10]`.
    pub fn unit_speed(surface: &MetricSurface, kind: CurveKind) -> Result<Self> {
        Self::new(surface, kind, true, (-10.0, 10.0))
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn surface(&self) -> &MetricSurface {
        &self.surface
    }

    pub fn is_unit_speed(&self) -> bool {
        !matches!(self.reparam, Reparam::Identity)
    }

    fn anchor(&self) -> f64 {
        if self.domain.0 <= 0.0 && 0.0 <= self.domain.1 {
            0.0
        } else {
            self.domain.0
        }
    }

    fn raw_speed(&self, u: f64) -> Result<(f64, f64)> {
        let (c, dc, ddc) = self.shape.jet(u);
        let p = Point2::from_coords(c);
        let g = self.surface.metric_at(p)?;
        let dg = self.surface.metric_derivatives(p)?;
        let speed = dc.dot(&(g * dc)).sqrt();
        let dspeed =
            (dc.x * dc.dot(&(dg[0] * dc)) + dc.y * dc.dot(&(dg[1] * dc)) + 2.0 * ddc.dot(&(g * dc))) / (2.0 * speed);
        Ok((speed, dspeed))
    }

    fn arc_between(&self, a: f64, b: f64) -> Result<f64> {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        let mut total = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * self.raw_speed(mid + half * x)?.0;
        }
        Ok(total * half)
    }

    fn build_reparam(&self) -> Result<Reparam> {
        let (lo, hi) = self.domain;
        let probes = 65;
        let mut speeds = Vec::with_capacity(probes);
        for k in 0..probes {
            let u = lo + (hi - lo) * k as f64 / (probes - 1) as f64;
            let s = self.raw_speed(u)?.0;
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Config(format!("curve is singular at raw parameter {u}")));
            }
            speeds.push(s);
        }
        let (min, max) = speeds
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
        if max - min <= 1e-12 * max {
            return Ok(Reparam::Linear {
                speed: speeds[0],
                anchor: self.anchor(),
            });
        }
        let n = ARC_TABLE_INTERVALS;
        let u: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        let mut arc = Vec::with_capacity(n + 1);
        arc.push(0.0);
        for k in 0..n {
            let next = arc[k] + self.arc_between(u[k], u[k + 1])?;
            arc.push(next);
        }
        let anchor = self.anchor();
        let i = (((anchor - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1);
        let offset = arc[i] + self.arc_between(u[i], anchor)?;
        Ok(Reparam::Table { u, arc, offset })
    }

    /// Range of the curve parameter `t`.
    pub fn parameter_range(&self) -> (f64, f64) {
        match &self.reparam {
            Reparam::Identity => self
                .shape
                .natural_domain()
                .unwrap_or((f64::NEG_INFINITY, f64::INFINITY)),
            Reparam::Linear { speed, anchor } => match self.shape.natural_domain() {
                Some((a, b)) => ((a - anchor) * speed, (b - anchor) * speed),
                None => (f64::NEG_INFINITY, f64::INFINITY),
            },
            Reparam::Table { arc, offset, .. } => (-offset, arc[arc.len() - 1] - offset),
        }
    }

    fn raw_parameter(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.parameter_range();
        let slack = 1e-9 * (1.0 + t.abs());
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutOfRange {
                value: t,
                min: lo,
                max: hi,
            });
        }
        match &self.reparam {
            Reparam::Identity => Ok(t),
            Reparam::Linear { speed, anchor } => Ok(anchor + t / speed),
            Reparam::Table { u, arc, offset } => {
                let target = t + offset;
                let n = arc.len() - 1;
                let i = arc.partition_point(|&a| a <= target).saturating_sub(1).min(n - 1);
                // Newton on the arc length inside the bracketing interval
                let (a, b) = (u[i], u[i + 1]);
                let mut x = a + (b - a) * ((target - arc[i]) / (arc[i + 1] - arc[i])).clamp(0.0, 1.0);
                for _ in 0..20 {
                    let f = arc[i] + self.arc_between(a, x)? - target;
                    let dx = f / self.raw_speed(x)?.0;
                    x = (x - dx).clamp(a, b);
                    if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
                        break;
                    }
                }
                Ok(x)
            }
        }
    }

    /// Position, velocity and acceleration in coordinates at parameter `t`.
    pub fn jet(&self, t: f64) -> Result<CurveJet> {
        let u = self.raw_parameter(t)?;
        let (c, dc, ddc) = self.shape.jet(u);
        let point = Point2::from_coords(c);
        if matches!(self.reparam, Reparam::Identity) {
            return Ok(CurveJet {
                point,
                velocity: dc,
                acceleration: ddc,
            });
        }
        let (speed, dspeed) = self.raw_speed(u)?;
        Ok(CurveJet {
            point,
            velocity: dc / speed,
            acceleration: (ddc / speed - dc * (dspeed / (speed * speed))) / speed,
        })
    }

    pub fn point(&self, t: f64) -> Result<Point2> {
        Ok(self.jet(t)?.point)
    }

    pub fn velocity(&self, t: f64) -> Result<Vec2> {
        Ok(self.jet(t)?.velocity)
    }

    /// `D/dt γ'` in coordinates.
    pub fn covariant_acceleration(&self, t: f64) -> Result<Vec2> {
        let jet = self.jet(t)?;
        covariant_acceleration(&self.surface, &jet)
    }

    /// `|D/dt γ'|_g` for unit speed; in general the normal part divided by `|γ'|²`.
    pub fn geodesic_curvature(&self, t: f64) -> Result<f64> {
        let jet = self.jet(t)?;
        Ok(signed_curvature(&self.surface, &jet)?.abs())
    }
}

pub(crate) fn covariant_acceleration(surface: &MetricSurface, jet: &CurveJet) -> Result<Vec2> {
    let gamma = surface.christoffel_at(jet.point)?;
    Ok(jet.acceleration + gamma.contract(jet.velocity, jet.velocity))
}

/// Geodesic curvature, positive when the curve turns to the left.
pub(crate) fn signed_curvature(surface: &MetricSurface, jet: &CurveJet) -> Result<f64> {
    let acc = covariant_acceleration(surface, jet)?;
    let speed = surface.norm(jet.point, jet.velocity)?;
    let normal = surface.rotate_perp(jet.point, jet.velocity / speed)?;
    Ok(surface.inner(jet.point, acc, normal)? / (speed * speed))
}
