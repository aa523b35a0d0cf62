//! Explicit nonpositively curved metrics on the plane.
//!
//! Two closed-form families are supported:
//!
//! * warped products `ds² = dx² + f(x)² dy²` with `K = -f''/f`,
//! * conformal metrics `ds² = e^{2u}(dx² + dy²)` with `K = -e^{-2u} Δu`.
//!
//! Both are diagonal in the coordinate frame, which keeps the Christoffel
//! symbols and curvature exact. The flat plane is the warped product with
//! `f ≡ 1` and gets its own variant so that callers can take Euclidean
//! shortcuts.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Curvature above this value counts as a violation of `K ≤ 0`.
pub const CURVATURE_VIOLATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn coords(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn from_coords(v: Vec2) -> Self {
        Self { x: v.x, y: v.y }
    }
}

/// A tangent vector given in coordinate components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangent2 {
    pub base: Point2,
    pub dir: Vec2,
}

/// A tangent vector of unit `g`-length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitTangent(Tangent2);

impl UnitTangent {
    /// Normalizes `dir` to unit length in the metric at `base`.
    pub fn new(surface: &MetricSurface, base: Point2, dir: Vec2) -> Result<Self> {
        let norm = surface.norm(base, dir)?;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Config(format!(
                "cannot normalize tangent {:?} at ({}, {})",
                dir, base.x, base.y
            )));
        }
        Ok(Self(Tangent2 { base, dir: dir / norm }))
    }

    /// The unit tangent making angle `angle` with the first vector of the
    /// `g`-orthonormal frame at `base` (counter-clockwise).
    pub fn at_angle(surface: &MetricSurface, base: Point2, angle: f64) -> Result<Self> {
        let (e1, e2) = surface.orthonormal_frame(base)?;
        Ok(Self(Tangent2 {
            base,
            dir: e1 * angle.cos() + e2 * angle.sin(),
        }))
    }

    /// Wraps a tangent whose `g`-norm is already 1 within `1e-10`.
    pub fn checked(surface: &MetricSurface, tangent: Tangent2) -> Result<Self> {
        let norm = surface.norm(tangent.base, tangent.dir)?;
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!("tangent has g-norm {norm}, expected 1")));
        }
        Ok(Self(tangent))
    }

    pub(crate) fn from_raw(base: Point2, dir: Vec2) -> Self {
        Self(Tangent2 { base, dir })
    }

    pub fn base(&self) -> Point2 {
        self.0.base
    }

    pub fn dir(&self) -> Vec2 {
        self.0.dir
    }

    pub fn tangent(&self) -> Tangent2 {
        self.0
    }

    pub fn reversed(&self) -> Self {
        Self(Tangent2 {
            base: self.0.base,
            dir: -self.0.dir,
        })
    }

    /// Angle of this tangent in the orthonormal frame at its base point.
    pub fn frame_angle(&self, surface: &MetricSurface) -> Result<f64> {
        let (e1, e2) = surface.orthonormal_frame(self.0.base)?;
        let c = surface.inner(self.0.base, self.0.dir, e1)?;
        let s = surface.inner(self.0.base, self.0.dir, e2)?;
        Ok(s.atan2(c))
    }
}

/// Warping function `f(x) = Σ_k c_k cosh(a x)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpProfile {
    pub rate: f64,
    pub coefficients: Vec<f64>,
}

impl WarpProfile {
    pub fn cosh(rate: f64) -> Self {
        Self {
            rate,
            coefficients: vec![0.0, 1.0],
        }
    }

    /// Returns `(f, f', f'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let a = self.rate;
        let c = (a * x).cosh();
        let s = (a * x).sinh();
        let (mut f, mut df, mut ddf) = (0.0, 0.0, 0.0);
        // c^{k-2}, c^{k-1}, c^k
        let mut pow_km2 = 0.0;
        let mut pow_km1 = 0.0;
        let mut pow_k = 1.0;
        for (k, &coef) in self.coefficients.iter().enumerate() {
            if k == 1 {
                pow_km1 = 1.0;
                pow_k = c;
            } else if k >= 2 {
                pow_km2 = pow_km1;
                pow_km1 = pow_k;
                pow_k *= c;
            }
            if coef == 0.0 {
                continue;
            }
            let kf = k as f64;
            f += coef * pow_k;
            if k >= 1 {
                df += coef * kf * a * pow_km1 * s;
                ddf += coef * kf * a * a * (kf * pow_k - (kf - 1.0) * pow_km2);
            }
        }
        (f, df, ddf)
    }
}

/// A monomial `coefficient · x^x_power · y^y_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub x_power: u32,
    pub y_power: u32,
    pub coefficient: f64,
}

/// Derivatives of a scalar function of `(x, y)` through second order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

/// Conformal factor exponent `u(x, y) = Σ c x^i y^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalPotential {
    pub terms: Vec<Monomial>,
}

impl ConformalPotential {
    pub fn gaussian_bump() -> Self {
        Self {
            terms: vec![
                Monomial {
                    x_power: 2,
                    y_power: 0,
                    coefficient: 0.5,
                },
                Monomial {
                    x_power: 0,
                    y_power: 2,
                    coefficient: 0.5,
                },
            ],
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Jet2 {
        fn powers(t: f64, n: u32) -> (f64, f64, f64) {
            // t^n, d/dt, d²/dt²
            let n_i = n as i32;
            let nf = n as f64;
            let p0 = t.powi(n_i);
            let p1 = if n >= 1 { nf * t.powi(n_i - 1) } else { 0.0 };
            let p2 = if n >= 2 { nf * (nf - 1.0) * t.powi(n_i - 2) } else { 0.0 };
            (p0, p1, p2)
        }
        let mut jet = Jet2::default();
        for m in &self.terms {
            let (x0, x1, x2) = powers(x, m.x_power);
            let (y0, y1, y2) = powers(y, m.y_power);
            let c = m.coefficient;
            jet.value += c * x0 * y0;
            jet.dx += c * x1 * y0;
            jet.dy += c * x0 * y1;
            jet.dxx += c * x2 * y0;
            jet.dxy += c * x1 * y1;
            jet.dyy += c * x0 * y2;
        }
        jet
    }
}

/// Christoffel symbols `Γ^k_{ij}` stored as `gamma[k][i][j]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Christoffel {
    pub gamma: [[[f64; 2]; 2]; 2],
}

impl Christoffel {
    /// `Γ^k_{ij} u^i v^j` for each `k`.
    pub fn contract(&self, u: Vec2, v: Vec2) -> Vec2 {
        let mut out = Vec2::zeros();
        for k in 0..2 {
            let g = &self.gamma[k];
            out[k] = g[0][0] * u[0] * v[0] + g[0][1] * u[0] * v[1] + g[1][0] * u[1] * v[0] + g[1][1] * u[1] * v[1];
        }
        out
    }
}

/// Metric, connection and curvature at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    pub metric: Matrix2<f64>,
    pub christoffel: Christoffel,
    pub curvature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn square(half_width: f64) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub min_curvature: f64,
    pub max_curvature: f64,
    pub points_checked: usize,
    pub violations: Vec<Point2>,
}

impl CurvatureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricSurface {
    Flat,
    WarpedProduct(WarpProfile),
    Conformal(ConformalPotential),
}

impl MetricSurface {
    pub fn flat() -> Self {
        Self::Flat
    }

    /// Constant curvature `-1`, written in Fermi coordinates about the `y`-axis.
    pub fn hyperbolic() -> Self {
        Self::WarpedProduct(WarpProfile::cosh(1.0))
    }

    /// Constant curvature `-a²`.
    pub fn hyperbolic_scaled(a: f64) -> Self {
        Self::WarpedProduct(WarpProfile::cosh(a))
    }

    pub fn gaussian_bump() -> Self {
        Self::Conformal(ConformalPotential::gaussian_bump())
    }

    /// Looks up a named preset. `param` is the rate `a` for `hyperbolic-a`.
    pub fn preset(name: &str, param: Option<f64>) -> Result<Self> {
        match name {
            "flat" => Ok(Self::flat()),
            "hyperbolic" => Ok(Self::hyperbolic()),
            "hyperbolic-a" => {
                let a = param.ok_or_else(|| Error::Config("preset hyperbolic-a needs a rate parameter".into()))?;
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::Config(format!("hyperbolic-a rate must be positive, got {a}")));
                }
                Ok(Self::hyperbolic_scaled(a))
            }
            "gaussian-bump" => Ok(Self::gaussian_bump()),
            other => Err(Error::Config(format!("unknown surface preset '{other}'"))),
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["flat", "hyperbolic", "hyperbolic-a", "gaussian-bump"]
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Self::Flat)
    }

    /// On the constant-curvature warped products `f = c cosh(a x)`, once `|a x|`
    /// exceeds `beyond`, returns the image of the tangent `(p, v)` under the
    /// isometry taking `p` to the origin, so that long geodesics can be
    /// followed without overflowing `f`. Jacobi fields are unaffected.
    ///
    /// The isometry shifts along the `y`-axis and then translates along the
    /// geodesic `y = 0`; it preserves the orthonormal frame `(∂x, ∂y / f)`.
    pub(crate) fn recenter(&self, p: Point2, v: Vec2, beyond: f64) -> Option<(Point2, Vec2)> {
        let Self::WarpedProduct(profile) = self else {
            return None;
        };
        let constant_curvature = profile.coefficients.len() >= 2
            && profile.coefficients[1] > 0.0
            && profile
                .coefficients
                .iter()
                .enumerate()
                .all(|(k, &c)| k == 1 || c == 0.0);
        if !constant_curvature || (profile.rate * p.x).abs() <= beyond {
            return None;
        }
        let stretch = (profile.rate * p.x).cosh();
        Some((Point2::new(0.0, 0.0), Vec2::new(v.x, stretch * v.y)))
    }

    fn warp(profile: &WarpProfile, p: Point2) -> Result<(f64, f64, f64)> {
        let (f, df, ddf) = profile.eval(p.x);
        if !(f.is_finite() && df.is_finite() && ddf.is_finite()) {
            return Err(Error::Domain {
                x: p.x,
                y: p.y,
                what: "warping function",
            });
        }
        if !(f > 0.0) {
            return Err(Error::Domain {
                x: p.x,
                y: p.y,
                what: "warping function must be positive",
            });
        }
        Ok((f, df, ddf))
    }

    fn potential(potential: &ConformalPotential, p: Point2) -> Result<(Jet2, f64)> {
        let jet = potential.eval(p.x, p.y);
        let scale = (2.0 * jet.value).exp();
        let finite = [jet.value, jet.dx, jet.dy, jet.dxx, jet.dxy, jet.dyy, scale]
            .iter()
            .all(|v| v.is_finite());
        if !finite || scale == 0.0 {
            return Err(Error::Domain {
                x: p.x,
                y: p.y,
                what: "conformal factor",
            });
        }
        Ok((jet, scale))
    }

    /// The metric tensor `g_ij(p)`.
    pub fn metric_at(&self, p: Point2) -> Result<Matrix2<f64>> {
        match self {
            Self::Flat => Ok(Matrix2::identity()),
            Self::WarpedProduct(w) => {
                let (f, _, _) = Self::warp(w, p)?;
                Ok(Matrix2::new(1.0, 0.0, 0.0, f * f))
            }
            Self::Conformal(u) => {
                let (_, scale) = Self::potential(u, p)?;
                Ok(Matrix2::identity() * scale)
            }
        }
    }

    /// Coordinate derivatives `[∂_x g, ∂_y g]` of the metric tensor.
    pub fn metric_derivatives(&self, p: Point2) -> Result<[Matrix2<f64>; 2]> {
        match self {
            Self::Flat => Ok([Matrix2::zeros(), Matrix2::zeros()]),
            Self::WarpedProduct(w) => {
                let (f, df, _) = Self::warp(w, p)?;
                Ok([Matrix2::new(0.0, 0.0, 0.0, 2.0 * f * df), Matrix2::zeros()])
            }
            Self::Conformal(u) => {
                let (jet, scale) = Self::potential(u, p)?;
                Ok([
                    Matrix2::identity() * (2.0 * jet.dx * scale),
                    Matrix2::identity() * (2.0 * jet.dy * scale),
                ])
            }
        }
    }

    pub fn christoffel_at(&self, p: Point2) -> Result<Christoffel> {
        Ok(self.local(p)?.christoffel)
    }

    pub fn gaussian_curvature(&self, p: Point2) -> Result<f64> {
        Ok(self.local(p)?.curvature)
    }

    /// Metric, Christoffel symbols and curvature in one evaluation.
    pub fn local(&self, p: Point2) -> Result<LocalGeometry> {
        match self {
            Self::Flat => Ok(LocalGeometry {
                metric: Matrix2::identity(),
                christoffel: Christoffel::default(),
                curvature: 0.0,
            }),
            Self::WarpedProduct(w) => {
                let (f, df, ddf) = Self::warp(w, p)?;
                let mut c = Christoffel::default();
                // Γ^x_yy = -f f', Γ^y_xy = Γ^y_yx = f'/f
                c.gamma[0][1][1] = -f * df;
                c.gamma[1][0][1] = df / f;
                c.gamma[1][1][0] = df / f;
                Ok(LocalGeometry {
                    metric: Matrix2::new(1.0, 0.0, 0.0, f * f),
                    christoffel: c,
                    curvature: -ddf / f,
                })
            }
            Self::Conformal(u) => {
                let (jet, scale) = Self::potential(u, p)?;
                let (ux, uy) = (jet.dx, jet.dy);
                let mut c = Christoffel::default();
                c.gamma[0][0][0] = ux;
                c.gamma[0][0][1] = uy;
                c.gamma[0][1][0] = uy;
                c.gamma[0][1][1] = -ux;
                c.gamma[1][0][0] = -uy;
                c.gamma[1][0][1] = ux;
                c.gamma[1][1][0] = ux;
                c.gamma[1][1][1] = uy;
                Ok(LocalGeometry {
                    metric: Matrix2::identity() * scale,
                    christoffel: c,
                    curvature: -(jet.dxx + jet.dyy) / scale,
                })
            }
        }
    }

    pub fn inner(&self, p: Point2, u: Vec2, v: Vec2) -> Result<f64> {
        let g = self.metric_at(p)?;
        Ok(u.dot(&(g * v)))
    }

    pub fn norm(&self, p: Point2, v: Vec2) -> Result<f64> {
        Ok(self.inner(p, v, v)?.max(0.0).sqrt())
    }

    /// Rotates `v` by +90° in an oriented `g`-orthonormal frame at `p`.
    pub fn rotate_perp(&self, p: Point2, v: Vec2) -> Result<Vec2> {
        let g = self.metric_at(p)?;
        Ok(rotate_with(&g, v))
    }

    /// Oriented orthonormal frame obtained by Gram–Schmidt from `∂_x`.
    pub fn orthonormal_frame(&self, p: Point2) -> Result<(Vec2, Vec2)> {
        let g = self.metric_at(p)?;
        let e1 = Vec2::new(1.0 / g[(0, 0)].sqrt(), 0.0);
        Ok((e1, rotate_with(&g, e1)))
    }

    /// Grid check of `K ≤ 0` over `region`, endpoints included.
    pub fn validate_nonpositive(&self, region: Rect, step: f64) -> Result<CurvatureReport> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Config(format!("grid step must be positive, got {step}")));
        }
        let nx = ((region.x_max - region.x_min) / step).round().max(0.0) as usize;
        let ny = ((region.y_max - region.y_min) / step).round().max(0.0) as usize;
        let mut report = CurvatureReport {
            min_curvature: f64::INFINITY,
            max_curvature: f64::NEG_INFINITY,
            points_checked: 0,
            violations: Vec::new(),
        };
        for i in 0..=nx {
            let x = if nx == 0 {
                region.x_min
            } else {
                region.x_min + (region.x_max - region.x_min) * i as f64 / nx as f64
            };
            for j in 0..=ny {
                let y = if ny == 0 {
                    region.y_min
                } else {
                    region.y_min + (region.y_max - region.y_min) * j as f64 / ny as f64
                };
                let p = Point2::new(x, y);
                let k = self.gaussian_curvature(p)?;
                report.min_curvature = report.min_curvature.min(k);
                report.max_curvature = report.max_curvature.max(k);
                report.points_checked += 1;
                if k > CURVATURE_VIOLATION {
                    report.violations.push(p);
                }
            }
        }
        Ok(report)
    }
}

fn rotate_with(g: &Matrix2<f64>, v: Vec2) -> Vec2 {
    let det = g.determinant();
    let s = det.sqrt();
    Vec2::new(
        -(g[(0, 1)] * v[0] + g[(1, 1)] * v[1]) / s,
        (g[(0, 0)] * v[0] + g[(0, 1)] * v[1]) / s,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn flat_metric_is_identity() {
        let s = MetricSurface::flat();
        let g = s.metric_at(Point2::new(3.0, -7.0)).unwrap();
        assert_eq!(g, Matrix2::identity());
        let c = s.christoffel_at(Point2::new(1.0, 2.0)).unwrap();
        assert_eq!(c, Christoffel::default());
        assert_eq!(s.gaussian_curvature(Point2::new(0.3, 0.1)).unwrap(), 0.0);
    }

    #[test]
    fn cosh_warp_values() {
        let s = MetricSurface::hyperbolic();
        let g0 = s.metric_at(Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(g0, Matrix2::identity());
        let g1 = s.metric_at(Point2::new(1.0, 0.0)).unwrap();
        assert!(close(g1[(1, 1)], 1f64.cosh().powi(2), 1e-14));
        assert!(close(g1[(1, 1)], 2.3810978455418157, 1e-12));
        let c = s.christoffel_at(Point2::new(1.0, 0.0)).unwrap();
        assert!(close(c.gamma[0][1][1], -1.8134302039235093, 1e-12));
        assert!(close(c.gamma[1][0][1], 0.7615941559557649, 1e-12));
        assert_eq!(c.gamma[1][0][1], c.gamma[1][1][0]);
    }

    #[test]
    fn constant_curvature_presets() {
        for (surface, k) in [
            (MetricSurface::hyperbolic(), -1.0),
            (MetricSurface::hyperbolic_scaled(2.0), -4.0),
            (MetricSurface::hyperbolic_scaled(0.5), -0.25),
        ] {
            for x in [-4.0, -1.0, 0.0, 0.5, 3.0] {
                let got = surface.gaussian_curvature(Point2::new(x, 1.0)).unwrap();
                assert!(close(got, k, 1e-13), "{got} vs {k}");
            }
        }
    }

    #[test]
    fn gaussian_bump_curvature_and_connection() {
        let s = MetricSurface::gaussian_bump();
        let p = Point2::new(1.0, 0.0);
        let c = s.christoffel_at(p).unwrap();
        assert!(close(c.gamma[0][0][0], 1.0, 1e-15));
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (0.5, -1.5), (2.0, 2.0)] {
            let k = s.gaussian_curvature(Point2::new(x, y)).unwrap();
            let expected = -2.0 * (-(x * x + y * y)).exp();
            assert!(close(k, expected, 1e-15 + 1e-13 * expected.abs()));
        }
    }

    #[test]
    fn validation_reports() {
        let flat = MetricSurface::flat()
            .validate_nonpositive(Rect::square(5.0), 0.1)
            .unwrap();
        assert_eq!(flat.max_curvature, 0.0);
        assert!(flat.passed());
        assert_eq!(flat.points_checked, 101 * 101);

        let hyp = MetricSurface::hyperbolic()
            .validate_nonpositive(Rect::square(5.0), 0.1)
            .unwrap();
        assert!(close(hyp.max_curvature, -1.0, 1e-12));

        let bump = MetricSurface::gaussian_bump()
            .validate_nonpositive(Rect::square(3.0), 0.1)
            .unwrap();
        assert!(bump.passed());
        assert!(close(bump.max_curvature, -2.0 * (-18f64).exp(), 1e-20));
    }

    #[test]
    fn positive_curvature_is_flagged() {
        // u = -(x² + y²)/2 has Δu = -2, so K = 2e^{x²+y²} > 0
        let s = MetricSurface::Conformal(ConformalPotential {
            terms: vec![
                Monomial {
                    x_power: 2,
                    y_power: 0,
                    coefficient: -0.5,
                },
                Monomial {
                    x_power: 0,
                    y_power: 2,
                    coefficient: -0.5,
                },
            ],
        });
        let report = s.validate_nonpositive(Rect::square(1.0), 0.5).unwrap();
        assert!(!report.passed());
        assert_eq!(report.violations.len(), 25);
    }

    #[test]
    fn bad_step_and_domain_errors() {
        let s = MetricSurface::hyperbolic();
        assert!(matches!(
            s.validate_nonpositive(Rect::square(1.0), 0.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            s.metric_at(Point2::new(1000.0, 0.0)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(MetricSurface::preset("sphere", None), Err(Error::Config(_))));
    }

    #[test]
    fn frame_is_orthonormal() {
        for s in [
            MetricSurface::flat(),
            MetricSurface::hyperbolic(),
            MetricSurface::gaussian_bump(),
        ] {
            let p = Point2::new(0.7, -0.4);
            let (e1, e2) = s.orthonormal_frame(p).unwrap();
            assert!(close(s.inner(p, e1, e1).unwrap(), 1.0, 1e-14));
            assert!(close(s.inner(p, e2, e2).unwrap(), 1.0, 1e-14));
            assert!(close(s.inner(p, e1, e2).unwrap(), 0.0, 1e-14));
            let t = UnitTangent::at_angle(&s, p, 1.1).unwrap();
            assert!(close(t.frame_angle(&s).unwrap(), 1.1, 1e-14));
        }
    }

    #[test]
    fn cosh_polynomial_derivatives() {
        // f = 0.5 + 0.3 cosh(2x) + 0.2 cosh(2x)^3
        let w = WarpProfile {
            rate: 2.0,
            coefficients: vec![0.5, 0.3, 0.0, 0.2],
        };
        let x = 0.37;
        let (f, df, ddf) = w.eval(x);
        let h = 1e-5;
        let fp = w.eval(x + h).0;
        let fm = w.eval(x - h).0;
        assert!(close(df, (fp - fm) / (2.0 * h), 1e-8));
        assert!(close(ddf, (fp - 2.0 * f + fm) / (h * h), 1e-4));
    }
}
