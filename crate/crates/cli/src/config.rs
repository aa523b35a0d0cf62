//! Experiment configuration: one JSON file, every key optional, unknown keys rejected.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use geocirc_core::metric::{ConformalPotential, Monomial, WarpProfile};
use geocirc_core::oscillatory::Window;
use geocirc_core::phase::{CurveKind, Isometry, ParamWindow};
use geocirc_core::{MetricSurface, Point2, Rect, UnitTangent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Flat {},
    Hyperbolic {},
    HyperbolicA {
        rate: f64,
    },
    GaussianBump {},
    /// `f(x) = Σ c_k cosh(rate · x)^k`.
    WarpedCoshPoly {
        rate: f64,
        coefficients: Vec<f64>,
    },
    /// `u(x, y) = Σ c x^i y^j`.
    ConformalPoly {
        terms: Vec<Monomial>,
    },
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        SurfaceSpec::Hyperbolic {}
    }
}

impl SurfaceSpec {
    /// Parses the `--surface NAME[:RATE]` flag.
    pub fn from_flag(flag: &str) -> Result<Self, Failure> {
        let (name, param) = match flag.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (flag, None),
        };
        let rate = param
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Failure::Config(format!("bad surface parameter '{p}'")))
            })
            .transpose()?;
        match (name, rate) {
            ("flat", None) => Ok(SurfaceSpec::Flat {}),
            ("hyperbolic", None) => Ok(SurfaceSpec::Hyperbolic {}),
            ("gaussian-bump", None) => Ok(SurfaceSpec::GaussianBump {}),
            ("hyperbolic-a", Some(rate)) => Ok(SurfaceSpec::HyperbolicA { rate }),
            ("hyperbolic-a", None) => Err(Failure::Config(
                "--surface hyperbolic-a needs a rate, e.g. hyperbolic-a:2".into(),
            )),
            ("warped-cosh-poly" | "conformal-poly", _) => Err(Failure::Config(format!(
                "surface family '{name}' takes coefficients; set it in the config file"
            ))),
            (other, _) => Err(Failure::Config(format!(
                "unknown surface '{other}' (expected flat, hyperbolic, hyperbolic-a:RATE or gaussian-bump)"
            ))),
        }
    }

    pub fn build(&self) -> Result<MetricSurface, Failure> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Failure::Config(format!("{what} must be positive, got {v}")))
            }
        };
        Ok(match self {
            SurfaceSpec::Flat {} => MetricSurface::flat(),
            SurfaceSpec::Hyperbolic {} => MetricSurface::hyperbolic(),
            SurfaceSpec::HyperbolicA { rate } => MetricSurface::hyperbolic_scaled(positive("rate", *rate)?),
            SurfaceSpec::GaussianBump {} => MetricSurface::gaussian_bump(),
            SurfaceSpec::WarpedCoshPoly { rate, coefficients } => {
                if coefficients.is_empty() {
                    return Err(Failure::Config(
                        "warped-cosh-poly needs at least one coefficient".into(),
                    ));
                }
                MetricSurface::WarpedProduct(WarpProfile {
                    rate: positive("rate", *rate)?,
                    coefficients: coefficients.clone(),
                })
            }
            SurfaceSpec::ConformalPoly { terms } => {
                MetricSurface::Conformal(ConformalPotential { terms: terms.clone() })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Validation {
    /// Curvature is checked on `[-half_width, half_width]²`.
    pub half_width: f64,
    pub step: f64,
}

impl Default for Validation {
    fn default() -> Self {
        Self {
            half_width: 3.0,
            step: 0.1,
        }
    }
}

/// A unit tangent given by base point and angle in the orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentSpec {
    pub point: [f64; 2],
    pub angle: f64,
}

/// Explicit tangents followed by seeded random ones (base in `[-1, 1]²`).
pub fn tangent_list(
    surface: &MetricSurface,
    explicit: &[TangentSpec],
    random: usize,
    seed: u64,
) -> Result<Vec<(TangentSpec, UnitTangent)>, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn = (0..random).map(|_| TangentSpec {
        point: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        angle: rng.gen_range(0.0..TAU),
    });
    explicit
        .iter()
        .copied()
        .chain(drawn.collect::<Vec<_>>())
        .map(|spec| {
            let v = UnitTangent::at_angle(surface, Point2::new(spec.point[0], spec.point[1]), spec.angle)
                .map_err(|e| Failure::Config(format!("tangent {spec:?}: {e}")))?;
            Ok((spec, v))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurvatureKConfig {
    pub tangents: Vec<TangentSpec>,
    pub random_tangents: usize,
    pub s_max: f64,
    pub step: f64,
    pub richardson: bool,
}

impl Default for CurvatureKConfig {
    fn default() -> Self {
        Self {
            tangents: Vec::new(),
            random_tangents: 20,
            s_max: 20.0,
            step: 1e-3,
            richardson: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircleConfig {
    pub tangents: Vec<TangentSpec>,
    pub random_tangents: usize,
    pub radii: Vec<f64>,
    pub step: f64,
    /// Radii over which the Riccati residual of the circle curvature is measured.
    pub riccati_range: (f64, f64),
    /// `s_max` for the asymptotic curvature at the circle point and its Riccati residual.
    pub s_max: f64,
    pub asymptotic_step: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        Self {
            tangents: Vec::new(),
            random_tangents: 5,
            radii: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            step: 1e-3,
            riccati_range: (0.5, 8.0),
            s_max: 200.0,
            asymptotic_step: 1e-2,
        }
    }
}

/// A phase configuration: a shipped name, or a curve with an isometry on the
/// configured surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseSpec {
    Named(String),
    Custom(CustomPhase),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomPhase {
    pub name: String,
    pub curve: CurveKind,
    #[serde(default = "default_domain")]
    pub domain: (f64, f64),
    pub isometry: Isometry,
    pub window: ParamWindow,
}

fn default_domain() -> (f64, f64) {
    (-10.0, 10.0)
}

impl PhaseSpec {
    pub fn name(&self) -> &str {
        match self {
            PhaseSpec::Named(n) => n,
            PhaseSpec::Custom(c) => &c.name,
        }
    }
}

/// A λ-sweep of the two-dimensional oscillatory integral over one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub config: String,
    pub window_s: Window,
    pub window_t: Window,
    pub lambda: LambdaRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub configs: Vec<PhaseSpec>,
    pub grid: usize,
    pub newton_tol: f64,
    pub epsilon: f64,
    /// Points per axis of the heatmap written with `--dump`.
    pub heatmap: usize,
    pub sweeps: Vec<SweepConfig>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            configs: geocirc_core::phase::SHIPPED
                .iter()
                .map(|s| PhaseSpec::Named(s.to_string()))
                .collect(),
            grid: 16,
            newton_tol: 1e-10,
            epsilon: 0.5,
            heatmap: 41,
            sweeps: Vec::new(),
        }
    }
}

/// Inclusive range `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl LambdaRange {
    /// Parses `a:b:c`.
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Failure::Config(format!("bad lambda range '{text}' (expected start:stop:step)"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        Ok(Self {
            start: nums[0],
            stop: nums[1],
            step: nums[2],
        })
    }

    pub fn values(&self) -> Result<Vec<f64>, Failure> {
        if !(self.start > 0.0 && self.step > 0.0 && self.stop >= self.start) || !self.stop.is_finite() {
            return Err(Failure::Config(format!(
                "lambda range needs 0 < start <= stop and step > 0, got {}:{}:{}",
                self.start, self.stop, self.step
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusCurve {
    /// The unit circle about the origin.
    Circle,
    /// The `x`-axis, a closed geodesic of the square torus.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusMode {
    /// The single mode `(λ, 0)`.
    X,
    /// The single mode `(0, λ)`.
    Y,
    /// Seeded random coefficients over every mode with `|m| = λ`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusConfig {
    pub curve: TorusCurve,
    pub mode: TorusMode,
    pub lambda: LambdaRange,
    pub window: Window,
    /// Multiple of the minimum node count.
    pub nodes_factor: usize,
}

impl Default for TorusConfig {
    fn default() -> Self {
        Self {
            curve: TorusCurve::Circle,
            mode: TorusMode::X,
            lambda: LambdaRange {
                start: 10.0,
                stop: 200.0,
                step: 10.0,
            },
            window: Window::closed(0.0, TAU),
            nodes_factor: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub surface: SurfaceSpec,
    pub seed: u64,
    pub validation: Validation,
    pub curvature_k: CurvatureKConfig,
    pub circle: CircleConfig,
    pub phase: PhaseConfig,
    pub torus_decay: TorusConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }

    /// Builds the surface and refuses it unless its curvature is nonpositive
    /// on the validation grid.
    pub fn checked_surface(&self) -> Result<MetricSurface, Failure> {
        let surface = self.surface.build()?;
        let region = Rect::square(self.validation.half_width);
        let report = surface
            .validate_nonpositive(region, self.validation.step)
            .map_err(|e| Failure::Config(format!("surface validation: {e}")))?;
        if !report.passed() {
            return Err(Failure::Config(format!(
                "surface has positive curvature (max K = {:.3e}) at {} grid points, first at {:?}",
                report.max_curvature,
                report.violations.len(),
                report.violations[0]
            )));
        }
        Ok(surface)
    }
}
