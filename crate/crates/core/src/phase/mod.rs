//! Distance phase functions between a curve and its image under an isometry.

pub mod critical;
pub mod curve;
pub mod field;
pub mod isometry;

pub use critical::{classify_critical, find_critical_points, Classification, CriticalReport, CriticalSearch};
pub use curve::{CurveJet, CurveKind, ParamCurve};
pub use field::{ParamWindow, PhaseField, PhaseHessian, PlacedCurve, PureSecond};
pub use isometry::Isometry;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geodesic::ShootOptions;
use crate::metric::MetricSurface;

/// Names of the built-in configurations accepted by [`shipped`].
pub const SHIPPED: [&str; 5] = [
    "flat-parallel-lines",
    "flat-circle-translate",
    "hyperbolic-axis-yshift6",
    "hyperbolic-parabola",
    "flat-offset-lines",
];

fn line(surface: &MetricSurface, point: [f64; 2], direction: [f64; 2]) -> Result<ParamCurve> {
    ParamCurve::unit_speed(surface, CurveKind::Line { point, direction })
}

/// Built-in phase configurations:
///
/// * `flat-parallel-lines`: `y = 0` against its translate by `(0, 2)`; the
///   critical set is the whole diagonal.
/// * `flat-circle-translate`: the unit circle against its translate by `(4, 0)`.
/// * `hyperbolic-axis-yshift6`: the `x`-axis of the `cosh` warped product
///   against its shift by 6.
/// * `hyperbolic-parabola`: `y = 0.3 x²` on the same surface against its shift by 2.
/// * `flat-offset-lines`: `y = 0` against its translate by `(10, 2)`; no
///   critical points over the window.
pub fn shipped(name: &str) -> Result<PhaseField> {
    let opts = ShootOptions::default();
    match name {
        "flat-parallel-lines" => {
            let s = MetricSurface::flat();
            let base = line(&s, [0.0, 0.0], [1.0, 0.0])?;
            PhaseField::deck(
                &s,
                base,
                Isometry::translation(0.0, 2.0),
                ParamWindow::square(-3.0, 3.0),
                opts,
            )
        }
        "flat-circle-translate" => {
            let s = MetricSurface::flat();
            let base = ParamCurve::unit_speed(
                &s,
                CurveKind::Circle {
                    center: [0.0, 0.0],
                    radius: 1.0,
                },
            )?;
            let window = ParamWindow::new((0.0, 2.0 * PI), (-PI, PI));
            PhaseField::deck(&s, base, Isometry::translation(4.0, 0.0), window, opts)
        }
        "hyperbolic-axis-yshift6" => {
            let s = MetricSurface::hyperbolic();
            let base = line(&s, [0.0, 0.0], [1.0, 0.0])?;
            PhaseField::deck(&s, base, Isometry::y_shift(6.0), ParamWindow::square(-2.0, 2.0), opts)
        }
        "hyperbolic-parabola" => {
            let s = MetricSurface::hyperbolic();
            let base = ParamCurve::new(
                &s,
                CurveKind::Graph {
                    coefficients: vec![0.0, 0.0, 0.3],
                },
                true,
                (-3.0, 3.0),
            )?;
            PhaseField::deck(&s, base, Isometry::y_shift(2.0), ParamWindow::square(-1.5, 1.5), opts)
        }
        "flat-offset-lines" => {
            let s = MetricSurface::flat();
            let base = line(&s, [0.0, 0.0], [1.0, 0.0])?;
            PhaseField::deck(
                &s,
                base,
                Isometry::translation(10.0, 2.0),
                ParamWindow::square(-1.0, 1.0),
                opts,
            )
        }
        other => Err(Error::Config(format!(
            "unknown phase configuration '{other}' (expected one of {})",
            SHIPPED.join(", ")
        ))),
    }
}
