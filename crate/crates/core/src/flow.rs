//! Fixed-step RK4 for the geodesic equation augmented with a fundamental
//! pair of scalar Jacobi solutions.
//!
//! State layout: `[x, y, ẋ, ẏ, a, a', b, b']` where `a(0) = 1, a'(0) = 0`
//! and `b(0) = 0, b'(0) = 1` solve `y'' + K y = 0` along the geodesic.

use crate::error::{Error, Result};
use crate::metric::{MetricSurface, Point2, Vec2};

pub(crate) type FlowState = [f64; 8];

/// Rescale the Jacobi pair once it exceeds this magnitude. The factor is a
/// power of two so rescaling is exact.
const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BY: f64 = f64::from_bits((1023u64 - 500) << 52);

pub(crate) fn initial_state(pos: Point2, vel: Vec2) -> FlowState {
    [pos.x, pos.y, vel.x, vel.y, 1.0, 0.0, 0.0, 1.0]
}

pub(crate) fn position(s: &FlowState) -> Point2 {
    Point2::new(s[0], s[1])
}

pub(crate) fn velocity(s: &FlowState) -> Vec2 {
    Vec2::new(s[2], s[3])
}

fn rhs(surface: &MetricSurface, s: &FlowState) -> Result<FlowState> {
    let local = surface.local(position(s))?;
    let v = velocity(s);
    let acc = -local.christoffel.contract(v, v);
    let k = local.curvature;
    Ok([v.x, v.y, acc.x, acc.y, s[5], -k * s[4], s[7], -k * s[6]])
}

fn axpy(y: &FlowState, h: f64, k: &FlowState) -> FlowState {
    let mut out = *y;
    for i in 0..8 {
        out[i] += h * k[i];
    }
    out
}

pub(crate) fn rk4_step(surface: &MetricSurface, y: &FlowState, h: f64) -> Result<FlowState> {
    let k1 = rhs(surface, y)?;
    let k2 = rhs(surface, &axpy(y, 0.5 * h, &k1))?;
    let k3 = rhs(surface, &axpy(y, 0.5 * h, &k2))?;
    let k4 = rhs(surface, &axpy(y, h, &k3))?;
    let mut out = *y;
    for i in 0..8 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain {
            x: out[0],
            y: out[1],
            what: "geodesic integration produced a non-finite state",
        });
    }
    // project back onto the unit tangent bundle
    let speed = surface.norm(position(&out), velocity(&out))?;
    out[2] /= speed;
    out[3] /= speed;
    Ok(out)
}

/// Number of steps and the adjusted step so that `n · h = length` exactly.
pub(crate) fn step_count(length: f64, step: f64, multiple: usize) -> (usize, f64) {
    let raw = (length / step - 1e-9).ceil().max(1.0) as usize;
    let n = raw.div_ceil(multiple) * multiple;
    (n, length / n as f64)
}

/// Keeps the Jacobi pair inside floating-point range. Ratios are unaffected.
/// Returns the factor applied (1 when nothing changed).
pub(crate) fn rescale_pair(s: &mut FlowState) -> f64 {
    let m = s[4].abs().max(s[5].abs()).max(s[6].abs()).max(s[7].abs());
    if m > RESCALE_ABOVE {
        for v in &mut s[4..8] {
            *v *= RESCALE_BY;
        }
        RESCALE_BY
    } else {
        1.0
    }
}

/// Coordinate scale `|a x|` past which [`recenter`] moves the geodesic back
/// to the origin of a constant-curvature chart.
const RECENTER_BEYOND: f64 = 16.0;

/// Replaces the geodesic part of the state by its image under an isometry
/// when the chart is about to overflow. Only for flows whose positions are
/// not recorded.
pub(crate) fn recenter(surface: &MetricSurface, s: &mut FlowState) {
    if let Some((p, v)) = surface.recenter(position(s), velocity(s), RECENTER_BEYOND) {
        s[0] = p.x;
        s[1] = p.y;
        s[2] = v.x;
        s[3] = v.y;
    }
}

/// Integrates `n` steps of size `h`, calling `visit(i, r, state)` at every
/// sample including the initial one. `visit` may modify the Jacobi pair.
pub(crate) fn integrate<F>(
    surface: &MetricSurface,
    start: FlowState,
    n: usize,
    h: f64,
    mut visit: F,
) -> Result<FlowState>
where
    F: FnMut(usize, f64, &mut FlowState),
{
    let mut state = start;
    visit(0, 0.0, &mut state);
    for i in 1..=n {
        state = rk4_step(surface, &state, h)?;
        visit(i, i as f64 * h, &mut state);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_factor_is_exact_power_of_two() {
        assert_eq!(RESCALE_BY, 2f64.powi(-500));
        let mut s = [0.0, 0.0, 1.0, 0.0, 3e200, 1e200, 2e200, 5e199];
        let ratio = s[4] / s[6];
        assert_eq!(rescale_pair(&mut s), RESCALE_BY);
        assert!(s[4] < 1e60);
        assert_eq!(rescale_pair(&mut s), 1.0);
        assert_eq!(s[4] / s[6], ratio);
    }

    #[test]
    fn step_count_hits_length() {
        let (n, h) = step_count(5.0, 1e-3, 1);
        assert_eq!(n, 5000);
        assert!((n as f64 * h - 5.0).abs() < 1e-12);
        let (n, _) = step_count(1.0001, 1e-3, 4);
        assert_eq!(n % 4, 0);
        assert!(n >= 1001);
    }
}
