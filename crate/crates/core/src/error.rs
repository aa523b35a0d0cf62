use thiserror::Error;

/// Errors raised by the geometric and oscillatory solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite evaluation at ({x}, {y}): {what}")]
    Domain { x: f64, y: f64, what: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shooting did not converge after {iterations} iterations (endpoint error {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("radius {radius} is too small for integrator step {step}")]
    RadiusTooSmall { radius: f64, step: f64 },

    #[error("parameter {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("map is not an isometry of the surface (pullback defect {defect:.3e})")]
    NotAnIsometry { defect: f64 },

    #[error("curves come within {separation:.3e} of each other")]
    CurvesIntersect { separation: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("quadrature under-resolved: node doubling changed the value by {change:.3e}")]
    UnderResolved { change: f64 },

    #[error("{nodes} quadrature nodes is below the floor of {required}")]
    InsufficientNodes { nodes: usize, required: usize },

    #[error("decay fit needs positive magnitudes, got {value} at lambda = {lambda}")]
    NonPositiveMagnitude { lambda: f64, value: f64 },

    #[error("decay fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),

    #[error("invalid eigenfunction: {0}")]
    Eigenfunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
