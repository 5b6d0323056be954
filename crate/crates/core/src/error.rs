use thiserror::Error;

/// Errors raised by instance evaluation, the solvers and the rate checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DcError {
    #[error("point {x:?} lies outside the instance domain [{lower}, {upper}]")]
    OutOfDomain { x: Vec<f64>, lower: f64, upper: f64 },

    #[error(
        "x = {x} lies below the last constructed knot {last_knot}; rebuild with a larger horizon"
    )]
    HorizonExceeded { x: f64, last_knot: f64 },

    #[error("dimension mismatch: instance has dimension {expected}, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate in point {0:?}")]
    NonFinite(Vec<f64>),

    #[error(
        "subproblem residual {residual:e} above tolerance {tol:e} after {iterations} iterations"
    )]
    SubproblemFailure {
        residual: f64,
        tol: f64,
        iterations: usize,
    },

    #[error("zero-length step at iteration {k} while the gradient norm {grad_norm:e} is above tolerance")]
    Stagnation { k: usize, grad_norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("trajectory too short: need {needed} records, have {have}")]
    TrajectoryTooShort { needed: usize, have: usize },
}

pub type Result<T, E = DcError> = std::result::Result<T, E>;
