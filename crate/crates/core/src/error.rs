use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("dihedral reduction requires p1 = p2")]
    GroupNotAllowed,

    /// Boundary parameters outside the handled reducible cases.
    #[error("unsupported boundary parameters: {0}")]
    UnsupportedBoundary(String),

    /// The chain has no unique stationary distribution for the requested game.
    #[error("chain is not ergodic: {0}")]
    NonErgodic(String),

    #[error("row {row} of a stochastic matrix sums to {sum}")]
    NonStochastic { row: usize, sum: f64 },

    #[error("stationary solver failed ({method}): residual {residual:e} after {iterations} iterations")]
    SolverFailure {
        method: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("closed form denominator vanishes")]
    ZeroDenominator,
}
