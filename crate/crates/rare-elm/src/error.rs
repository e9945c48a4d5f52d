use thiserror::Error;

/// Failures raised by samplers, estimators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible support: {0}")]
    Infeasible(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("disconnected support: densities split into components {0:?}")]
    Disconnected(Vec<Vec<usize>>),

    #[error("sample {column} has zero weight under every density")]
    UnsupportedPoint { column: usize },

    #[error("infeasible constraints: {0}")]
    InfeasibleConstraints(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("degenerate estimate: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
