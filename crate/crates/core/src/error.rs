use thiserror::Error;

/// Errors raised by the geometric and dynamical operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("component {index} = {value:e} is below the boundary floor {floor:e}")]
    Boundary { index: usize, value: f64, floor: f64 },

    #[error("invalid parameter grid: {0}")]
    Grid(String),

    #[error("length stopped decreasing after {iterations} iterations (last length {length})")]
    Convergence { iterations: usize, length: f64 },

    #[error("extension matrix is not admissible: |G A G^-1 - A^T| = {0:e}")]
    Admissibility(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("metric is not positive definite: {0}")]
    SingularMetric(String),

    #[error("matrix is not Hermitian: |M - M^H| = {0:e}")]
    Hermitian(f64),

    #[error("matrix is not symmetric: |N - N^T| = {0:e}")]
    Symmetric(f64),

    #[error("implicit midpoint solve did not converge at step {step} (increment {increment:e})")]
    Nonconvergence { step: usize, increment: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
