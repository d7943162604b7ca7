use thiserror::Error;

/// Errors raised by the solvers, analysis routines and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("row {0} of the coefficient matrix has zero norm")]
    ZeroRow(usize),

    #[error("matrix is numerically rank deficient (pivot {pivot:e} <= tolerance {tol:e})")]
    RankDeficient { pivot: f64, tol: f64 },

    #[error("step size {alpha} outside the admissible interval (0, {upper})")]
    StepSize { alpha: f64, upper: f64 },

    #[error("relaxation parameter {0} outside [0, 1]")]
    Theta(f64),

    #[error("equation is inconsistent: relative residual {0:e}")]
    Inconsistent(f64),

    #[error("iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("size guard exceeded: {0}")]
    TooLarge(String),

    #[error("residual is zero")]
    ZeroResidual,

    #[error("matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
