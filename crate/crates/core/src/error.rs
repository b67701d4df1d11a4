use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("output budget exceeded: {what} would produce more than {cap} items")]
    BudgetExceeded { what: &'static str, cap: usize },

    #[error("partition of length {length} does not fit in {n} variables")]
    TooLong { length: usize, n: usize },

    #[error("particle count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square with even dimension (got {rows}x{cols})")]
    NotEvenSquare { rows: usize, cols: usize },

    #[error("matrix is not skew-symmetric (max |A + A^T| = {defect:e})")]
    NotSkew { defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation did not converge: tail bound {tail:e} exceeds tolerance {tol:e}")]
    TruncationTooCoarse { tail: f64, tol: f64 },

    #[error("schur-sum evaluation unavailable: {0}")]
    SchurUnavailable(String),

    #[error("lemma hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("training aborted: {0}")]
    Training(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
