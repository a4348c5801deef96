use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown algebra `{0}`")]
    UnknownAlgebra(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range {min}..={max}")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("exponent {exponent} has a denominator not dividing {root}")]
    ExponentDenominator { exponent: String, root: u64 },

    #[error("no finite decay constant: monomial (1+r^2)^{exponent} at {indices:?} decays slower than (1+r^2)^-1")]
    UnboundedMonomial { exponent: String, indices: Vec<usize> },

    #[error("degree mismatch: {0}")]
    Degree(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
