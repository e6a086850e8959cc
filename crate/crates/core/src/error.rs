use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("order must be even and positive, got {0}")]
    InvalidOrder(usize),

    #[error("index {index} outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("multinomial coefficient overflows u64 for exponent {0:?}")]
    Overflow(Vec<u32>),

    #[error("polynomial is not homogeneous of degree {0}")]
    NotHomogeneous(usize),

    #[error("polynomial degree {degree} exceeds the declared degree {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("diagonal entry {index} equals {value}, below the clamping tolerance")]
    NegativeDiagonal { index: usize, value: f64 },

    #[error("gram matrix has eigenvalue {0:e} beyond the clamping threshold")]
    BadGram(f64),

    #[error("malformed semidefinite program: {0}")]
    MalformedSdp(String),

    #[error("numerically singular: {0}")]
    Singular(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
