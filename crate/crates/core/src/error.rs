use thiserror::Error;

/// Errors produced by every layer of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("retraction is undefined at a zero entry (index {index})")]
    RetractionSingular { index: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("cannot normalize a matrix with zero Frobenius norm ({0})")]
    Normalization(String),

    #[error("quadratic form has imaginary part {imag:e}; matrix is not Hermitian")]
    HermitianViolation { imag: f64 },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(what: impl Into<String>) -> Self {
        Error::Dimension(what.into())
    }
}
