use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum EdrError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |X - X^dagger| = {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("conditioning outcome has probability {probability:e}; weak value undefined")]
    UndefinedConditioning { probability: f64 },

    #[error("probe strength {0:e} is too small to invert")]
    VanishingStrength(f64),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, EdrError>;

impl EdrError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        EdrError::Dimension(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        EdrError::InvalidInput(msg.into())
    }
}
