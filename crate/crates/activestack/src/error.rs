//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("negative prediction in {context}: {value}")]
    NegativePrediction { context: String, value: f64 },

    #[error("reference heart rate must be positive, found {value} at trial {trial}")]
    NonPositiveReference { trial: usize, value: f64 },

    #[error("empty input: {context}")]
    EmptyInput { context: String },

    #[error("{what} out of range: {value} not in [{min}, {max}]")]
    OutOfRange {
        what: String,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing table cell: subject {subject}, strategy {strategy}, K={k}")]
    MissingCell {
        subject: String,
        strategy: String,
        k: usize,
    },

    #[error("label oracle failure at trial {trial}: {message}")]
    Oracle { trial: usize, message: String },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }

    pub(crate) fn empty(context: impl Into<String>) -> Self {
        Error::EmptyInput {
            context: context.into(),
        }
    }
}
