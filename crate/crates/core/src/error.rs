use std::io;

use thiserror::Error;

/// Errors produced by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input text could not be tokenized or converted (line numbers are 1-based).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An argument or data structure violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A weighting normalizer came out zero or undefined for the training set.
    #[error("degenerate normalizer: {0}")]
    DegenerateNormalizer(String),

    /// A manifest or run configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterative solver hit its iteration cap before reaching tolerance.
    #[error("convergence failure: {message} (residual {residual:.6e})")]
    Convergence { message: String, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
