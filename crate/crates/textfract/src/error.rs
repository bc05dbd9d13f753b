use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by pipeline stage so callers (in particular the CLI)
/// can distinguish data problems from numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("text cleaning error: {0}")]
    Clean(String),

    #[error("tokenization/tagging error: {0}")]
    Tag(String),

    #[error("series construction error: {0}")]
    Series(String),

    #[error("topic model error: {0}")]
    Topics(String),

    #[error("fractal analysis error: {0}")]
    Fractal(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("classification error: {0}")]
    Classify(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or missing input data.
    Data,
    /// Numerical failure (degenerate series, non-convergence, ...).
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_)
            | Error::Manifest(_)
            | Error::Clean(_)
            | Error::Tag(_)
            | Error::Series(_) => ErrorClass::Data,
            Error::Topics(_) | Error::Fractal(_) | Error::Stats(_) | Error::Classify(_) => {
                ErrorClass::Numerical
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
