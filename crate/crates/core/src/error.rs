use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed file at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("unsupported bit depth: maxval {0} exceeds 255")]
    UnsupportedDepth(u32),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate dimensions: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    /// True for errors caused by bad input data or parameters rather than
    /// the environment.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Format { .. }
                | Error::UnsupportedDepth(_)
                | Error::Shape { .. }
                | Error::Parameter(_)
                | Error::Dimension(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::Serialization(format!("{other:?}")),
            }
        } else {
            Error::Serialization(e.to_string())
        }
    }
}
