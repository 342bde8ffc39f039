use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("image has a zero dimension ({width}x{height})")]
    ZeroDimension { width: usize, height: usize },

    #[error("{dimension} {size} is not divisible by {divisor}")]
    NotDivisible {
        dimension: &'static str,
        size: usize,
        divisor: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("image too small: {0}")]
    TooSmall(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("row {row} has zero norm")]
    ZeroNorm { row: usize },

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("class `{label}` has {count} entries, at least 2 are required")]
    ClassTooSmall { label: String, count: usize },

    #[error("malformed {what}: {message}")]
    Parse { what: &'static str, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: &'static str, message: impl Into<String>) -> Self {
        Error::Parse {
            what,
            message: message.into(),
        }
    }
}
