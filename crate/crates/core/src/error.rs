use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("validation and test series differ in length ({val} vs {test})")]
    LengthMismatch { val: usize, test: usize },

    #[error("non-finite score at position {0}")]
    NonFinite(usize),

    #[error(
        "inconsistent oracle: oracle minimum {oracle} exceeds observed test minimum {observed}"
    )]
    InconsistentOracle { oracle: f64, observed: f64 },

    #[error("empty subsample: floor({fraction} * {len}) < 1")]
    EmptySubsample { fraction: f64, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("duplicate run key {key}: rows {first} and {second}")]
    DuplicateRun {
        key: String,
        first: String,
        second: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    /// Coarse classification used by front ends to pick an exit status.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            Error::InvalidArgument(_) | Error::EmptySubsample { .. } => ErrorKind::Argument,
            _ => ErrorKind::Schema,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Schema,
    Argument,
}

pub type Result<T> = std::result::Result<T, Error>;
