use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violates its invariants or an operation's preconditions.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An iterative method failed or a computation produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A surface chain could not be formed or is not closed.
    #[error("topology error: {0}")]
    Topology(String),

    #[error("mesh error: cell {cell} in block {block} has non-positive area {area:e}")]
    DegenerateCell { cell: usize, block: usize, area: f64 },

    /// Malformed, inconsistent or empty data.
    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    /// True for failures of numerical procedures rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::Topology(_) | Error::DegenerateCell { .. }
        )
    }
}
