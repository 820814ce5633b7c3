use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// All errors surfaced by this crate.
///
/// Variants are grouped by how the command-line driver maps them to exit
/// codes: configuration problems exit with 1, data problems with 2, and
/// numerical failures with 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Failure reading or writing a file.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A corpus, parameter, or universe file that does not follow its
    /// format. `line` is 1-based; 0 means the file as a whole.
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    /// Invariant violation in in-memory data (duplicate feature names,
    /// out-of-range indices, non-finite values, and the like).
    #[error("invalid data: {message}")]
    InvalidData { message: String },

    /// Rejected configuration value (tolerances, fold counts, schedules).
    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },

    /// A parameter vector whose length does not match the feature catalog.
    #[error("parameter vector has {got} entries but the catalog has {expected} features")]
    CatalogMismatch { expected: usize, got: usize },

    /// A universe too large to enumerate.
    #[error("universe has {size} analyses, above the enumeration cap of {cap}")]
    UniverseTooLarge { size: usize, cap: usize },

    /// A corpus parse that does not appear in the finite universe it is
    /// being scored against.
    #[error("sentence {sentence:?} has a parse that is not in the universe")]
    AnalysisNotInUniverse { sentence: String },

    /// An objective or gradient evaluated to a non-finite value.
    #[error("numerical failure: {message}")]
    NonFinite { message: String },

    /// A line search that could not make progress or bracket a maximum.
    #[error("line search failed: {message}")]
    LineSearch { message: String },
}

impl Error {
    /// Process exit code for this error: 1 for usage/configuration, 2 for
    /// data problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. } => 1,
            Error::Io { .. }
            | Error::Format { .. }
            | Error::InvalidData { .. }
            | Error::CatalogMismatch { .. }
            | Error::UniverseTooLarge { .. }
            | Error::AnalysisNotInUniverse { .. } => 2,
            Error::NonFinite { .. } | Error::LineSearch { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn data(message: impl Into<String>) -> Self {
        Error::InvalidData {
            message: message.into(),
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            message: message.into(),
        }
    }
}
