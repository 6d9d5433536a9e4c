//! Crate-wide error type.
//!
//! Variants are grouped by how the command-line tool maps them to exit
//! codes: anything wrong with *input data* (I/O, parse errors, malformed
//! graphs or labels) is distinct from anything wrong with *requested
//! parameters* (bag counts, fold counts, probability ranges).

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Failure reading or writing a file.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed content at a specific line of an input file.
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// Structurally invalid input data (duplicate edges, self-loops,
    /// unknown vertex references, mismatched universes, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A requested parameter is outside its domain (bag count of zero,
    /// sampling fraction above one, fewer than two folds, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was called on a value outside its domain (empty label
    /// set, vertex set from a different universe, ...).
    #[error("{0}")]
    Domain(String),

    /// Exact integer arithmetic would overflow the supported range.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A truth vector contains only one class, so a ROC curve is undefined.
    /// Cross-validation treats folds failing this way as skipped rather
    /// than fatal.
    #[error("degenerate truth vector: {0}")]
    SingleClass(String),

    /// An evaluation produced no usable folds at all.
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

impl Error {
    /// Process exit code used by the command-line tool: `2` for bad input
    /// data, `3` for bad configuration or an evaluation that cannot be
    /// carried out.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } | Error::InvalidInput(_) => 2,
            Error::InvalidConfig(_)
            | Error::Domain(_)
            | Error::Capacity(_)
            | Error::SingleClass(_)
            | Error::Evaluation(_) => 3,
        }
    }

    /// Wraps an I/O failure with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            reason: reason.into(),
        }
    }
}
