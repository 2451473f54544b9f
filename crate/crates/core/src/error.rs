use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planning library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input value violated a documented precondition or invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quantity left the mathematical domain of a formula (e.g. a
    /// non-positive distance fed to a logarithmic path-loss model).
    #[error("domain error: {0}")]
    Domain(String),

    /// A position fell outside the extent of a coverage-map raster.
    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    /// A file could not be read or written.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file was readable but did not match its schema.
    #[error("parse error in {path}{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },

    /// The gain-map directory is missing files for some candidate indices.
    #[error("missing gain map files for candidate indices {0:?}")]
    MissingMaps(Vec<usize>),

    /// An operation that requires a feasible placement was handed an
    /// infeasible one.
    #[error("placement is infeasible: uncovered end devices {0:?}")]
    InfeasiblePlacement(Vec<usize>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        line: Option<usize>,
        msg: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
