use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The graph violates a structural precondition (e.g. a vertex without
    /// out-neighbors where the dynamics need one).
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Power iteration ran out of iterations. Carries the last iterate so the
    /// caller can still inspect it.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    /// All inputs to 2-clustering were identical.
    #[error("degenerate input: all values are identical")]
    Degenerate,

    #[error("malformed file {path:?}: {message}")]
    Format { path: PathBuf, message: String },

    /// Failure while computing one point of an experiment grid.
    #[error("grid point {point_id}: {source}")]
    Point {
        point_id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn graph(msg: impl Into<String>) -> Self {
        Error::InvalidGraph(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    /// The underlying error, looking through [`Error::Point`] context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Point { source, .. } => source.root(),
            other => other,
        }
    }
}
