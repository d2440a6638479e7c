use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class. Callers (the CLI in particular) map these onto
/// exit codes, so every variant of [`Error`] belongs to exactly one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Malformed input data or a violated caller-side contract.
    Input,
    /// Filesystem or stream failure.
    Io,
    /// A broken internal invariant; always a bug.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed line in a text input (vertex file, edge list, seed list).
    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: u64,
        msg: String,
    },

    /// An edge endpoint that does not fit the declared node count.
    #[error("{source_name}:{line}: node id {id} out of range (node count {node_count})")]
    NodeRange {
        source_name: String,
        line: u64,
        id: u64,
        node_count: u64,
    },

    /// A binary artifact that is not what its header claims.
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    /// Caller violated an operation precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Quality functions are undefined on graphs without edges.
    #[error("degenerate graph: no edges (m = 0)")]
    DegenerateGraph,

    /// A host string that cannot be normalized into a domain name.
    #[error("cannot normalize host {input:?}: {msg}")]
    Normalize { input: String, msg: String },

    /// No seed resolved against the vertex table; nothing anchors a community.
    #[error("none of the {attempted} seed domains resolved against the vertex table")]
    NoSeedsResolved { attempted: usize },

    #[error("{}: {source}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<stream>".into()))]
    Io {
        path: Option<PathBuf>,
        #[source]
        source: io::Error,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Parse { .. }
            | Error::NodeRange { .. }
            | Error::Format { .. }
            | Error::Contract(_)
            | Error::DegenerateGraph
            | Error::Normalize { .. }
            | Error::NoSeedsResolved { .. } => Category::Input,
            Error::Io { .. } => Category::Io,
            Error::Internal(_) => Category::Internal,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: Some(path.into()),
            source,
        }
    }
}

impl From<io::Error> for Error {
    fn from(source: io::Error) -> Self {
        Error::Io { path: None, source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
