use std::path::PathBuf;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad parameters or configuration supplied by the caller.
    Config,
    /// Malformed or inconsistent input data.
    Data,
    /// An internal invariant failed (diverged training, corrupted state).
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("label is empty after normalization")]
    EmptyLabel,

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(NodeId),

    #[error("edge ({u}, {v}) has an endpoint outside the view's vertex set")]
    EdgeOutsideView { u: NodeId, v: NodeId },

    #[error("edge ({u}, {v}) is not present in the parent graph")]
    EdgeNotInGraph { u: NodeId, v: NodeId },

    #[error("edge ({u}, {v}) must join two trial nodes")]
    NotTrialEdge { u: NodeId, v: NodeId },

    #[error("duplicate trial id `{0}`")]
    DuplicateTrial(String),

    #[error("trial id `{0}` does not resolve to a trial node")]
    UnknownTrial(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("node {0} has a zero-norm embedding")]
    ZeroNorm(NodeId),

    #[error("node {0} has a non-finite embedding entry")]
    NonFinite(NodeId),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParam(_) => ErrorCategory::Config,
            Error::NonFinite(_) => ErrorCategory::Internal,
            _ => ErrorCategory::Data,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
