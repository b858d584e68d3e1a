use std::path::PathBuf;

use thiserror::Error;

use crate::curvestore::Split;

pub type Result<T> = std::result::Result<T, ArenaError>;

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("missing curve for (d{dataset}, a{algorithm}, {split})")]
    MissingCurve {
        dataset: usize,
        algorithm: usize,
        split: Split,
    },

    #[error("malformed curve (d{dataset}, a{algorithm}, {split}): {message}")]
    MalformedCurve {
        dataset: usize,
        algorithm: usize,
        split: Split,
        message: String,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unknown dataset id {0}")]
    UnknownDataset(usize),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("episode already finished")]
    EpisodeDone,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("agent `{0}` requires meta-training before acting")]
    NotMetaTrained(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing artifact {path}: {what}")]
    MissingArtifact { path: PathBuf, what: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl ArenaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ArenaError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable tag used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            ArenaError::Io { .. } => "io",
            ArenaError::Manifest { .. } => "manifest",
            ArenaError::MissingCurve { .. } => "missing_curve",
            ArenaError::MalformedCurve { .. } => "malformed_curve",
            ArenaError::Invariant(_) => "invariant",
            ArenaError::UnknownDataset(_) => "unknown_dataset",
            ArenaError::InvalidAction(_) => "invalid_action",
            ArenaError::EpisodeDone => "episode_done",
            ArenaError::Shape(_) => "shape",
            ArenaError::NotMetaTrained(_) => "not_meta_trained",
            ArenaError::Config(_) => "config",
            ArenaError::MissingArtifact { .. } => "missing_artifact",
            ArenaError::Json(_) => "json",
        }
    }
}
