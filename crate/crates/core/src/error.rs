use std::path::PathBuf;

/// Crate-wide error type. Variants map onto the failure classes the CLI
/// reports: bad config, bad invocation, corrupt or incompatible
/// checkpoints, and internal verification failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    /// Numerical self-check failed (e.g. a non-deterministic forward pass
    /// detected during gradient checking).
    #[error("verification error: {0}")]
    Verification(String),

    /// Checkpoint carries a format version this build does not understand.
    #[error("checkpoint version error: {0}")]
    Version(String),

    /// Checkpoint is truncated or structurally corrupt.
    #[error("checkpoint integrity error: {0}")]
    Integrity(String),

    /// An environment rejected a transition mid-run; the global step index
    /// is attached so the failure can be located in a long training run.
    #[error("environment fault at step {step}: {message}")]
    EnvFault { step: u64, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
