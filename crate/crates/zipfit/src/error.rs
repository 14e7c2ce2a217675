use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// Errors split into two families that map onto the CLI exit-code contract:
/// configuration/validation problems (exit 2) and runtime I/O, codec, or
/// worker failures (exit 1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("{path}: {source}")]
    IoPath {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("codec unavailable: {algorithm} (built without the `{algorithm}` feature)")]
    CodecUnavailable { algorithm: &'static str },

    #[error("{0}")]
    Validation(String),

    #[error("runtime error: {0}")]
    Runtime(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io_path(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::IoPath {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for config/validation errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 2,
            _ => 1,
        }
    }
}
