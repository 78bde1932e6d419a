use thiserror::Error;

/// Errors produced anywhere in the retrieval engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed WAV file: {0}")]
    Format(String),

    #[error("unsupported WAV encoding: {0}")]
    UnsupportedFormat(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported operation: {0}")]
    UnsupportedOperation(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("store format version {found} is not supported (expected {expected})")]
    Migration { found: u32, expected: u32 },

    #[error("integrity error for song '{song}': {detail}")]
    Integrity { song: String, detail: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("manifest error: {0}")]
    Manifest(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
