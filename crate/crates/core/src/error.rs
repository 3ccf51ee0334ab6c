use std::io;

/// Coarse error classes. Each maps to a stable process exit code in the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Format,
    Capacity,
    Integrity,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Format => 2,
            ErrorKind::Capacity => 3,
            ErrorKind::Integrity => 4,
            ErrorKind::Numeric => 5,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("no hidden data / wrong bit depth (bad frame magic)")]
    BadMagic,

    #[error("truncated data: {0}")]
    Truncated(String),

    #[error("parse error at token {index}: {message}")]
    Parse { index: usize, message: String },

    #[error("needed {needed} bytes, available {available}")]
    Capacity { needed: usize, available: usize },

    #[error("passphrase required")]
    PassphraseRequired,

    #[error("wrong passphrase or corrupted carrier")]
    CrcMismatch,

    #[error("invalid padding: wrong passphrase or corrupted ciphertext")]
    BadPadding,

    #[error("slack chunk {chunk} in {path} failed CRC check (carrier overwritten?)")]
    ChunkCrc { path: String, chunk: usize },

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("singular system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("spectrum has no peak outside DC")]
    NoPeak,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Usage(_) | Error::Io(_) => ErrorKind::Usage,
            Error::Format(_) | Error::BadMagic | Error::Truncated(_) | Error::Parse { .. } => {
                ErrorKind::Format
            }
            Error::Capacity { .. } => ErrorKind::Capacity,
            Error::PassphraseRequired
            | Error::CrcMismatch
            | Error::BadPadding
            | Error::ChunkCrc { .. } => ErrorKind::Integrity,
            Error::DegenerateSignal(_) | Error::Singular { .. } | Error::Numeric(_) | Error::NoPeak => {
                ErrorKind::Numeric
            }
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
