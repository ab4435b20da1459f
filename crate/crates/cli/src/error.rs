use std::io;
use std::path::{Path, PathBuf};

use ris_control::ControlError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PROTOCOL: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot reach {addr}: {source}")]
    Connect { addr: String, source: io::Error },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Core(#[from] ris_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Core(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Connect { .. } => EXIT_IO,
            CliError::Control(e) => match e {
                ControlError::Io(_) | ControlError::Disconnected | ControlError::Store(_) => EXIT_IO,
                ControlError::Core(_) => EXIT_USAGE,
                _ => EXIT_PROTOCOL,
            },
        }
    }
}
