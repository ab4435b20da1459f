use std::io;

use thiserror::Error;

use crate::protocol::{ErrorCode, ProtocolError};
use crate::store::StoreError;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("peer disconnected")]
    Disconnected,
    #[error("{code}: {text}")]
    Rejected { code: ErrorCode, text: String },
    #[error("unexpected `{0}` reply")]
    Unexpected(&'static str),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Core(#[from] ris_core::Error),
}
