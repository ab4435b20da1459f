//! Control plane: JSON-lines protocol, field agents, the cloud broker that
//! runs codebook searches over the wire, and the durable codebook store.

pub mod agents;
pub mod broker;
pub mod client;
pub mod error;
pub mod protocol;
pub mod store;
pub mod surface;
pub mod transport;

pub use agents::{RisAgent, RxAgent};
pub use broker::{BrokerConfig, BrokerHandle, BrokerStats};
pub use client::{Client, GenOutcome};
pub use error::ControlError;
pub use protocol::{decode, encode, ControlMessage, ErrorCode, Payload, ProtocolError, Role};
pub use store::{CodebookStore, StoreError};
pub use surface::{FileSurface, MemorySurface, Surface};
pub use transport::{Connection, Endpoint, LineSink, LineSource};
