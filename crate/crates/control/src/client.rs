//! User-side client.

use ris_core::Codebook;

use crate::error::ControlError;
use crate::protocol::{Payload, Role};
use crate::transport::{Connection, Endpoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenOutcome {
    pub queries: u64,
    pub rssi_dbm: f64,
}

pub struct Client {
    ep: Endpoint,
}

impl Client {
    /// Announces the user role and waits for the broker to accept it.
    pub fn connect(conn: Connection) -> Result<Self, ControlError> {
        let mut ep = Endpoint::new(conn);
        ep.hello(Role::User, None)?;
        Ok(Self { ep })
    }

    /// Sends any payload and returns the raw reply.
    pub fn request(&mut self, payload: Payload) -> Result<Payload, ControlError> {
        self.ep.request(payload)
    }

    pub fn generate(&mut self, location_id: &str, algorithm_id: &str) -> Result<GenOutcome, ControlError> {
        match self.checked(Payload::GenRequest {
            location_id: location_id.into(),
            algorithm_id: algorithm_id.into(),
        })? {
            Payload::GenDone { queries, rssi_dbm, .. } => Ok(GenOutcome { queries, rssi_dbm }),
            other => Err(ControlError::Unexpected(other.type_name())),
        }
    }

    /// RSSI of whatever is live on the panel, with the frame count behind it.
    pub fn rssi(&mut self) -> Result<(f64, u32), ControlError> {
        match self.checked(Payload::RssiRequest {})? {
            Payload::RssiResponse { rssi_dbm, frames, .. } => Ok((rssi_dbm, frames)),
            other => Err(ControlError::Unexpected(other.type_name())),
        }
    }

    pub fn apply(&mut self, location_id: &str) -> Result<(), ControlError> {
        self.acked(Payload::ApplyCb { location_id: location_id.into() })
    }

    pub fn save(&mut self, location_id: &str, codebook: Codebook) -> Result<(), ControlError> {
        self.acked(Payload::SaveCb {
            location_id: location_id.into(),
            codebook,
        })
    }

    pub fn delete(&mut self, location_id: &str) -> Result<(), ControlError> {
        self.acked(Payload::DeleteCb { location_id: location_id.into() })
    }

    pub fn set_codebook(&mut self, codebook: Codebook) -> Result<(), ControlError> {
        self.acked(Payload::SetCodebook { codebook })
    }

    pub fn list(&mut self) -> Result<Vec<String>, ControlError> {
        match self.checked(Payload::ListCb {})? {
            Payload::CbList { location_ids, .. } => Ok(location_ids),
            other => Err(ControlError::Unexpected(other.type_name())),
        }
    }

    fn checked(&mut self, payload: Payload) -> Result<Payload, ControlError> {
        match self.ep.request(payload)? {
            Payload::Error { code, text, .. } => Err(ControlError::Rejected { code, text }),
            p => Ok(p),
        }
    }

    fn acked(&mut self, payload: Payload) -> Result<(), ControlError> {
        match self.checked(payload)? {
            Payload::Ack { .. } => Ok(()),
            other => Err(ControlError::Unexpected(other.type_name())),
        }
    }
}
