//! Field agents: the RIS controller (owns the store and drives the live
//! surface) and the receiver (reports RSSI for whatever is applied).

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use ris_core::{Codebook, Grid, RssiOracle, SimulatedOracle};

use crate::error::ControlError;
use crate::protocol::{ErrorCode, Payload, Role};
use crate::store::{CodebookStore, StoreError};
use crate::surface::Surface;
use crate::transport::{Connection, Endpoint};

pub struct RisAgent {
    grid: Grid,
    store: CodebookStore,
    surface: Arc<dyn Surface>,
    received: Arc<AtomicU64>,
}

impl RisAgent {
    pub fn new(grid: Grid, store: CodebookStore, surface: Arc<dyn Surface>) -> Self {
        Self {
            grid,
            store,
            surface,
            received: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Counter of messages received from the broker, readable while the
    /// agent runs on another thread.
    pub fn received_counter(&self) -> Arc<AtomicU64> {
        Arc::clone(&self.received)
    }

    /// Serves until the broker disconnects.
    pub fn run(mut self, conn: Connection) -> Result<CodebookStore, ControlError> {
        let mut ep = Endpoint::new(conn);
        ep.send(Payload::Hello {
            role: Role::Ris,
            layout: Some(Codebook::all_off(&self.grid)),
        })?;
        loop {
            let msg = match ep.recv() {
                Ok(Some(m)) => m,
                Ok(None) => return Ok(self.store),
                Err(ControlError::Protocol(e)) => {
                    log::warn!("ris: {e}");
                    ep.send(Payload::error(0, ErrorCode::Protocol, e.to_string()))?;
                    continue;
                }
                Err(e) => return Err(e),
            };
            self.received.fetch_add(1, Ordering::Relaxed);
            if msg.payload.reply_to().is_some() {
                continue;
            }
            let reply = self.handle(msg.seq, msg.payload);
            ep.send(reply)?;
        }
    }

    fn handle(&mut self, seq: u64, payload: Payload) -> Payload {
        let ack = Payload::Ack { of_seq: seq };
        match payload {
            Payload::SetCodebook { codebook } => match self.apply(&codebook) {
                Ok(()) => ack,
                Err(e) => e.into_reply(seq),
            },
            Payload::SaveCb {
                location_id,
                codebook,
            } => {
                if let Err(e) = self.check_grid(&codebook) {
                    return e.into_reply(seq);
                }
                match self.store.insert(&location_id, codebook) {
                    Ok(()) => ack,
                    Err(e) => store_reply(seq, e),
                }
            }
            Payload::ApplyCb { location_id } => match self.store.get(&location_id).cloned() {
                Some(cb) => match self.apply(&cb) {
                    Ok(()) => ack,
                    Err(e) => e.into_reply(seq),
                },
                None => unknown_location(seq, &location_id),
            },
            Payload::DeleteCb { location_id } => match self.store.remove(&location_id) {
                Ok(true) => ack,
                Ok(false) => unknown_location(seq, &location_id),
                Err(e) => store_reply(seq, e),
            },
            Payload::ListCb {} => Payload::CbList {
                of_seq: seq,
                location_ids: self.store.ids(),
            },
            other => Payload::error(
                seq,
                ErrorCode::BadRequest,
                format!("ris agent does not handle {}", other.type_name()),
            ),
        }
    }

    fn check_grid(&self, cb: &Codebook) -> Result<(), Rejection> {
        if cb.grid() != &self.grid {
            return Err(Rejection(
                ErrorCode::BadRequest,
                format!(
                    "codebook is {}x{}, panel is {}x{} with a different layout",
                    cb.grid().rows(),
                    cb.grid().cols(),
                    self.grid.rows(),
                    self.grid.cols()
                ),
            ));
        }
        Ok(())
    }

    fn apply(&self, cb: &Codebook) -> Result<(), Rejection> {
        self.check_grid(cb)?;
        self.surface
            .apply(cb)
            .map_err(|e| Rejection(ErrorCode::StoreIo, format!("surface write failed: {e}")))
    }
}

struct Rejection(ErrorCode, String);

impl Rejection {
    fn into_reply(self, seq: u64) -> Payload {
        Payload::error(seq, self.0, self.1)
    }
}

fn unknown_location(seq: u64, id: &str) -> Payload {
    Payload::error(seq, ErrorCode::UnknownLocation, format!("no codebook stored for {id:?}"))
}

fn store_reply(seq: u64, e: StoreError) -> Payload {
    let code = match e {
        StoreError::BadLocation(_) => ErrorCode::BadRequest,
        _ => ErrorCode::StoreIo,
    };
    Payload::error(seq, code, e.to_string())
}

pub struct RxAgent {
    oracle: SimulatedOracle,
    surface: Arc<dyn Surface>,
    measured: Arc<AtomicU64>,
}

impl RxAgent {
    pub fn new(oracle: SimulatedOracle, surface: Arc<dyn Surface>) -> Self {
        Self {
            oracle,
            surface,
            measured: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Counter of RSSI reports produced.
    pub fn measured_counter(&self) -> Arc<AtomicU64> {
        Arc::clone(&self.measured)
    }

    pub fn run(mut self, conn: Connection) -> Result<SimulatedOracle, ControlError> {
        let mut ep = Endpoint::new(conn);
        ep.send(Payload::Hello {
            role: Role::Rx,
            layout: None,
        })?;
        let frames = self.oracle.frames_per_report();
        loop {
            let msg = match ep.recv() {
                Ok(Some(m)) => m,
                Ok(None) => return Ok(self.oracle),
                Err(ControlError::Protocol(e)) => {
                    log::warn!("rx: {e}");
                    ep.send(Payload::error(0, ErrorCode::Protocol, e.to_string()))?;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let reply = match msg.payload {
                Payload::RssiRequest {} => match self.measure() {
                    Ok(rssi_dbm) => {
                        self.measured.fetch_add(1, Ordering::Relaxed);
                        Payload::RssiResponse {
                            of_seq: msg.seq,
                            rssi_dbm,
                            frames,
                        }
                    }
                    Err(text) => Payload::error(msg.seq, ErrorCode::BadRequest, text),
                },
                p if p.reply_to().is_some() => continue,
                other => Payload::error(
                    msg.seq,
                    ErrorCode::BadRequest,
                    format!("receiver does not handle {}", other.type_name()),
                ),
            };
            ep.send(reply)?;
        }
    }

    fn measure(&mut self) -> Result<f64, String> {
        let cb = self.surface.current().map_err(|e| e.to_string())?;
        self.oracle.measure(&cb).map_err(|e| e.to_string())
    }
}
