//! `serve` and `agent` launchers over TCP.

use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use ris_control::broker::BrokerConfig;
use ris_control::{BrokerHandle, CodebookStore, Connection, FileSurface, MemorySurface, RisAgent, RxAgent, Surface};
use ris_core::{Codebook, SimulatedOracle};

use crate::error::CliError;
use crate::scenario::Scenario;

pub const DEFAULT_SURFACE_FILE: &str = "ris-lab-surface.riscb";

/// Binds `listen`, reports the bound address and serves until the process
/// ends.
pub fn serve(listen: &str, config: BrokerConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), CliError> {
    let listener = TcpListener::bind(listen).map_err(|source| CliError::Connect {
        addr: listen.to_string(),
        source,
    })?;
    let addr = listener.local_addr().map_err(|e| CliError::io(Path::new(listen), e))?;
    let broker = BrokerHandle::spawn(config);
    log::info!("broker listening on {addr}");
    on_ready(addr);
    broker
        .serve_tcp(listener)
        .map_err(|e| CliError::io(Path::new(listen), e))
}

pub fn connect(addr: &str) -> Result<Connection, CliError> {
    let wrap = |source| CliError::Connect {
        addr: addr.to_string(),
        source,
    };
    let stream = TcpStream::connect(addr).map_err(wrap)?;
    log::info!("connected to {addr}");
    Connection::tcp(stream).map_err(wrap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRole {
    Ris,
    Rx,
    /// Both agents in one process sharing an in-memory surface.
    Field,
}

#[derive(Debug, Clone)]
pub struct AgentSetup {
    pub role: AgentRole,
    pub connect: String,
    pub scenario: Scenario,
    pub store: Option<PathBuf>,
    pub surface: Option<PathBuf>,
    pub location: Option<String>,
}

impl AgentSetup {
    fn ris(&self, surface: Arc<dyn Surface>) -> Result<RisAgent, CliError> {
        let store = match &self.store {
            Some(p) => CodebookStore::open(p).map_err(ris_control::ControlError::from)?,
            None => CodebookStore::in_memory(),
        };
        Ok(RisAgent::new(self.scenario.grid()?, store, surface))
    }

    fn rx(&self, surface: Arc<dyn Surface>) -> Result<RxAgent, CliError> {
        let s = &self.scenario;
        let n = s.grid()?.controllable();
        let (chan, seed) = match &self.location {
            Some(id) => {
                let loc = s
                    .location(id)
                    .ok_or_else(|| CliError::Usage(format!("scenario has no location {id:?}")))?;
                (s.location_channel(loc, n)?, loc.seed)
            }
            None => match s.locations.first() {
                Some(loc) => (s.location_channel(loc, n)?, loc.seed),
                None => (s.channel.realize(n, s.seeds[0])?, s.seeds[0]),
            },
        };
        Ok(RxAgent::new(SimulatedOracle::new(chan, s.oracle_for(seed))?, surface))
    }

    fn file_surface(&self) -> Result<Arc<dyn Surface>, CliError> {
        let path = self
            .surface
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_SURFACE_FILE));
        Ok(Arc::new(FileSurface::new(path, Codebook::all_off(&self.scenario.grid()?))))
    }
}

/// Runs the requested agent(s) until the broker goes away.
pub fn run_agent(setup: &AgentSetup) -> Result<(), CliError> {
    match setup.role {
        AgentRole::Ris => {
            let agent = setup.ris(setup.file_surface()?)?;
            agent.run(connect(&setup.connect)?)?;
        }
        AgentRole::Rx => {
            let agent = setup.rx(setup.file_surface()?)?;
            agent.run(connect(&setup.connect)?)?;
        }
        AgentRole::Field => {
            let surface = MemorySurface::new(Codebook::all_off(&setup.scenario.grid()?));
            let ris = setup.ris(Arc::new(surface.clone()))?;
            let rx = setup.rx(Arc::new(surface))?;
            let (c1, c2) = (connect(&setup.connect)?, connect(&setup.connect)?);
            let h = thread::spawn(move || ris.run(c1).map(drop));
            rx.run(c2)?;
            h.join().expect("ris agent thread")?;
        }
    }
    Ok(())
}
