//! Cloud-side broker.
//!
//! Agents connect and announce a role with `hello`. A user `gen_request`
//! runs a search whose every measurement is one `set_codebook` to the RIS
//! agent followed by one `rssi_request` to the receiver. When the search
//! finishes the result is applied, saved under the location id and reported
//! with `gen_done`. Other user requests are relayed to the agent that owns
//! them. Only one session runs at a time; requests arriving meanwhile are
//! answered with `busy`.

use std::collections::{HashMap, VecDeque};
use std::net::TcpListener;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use ris_core::search::run_algorithm;
use ris_core::{AlgorithmId, Codebook, Grid, RssiOracle, SearchOptions};
use thiserror::Error;

use crate::protocol::{decode, encode, ControlMessage, ErrorCode, Payload, Role};
use crate::store::validate_location_id;
use crate::transport::{Connection, LineSink};

pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone)]
pub struct BrokerConfig {
    /// How long to wait for an agent's reply before retrying.
    pub request_timeout: Duration,
    /// Resends after a timeout before the session fails.
    pub retries: u32,
    pub search: SearchOptions,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        Self {
            request_timeout: DEFAULT_REQUEST_TIMEOUT,
            retries: 1,
            search: SearchOptions::default(),
        }
    }
}

/// Message counters, for auditing who the broker talks to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BrokerStats {
    pub sent_to_user: u64,
    pub sent_to_ris: u64,
    pub sent_to_rx: u64,
    pub sessions_completed: u64,
    pub bound: Vec<Role>,
}

impl BrokerStats {
    pub fn sent_to(&self, role: Role) -> u64 {
        match role {
            Role::User => self.sent_to_user,
            Role::Ris => self.sent_to_ris,
            Role::Rx => self.sent_to_rx,
        }
    }
}

#[derive(Default)]
struct Shared {
    stats: Mutex<BrokerStats>,
    changed: Condvar,
}

impl Shared {
    fn update(&self, f: impl FnOnce(&mut BrokerStats)) {
        f(&mut self.stats.lock().expect("stats lock"));
        self.changed.notify_all();
    }
}

type ConnId = u64;

enum Event {
    Attach(Connection),
    Line { conn: ConnId, line: String },
    Closed { conn: ConnId },
    Shutdown,
}

/// Owner's handle to a broker running on its own thread. Dropping it shuts
/// the broker down.
pub struct BrokerHandle {
    events: Sender<Event>,
    shared: Arc<Shared>,
    thread: Option<JoinHandle<()>>,
}

impl BrokerHandle {
    pub fn spawn(config: BrokerConfig) -> Self {
        let (tx, rx) = mpsc::channel();
        let shared = Arc::new(Shared::default());
        let broker = Broker {
            config,
            events_tx: tx.clone(),
            events: rx,
            peers: HashMap::new(),
            roles: HashMap::new(),
            layout: None,
            next_conn: 0,
            shared: Arc::clone(&shared),
            shutting_down: false,
            in_session: false,
            deferred: VecDeque::new(),
        };
        let thread = thread::Builder::new()
            .name("broker".into())
            .spawn(move || broker.run())
            .expect("spawn broker thread");
        Self {
            events: tx,
            shared,
            thread: Some(thread),
        }
    }

    /// An in-process connection to the broker.
    pub fn connect(&self) -> Connection {
        let (ours, theirs) = Connection::pair();
        self.attach(theirs);
        ours
    }

    pub fn attach(&self, conn: Connection) {
        let _ = self.events.send(Event::Attach(conn));
    }

    pub fn stats(&self) -> BrokerStats {
        self.shared.stats.lock().expect("stats lock").clone()
    }

    /// Blocks until every role in `roles` is bound or the timeout elapses.
    pub fn wait_for_roles(&self, roles: &[Role], timeout: Duration) -> bool {
        let guard = self.shared.stats.lock().expect("stats lock");
        let (_guard, res) = self
            .shared
            .changed
            .wait_timeout_while(guard, timeout, |s| !roles.iter().all(|r| s.bound.contains(r)))
            .expect("stats lock");
        !res.timed_out()
    }

    /// Accepts TCP connections until the listener fails.
    pub fn serve_tcp(&self, listener: TcpListener) -> std::io::Result<()> {
        for stream in listener.incoming() {
            match stream.and_then(Connection::tcp) {
                Ok(conn) => self.attach(conn),
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
        Ok(())
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        let _ = self.events.send(Event::Shutdown);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for BrokerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

struct Peer {
    sink: Box<dyn LineSink>,
    role: Option<Role>,
    next_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
enum CallError {
    #[error("no {0} agent connected")]
    NoAgent(&'static str),
    #[error("{0} agent disconnected")]
    AgentLost(&'static str),
    #[error("{0} agent did not answer")]
    Timeout(&'static str),
    #[error("{text}")]
    Rejected { code: ErrorCode, text: String },
    #[error("unexpected `{0}` reply")]
    Unexpected(&'static str),
    #[error(transparent)]
    Core(#[from] ris_core::Error),
}

impl CallError {
    fn code(&self) -> ErrorCode {
        match self {
            CallError::NoAgent(_) => ErrorCode::NoAgent,
            CallError::AgentLost(_) => ErrorCode::AgentLost,
            CallError::Timeout(_) => ErrorCode::Timeout,
            CallError::Rejected { code, .. } => *code,
            CallError::Unexpected(_) => ErrorCode::Protocol,
            CallError::Core(_) => ErrorCode::BadRequest,
        }
    }

    fn reply(&self, of_seq: u64) -> Payload {
        Payload::error(of_seq, self.code(), self.to_string())
    }
}

struct Broker {
    config: BrokerConfig,
    events_tx: Sender<Event>,
    events: Receiver<Event>,
    peers: HashMap<ConnId, Peer>,
    roles: HashMap<Role, ConnId>,
    /// Panel layout announced by the bound RIS agent.
    layout: Option<Grid>,
    next_conn: ConnId,
    shared: Arc<Shared>,
    shutting_down: bool,
    /// True while a generation session is running.
    in_session: bool,
    /// Events held back while a relayed request is outstanding, so that each
    /// connection is still served in order.
    deferred: VecDeque<Event>,
}

impl Broker {
    fn run(mut self) {
        while !self.shutting_down {
            let ev = match self.deferred.pop_front() {
                Some(ev) => ev,
                None => match self.events.recv() {
                    Ok(ev) => ev,
                    Err(_) => break,
                },
            };
            self.dispatch(ev, false);
        }
        log::debug!("broker stopped");
    }

    fn dispatch(&mut self, ev: Event, busy: bool) {
        match ev {
            Event::Attach(conn) => self.attach(conn),
            Event::Line { conn, line } => self.on_line(conn, &line, busy),
            Event::Closed { conn } => self.drop_peer(conn),
            Event::Shutdown => self.shutting_down = true,
        }
    }

    fn attach(&mut self, conn: Connection) {
        let id = self.next_conn;
        self.next_conn += 1;
        let (sink, mut source) = conn.split();
        self.peers.insert(
            id,
            Peer {
                sink,
                role: None,
                next_seq: 1,
            },
        );
        let tx = self.events_tx.clone();
        thread::spawn(move || {
            loop {
                match source.recv_line() {
                    Ok(Some(line)) => {
                        if tx.send(Event::Line { conn: id, line }).is_err() {
                            return;
                        }
                    }
                    Ok(None) => break,
                    Err(e) => {
                        log::warn!("connection {id}: {e}");
                        break;
                    }
                }
            }
            let _ = tx.send(Event::Closed { conn: id });
        });
    }

    fn drop_peer(&mut self, conn: ConnId) {
        let Some(peer) = self.peers.remove(&conn) else {
            return;
        };
        if let Some(role) = peer.role {
            if self.roles.get(&role) == Some(&conn) {
                self.roles.remove(&role);
                if role == Role::Ris {
                    self.layout = None;
                }
                log::info!("{} agent disconnected", role.as_str());
                self.shared.update(|s| s.bound.retain(|r| *r != role));
            }
        }
    }

    /// Sends to a peer. A failed write drops the peer.
    fn send(&mut self, conn: ConnId, payload: Payload) -> Option<u64> {
        let peer = self.peers.get_mut(&conn)?;
        let seq = peer.next_seq;
        peer.next_seq += 1;
        let line = encode(&ControlMessage { seq, payload });
        if let Err(e) = peer.sink.send_line(&line) {
            log::warn!("write to connection {conn} failed: {e}");
            self.drop_peer(conn);
            return None;
        }
        let role = peer.role;
        self.shared.update(|s| match role {
            Some(Role::User) => s.sent_to_user += 1,
            Some(Role::Ris) => s.sent_to_ris += 1,
            Some(Role::Rx) => s.sent_to_rx += 1,
            None => {}
        });
        Some(seq)
    }

    fn on_line(&mut self, conn: ConnId, line: &str, busy: bool) {
        let Some(role) = self.peers.get(&conn).map(|p| p.role) else {
            return;
        };
        let msg = match decode(line) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("connection {conn}: {e}");
                self.send(conn, Payload::error(0, ErrorCode::Protocol, e.to_string()));
                return;
            }
        };
        let seq = msg.seq;
        match (role, msg.payload) {
            (None, Payload::Hello { role, layout }) => self.bind(conn, seq, role, layout),
            (None, _) => {
                self.send(conn, Payload::error(seq, ErrorCode::BadRequest, "send hello first"));
            }
            (Some(_), Payload::Hello { .. }) => {
                self.send(conn, Payload::error(seq, ErrorCode::BadRequest, "role already announced"));
            }
            (Some(_), p) if p.reply_to().is_some() => {
                log::debug!("connection {conn}: dropping stale {}", p.type_name());
            }
            (Some(Role::User), _) if busy => {
                self.send(conn, Payload::error(seq, ErrorCode::Busy, "a generation session is running"));
            }
            (Some(Role::User), p) => self.serve_user(conn, seq, p),
            (Some(_), p) => {
                self.send(
                    conn,
                    Payload::error(seq, ErrorCode::BadRequest, format!("agents may not send {}", p.type_name())),
                );
            }
        }
    }

    fn bind(&mut self, conn: ConnId, seq: u64, role: Role, layout: Option<Codebook>) {
        if role != Role::User && self.roles.contains_key(&role) {
            self.send(
                conn,
                Payload::error(seq, ErrorCode::Busy, format!("a {} agent is already connected", role.as_str())),
            );
            return;
        }
        if role == Role::Ris {
            match layout {
                Some(cb) => self.layout = Some(cb.grid().clone()),
                None => {
                    self.send(conn, Payload::error(seq, ErrorCode::BadRequest, "ris hello must carry a layout"));
                    return;
                }
            }
        }
        if let Some(p) = self.peers.get_mut(&conn) {
            p.role = Some(role);
        }
        if role != Role::User {
            self.roles.insert(role, conn);
            self.shared.update(|s| s.bound.push(role));
        }
        log::info!("connection {conn} is {}", role.as_str());
        self.send(conn, Payload::Ack { of_seq: seq });
    }

    fn serve_user(&mut self, conn: ConnId, seq: u64, payload: Payload) {
        let reply = match payload {
            Payload::GenRequest {
                location_id,
                algorithm_id,
            } => self.generate(seq, location_id, &algorithm_id),
            p @ Payload::RssiRequest {} => self.relay(seq, Role::Rx, p),
            p @ (Payload::SetCodebook { .. }
            | Payload::SaveCb { .. }
            | Payload::ApplyCb { .. }
            | Payload::DeleteCb { .. }
            | Payload::ListCb {}) => self.relay(seq, Role::Ris, p),
            other => Payload::error(
                seq,
                ErrorCode::BadRequest,
                format!("users may not send {}", other.type_name()),
            ),
        };
        self.send(conn, reply);
    }

    fn relay(&mut self, seq: u64, role: Role, payload: Payload) -> Payload {
        match self.call(role, payload) {
            Ok(reply) => reply.readdressed(seq),
            Err(e) => e.reply(seq),
        }
    }

    fn generate(&mut self, seq: u64, location_id: String, algorithm_id: &str) -> Payload {
        let algorithm: AlgorithmId = match algorithm_id.parse() {
            Ok(a) => a,
            Err(e) => return Payload::error(seq, ErrorCode::BadAlgorithm, format!("{e}")),
        };
        if let Err(e) = validate_location_id(&location_id) {
            return Payload::error(seq, ErrorCode::BadRequest, e.to_string());
        }
        for role in [Role::Ris, Role::Rx] {
            if !self.roles.contains_key(&role) {
                return CallError::NoAgent(role.as_str()).reply(seq);
            }
        }
        let grid = self.layout.clone().expect("bound ris agent has a layout");
        let options = self.config.search.clone();
        log::info!("session {seq}: {algorithm} for {location_id} on {} elements", grid.controllable());

        self.in_session = true;
        let result = run_algorithm(RemoteOracle { broker: self }, &grid, algorithm, &options);
        self.in_session = false;
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                log::warn!("session {seq} failed: {e}");
                return e.reply(seq);
            }
        };
        let finish = self
            .expect_ack(Role::Ris, Payload::SetCodebook { codebook: report.final_codebook.clone() })
            .and_then(|()| {
                self.expect_ack(
                    Role::Ris,
                    Payload::SaveCb {
                        location_id: location_id.clone(),
                        codebook: report.final_codebook.clone(),
                    },
                )
            });
        if let Err(e) = finish {
            return e.reply(seq);
        }
        self.shared.update(|s| s.sessions_completed += 1);
        log::info!(
            "session {seq} done: {} queries, {:.3} dBm",
            report.queries_used,
            report.final_rssi_dbm
        );
        Payload::GenDone {
            of_seq: seq,
            location_id,
            queries: report.queries_used,
            rssi_dbm: report.final_rssi_dbm,
        }
    }

    fn expect_ack(&mut self, role: Role, payload: Payload) -> Result<(), CallError> {
        match self.call(role, payload)? {
            Payload::Ack { .. } => Ok(()),
            Payload::Error { code, text, .. } => Err(CallError::Rejected { code, text }),
            other => Err(CallError::Unexpected(other.type_name())),
        }
    }

    /// Sends a request to the agent holding `role` and waits for its reply,
    /// servicing other connections meanwhile. A silent agent gets the
    /// request again up to `retries` times.
    fn call(&mut self, role: Role, payload: Payload) -> Result<Payload, CallError> {
        let name = role.as_str();
        for attempt in 0..=self.config.retries {
            let Some(&conn) = self.roles.get(&role) else {
                return Err(if attempt == 0 {
                    CallError::NoAgent(name)
                } else {
                    CallError::AgentLost(name)
                });
            };
            let Some(seq) = self.send(conn, payload.clone()) else {
                return Err(CallError::AgentLost(name));
            };
            let deadline = Instant::now() + self.config.request_timeout;
            loop {
                let left = deadline.saturating_duration_since(Instant::now());
                if left.is_zero() {
                    break;
                }
                match self.events.recv_timeout(left) {
                    Ok(Event::Line { conn: c, line }) if c == conn => match decode(&line) {
                        Ok(m) if m.payload.reply_to() == Some(seq) => return Ok(m.payload),
                        Ok(m) => log::debug!("{name}: ignoring {}", m.payload.type_name()),
                        Err(e) => log::warn!("{name}: {e}"),
                    },
                    Ok(Event::Closed { conn: c }) if c == conn => {
                        self.drop_peer(c);
                        return Err(CallError::AgentLost(name));
                    }
                    Ok(ev) if self.in_session => self.dispatch(ev, true),
                    Ok(ev) => self.deferred.push_back(ev),
                    Err(RecvTimeoutError::Timeout) => break,
                    Err(RecvTimeoutError::Disconnected) => return Err(CallError::AgentLost(name)),
                }
            }
            log::warn!("{name} did not answer seq {seq} (attempt {})", attempt + 1);
        }
        Err(CallError::Timeout(name))
    }
}

/// Measurement path of a session: apply on the panel, then read the receiver.
struct RemoteOracle<'a> {
    broker: &'a mut Broker,
}

impl RssiOracle for RemoteOracle<'_> {
    type Error = CallError;

    fn measure(&mut self, cb: &Codebook) -> Result<f64, CallError> {
        let lost = |e: CallError| match e {
            CallError::NoAgent(r) => CallError::AgentLost(r),
            e => e,
        };
        self.broker
            .expect_ack(Role::Ris, Payload::SetCodebook { codebook: cb.clone() })
            .map_err(lost)?;
        match self.broker.call(Role::Rx, Payload::RssiRequest {}).map_err(lost)? {
            Payload::RssiResponse { rssi_dbm, .. } => Ok(rssi_dbm),
            Payload::Error { code, text, .. } => Err(CallError::Rejected { code, text }),
            other => Err(CallError::Unexpected(other.type_name())),
        }
    }
}
