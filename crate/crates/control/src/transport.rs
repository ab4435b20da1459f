//! Line transports. Both the in-process pair and TCP carry the exact
//! newline-terminated bytes of the wire format.

use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::mpsc::{self, Receiver, Sender};

use crate::error::ControlError;
use crate::protocol::{decode, encode, ControlMessage, Payload, Role};

pub trait LineSink: Send {
    /// Sends one line; the transport appends the newline.
    fn send_line(&mut self, line: &str) -> io::Result<()>;
}

pub trait LineSource: Send {
    /// Next line without its newline, or `None` once the peer is gone.
    fn recv_line(&mut self) -> io::Result<Option<String>>;
}

pub struct Connection {
    sink: Box<dyn LineSink>,
    source: Box<dyn LineSource>,
}

impl std::fmt::Debug for Connection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Connection")
    }
}

impl Connection {
    pub fn new(sink: Box<dyn LineSink>, source: Box<dyn LineSource>) -> Self {
        Self { sink, source }
    }

    /// Two connected in-process endpoints.
    pub fn pair() -> (Connection, Connection) {
        let (a_tx, a_rx) = mpsc::channel();
        let (b_tx, b_rx) = mpsc::channel();
        (
            Connection::new(Box::new(ChannelSink(a_tx)), Box::new(ChannelSource(b_rx))),
            Connection::new(Box::new(ChannelSink(b_tx)), Box::new(ChannelSource(a_rx))),
        )
    }

    pub fn tcp(stream: TcpStream) -> io::Result<Connection> {
        let reader = BufReader::new(stream.try_clone()?);
        Ok(Connection::new(
            Box::new(TcpSink(stream)),
            Box::new(TcpSource(reader)),
        ))
    }

    pub fn split(self) -> (Box<dyn LineSink>, Box<dyn LineSource>) {
        (self.sink, self.source)
    }
}

struct ChannelSink(Sender<String>);

impl LineSink for ChannelSink {
    fn send_line(&mut self, line: &str) -> io::Result<()> {
        self.0
            .send(format!("{line}\n"))
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer closed"))
    }
}

struct ChannelSource(Receiver<String>);

impl LineSource for ChannelSource {
    fn recv_line(&mut self) -> io::Result<Option<String>> {
        match self.0.recv() {
            Ok(mut line) => {
                if line.pop() != Some('\n') {
                    return Err(io::Error::new(io::ErrorKind::InvalidData, "unterminated line"));
                }
                Ok(Some(line))
            }
            Err(_) => Ok(None),
        }
    }
}

struct TcpSink(TcpStream);

impl LineSink for TcpSink {
    fn send_line(&mut self, line: &str) -> io::Result<()> {
        let mut buf = Vec::with_capacity(line.len() + 1);
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
        self.0.write_all(&buf)?;
        self.0.flush()
    }
}

struct TcpSource(BufReader<TcpStream>);

impl LineSource for TcpSource {
    fn recv_line(&mut self) -> io::Result<Option<String>> {
        let mut line = String::new();
        if self.0.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        if line.pop() != Some('\n') {
            // peer closed mid-line
            return Ok(None);
        }
        if line.ends_with('\r') {
            line.pop();
        }
        Ok(Some(line))
    }
}

/// Typed, sequenced view over a connection.
pub struct Endpoint {
    sink: Box<dyn LineSink>,
    source: Box<dyn LineSource>,
    next_seq: u64,
}

impl Endpoint {
    pub fn new(conn: Connection) -> Self {
        let (sink, source) = conn.split();
        Self {
            sink,
            source,
            next_seq: 1,
        }
    }

    /// Sends a payload and returns the sequence number it went out with.
    pub fn send(&mut self, payload: Payload) -> Result<u64, ControlError> {
        let seq = self.next_seq;
        self.next_seq += 1;
        let line = encode(&ControlMessage { seq, payload });
        log::trace!("-> {line}");
        self.sink.send_line(&line)?;
        Ok(seq)
    }

    /// Next decoded message. Undecodable lines surface as protocol errors so
    /// the caller can decide whether to keep the connection.
    pub fn recv(&mut self) -> Result<Option<ControlMessage>, ControlError> {
        match self.source.recv_line()? {
            None => Ok(None),
            Some(line) => {
                log::trace!("<- {line}");
                Ok(Some(decode(&line)?))
            }
        }
    }

    /// Sends a request and waits for the reply that names it, discarding
    /// anything else that arrives first.
    pub fn request(&mut self, payload: Payload) -> Result<Payload, ControlError> {
        let seq = self.send(payload)?;
        loop {
            match self.recv()? {
                None => return Err(ControlError::Disconnected),
                Some(m) if m.payload.reply_to() == Some(seq) => return Ok(m.payload),
                Some(m) => log::debug!("dropping unsolicited {}", m.payload.type_name()),
            }
        }
    }

    /// Announces a role and waits for the broker's acknowledgement.
    pub fn hello(&mut self, role: Role, layout: Option<ris_core::Codebook>) -> Result<(), ControlError> {
        match self.request(Payload::Hello { role, layout })? {
            Payload::Ack { .. } => Ok(()),
            Payload::Error { code, text, .. } => Err(ControlError::Rejected { code, text }),
            other => Err(ControlError::Unexpected(other.type_name())),
        }
    }
}
