//! Newline-delimited JSON wire format.
//!
//! Every message is one UTF-8 JSON object on one line with exactly three
//! top-level keys, in this order:
//!
//! ```text
//! {"type":"rssi_request","seq":7,"payload":{}}
//! ```
//!
//! `seq` increases strictly per connection and direction. Replies (`ack`,
//! `error`, `gen_done`, `rssi_response`, `cb_list`) name the request they
//! answer in `payload.of_seq`. Unknown payload fields and unknown top-level
//! keys are ignored when decoding.

use ris_core::Codebook;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Ris,
    Rx,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::User => "user",
            Role::Ris => "ris",
            Role::Rx => "rx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    AgentLost,
    BadAlgorithm,
    UnknownLocation,
    Busy,
    Timeout,
    NoAgent,
    BadRequest,
    StoreIo,
    Protocol,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::AgentLost => "agent_lost",
            ErrorCode::BadAlgorithm => "bad_algorithm",
            ErrorCode::UnknownLocation => "unknown_location",
            ErrorCode::Busy => "busy",
            ErrorCode::Timeout => "timeout",
            ErrorCode::NoAgent => "no_agent",
            ErrorCode::BadRequest => "bad_request",
            ErrorCode::StoreIo => "store_io",
            ErrorCode::Protocol => "protocol",
        }
    }
}

impl std::fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// RSSI values travel as JSON numbers; `-inf` (a null channel) becomes `null`.
mod dbm {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum Payload {
    Hello {
        role: Role,
        /// RIS agents announce their panel as an all-off codebook.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layout: Option<Codebook>,
    },
    Ack {
        of_seq: u64,
    },
    Error {
        of_seq: u64,
        code: ErrorCode,
        text: String,
    },
    GenRequest {
        location_id: String,
        algorithm_id: String,
    },
    GenDone {
        #[serde(default)]
        of_seq: u64,
        location_id: String,
        queries: u64,
        #[serde(with = "dbm")]
        rssi_dbm: f64,
    },
    SetCodebook {
        codebook: Codebook,
    },
    RssiRequest {},
    RssiResponse {
        #[serde(default)]
        of_seq: u64,
        #[serde(with = "dbm")]
        rssi_dbm: f64,
        frames: u32,
    },
    SaveCb {
        location_id: String,
        codebook: Codebook,
    },
    ApplyCb {
        location_id: String,
    },
    DeleteCb {
        location_id: String,
    },
    ListCb {},
    CbList {
        #[serde(default)]
        of_seq: u64,
        location_ids: Vec<String>,
    },
}

pub const MESSAGE_TYPES: [&str; 13] = [
    "hello",
    "ack",
    "error",
    "gen_request",
    "gen_done",
    "set_codebook",
    "rssi_request",
    "rssi_response",
    "save_cb",
    "apply_cb",
    "delete_cb",
    "list_cb",
    "cb_list",
];

impl Payload {
    pub fn type_name(&self) -> &'static str {
        match self {
            Payload::Hello { .. } => "hello",
            Payload::Ack { .. } => "ack",
            Payload::Error { .. } => "error",
            Payload::GenRequest { .. } => "gen_request",
            Payload::GenDone { .. } => "gen_done",
            Payload::SetCodebook { .. } => "set_codebook",
            Payload::RssiRequest {} => "rssi_request",
            Payload::RssiResponse { .. } => "rssi_response",
            Payload::SaveCb { .. } => "save_cb",
            Payload::ApplyCb { .. } => "apply_cb",
            Payload::DeleteCb { .. } => "delete_cb",
            Payload::ListCb {} => "list_cb",
            Payload::CbList { .. } => "cb_list",
        }
    }

    /// The request a reply answers, if this is a reply.
    pub fn reply_to(&self) -> Option<u64> {
        match self {
            Payload::Ack { of_seq }
            | Payload::Error { of_seq, .. }
            | Payload::GenDone { of_seq, .. }
            | Payload::RssiResponse { of_seq, .. }
            | Payload::CbList { of_seq, .. } => Some(*of_seq),
            _ => None,
        }
    }

    /// Copy of a reply re-addressed to another request.
    pub fn readdressed(&self, seq: u64) -> Payload {
        let mut p = self.clone();
        match &mut p {
            Payload::Ack { of_seq }
            | Payload::Error { of_seq, .. }
            | Payload::GenDone { of_seq, .. }
            | Payload::RssiResponse { of_seq, .. }
            | Payload::CbList { of_seq, .. } => *of_seq = seq,
            _ => {}
        }
        p
    }

    pub fn error(of_seq: u64, code: ErrorCode, text: impl Into<String>) -> Payload {
        Payload::Error {
            of_seq,
            code,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlMessage {
    pub seq: u64,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("malformed JSON at byte {offset}: {msg}")]
    Malformed { offset: usize, msg: String },
    #[error("message is not a JSON object")]
    NotAnObject,
    #[error("missing or invalid `{0}`")]
    MissingField(&'static str),
    #[error("unknown message type `{0}`")]
    UnknownType(String),
    #[error("bad `{kind}` payload: {msg}")]
    BadPayload { kind: String, msg: String },
}

#[derive(Serialize)]
struct WireOut<'a> {
    #[serde(rename = "type")]
    kind: &'a str,
    seq: u64,
    payload: &'a Value,
}

/// Encodes one message as a single line, without the trailing newline.
pub fn encode(msg: &ControlMessage) -> String {
    let tagged = serde_json::to_value(&msg.payload).expect("payload serializes");
    let payload = tagged
        .get("payload")
        .cloned()
        .unwrap_or_else(|| Value::Object(Map::new()));
    serde_json::to_string(&WireOut {
        kind: msg.payload.type_name(),
        seq: msg.seq,
        payload: &payload,
    })
    .expect("wire struct serializes")
}

/// Decodes one line; a single trailing `\n` is tolerated.
pub fn decode(line: &str) -> Result<ControlMessage, ProtocolError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let value: Value = serde_json::from_str(line).map_err(|e| ProtocolError::Malformed {
        offset: byte_offset(line, e.line(), e.column()),
        msg: e.to_string(),
    })?;
    let obj = value.as_object().ok_or(ProtocolError::NotAnObject)?;
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or(ProtocolError::MissingField("type"))?;
    let seq = obj
        .get("seq")
        .and_then(Value::as_u64)
        .ok_or(ProtocolError::MissingField("seq"))?;
    let payload = obj
        .get("payload")
        .filter(|p| p.is_object())
        .ok_or(ProtocolError::MissingField("payload"))?;
    if !MESSAGE_TYPES.contains(&kind) {
        return Err(ProtocolError::UnknownType(kind.to_string()));
    }
    let mut tagged = Map::new();
    tagged.insert("type".into(), Value::String(kind.to_string()));
    tagged.insert("payload".into(), payload.clone());
    let payload = Payload::deserialize(Value::Object(tagged)).map_err(|e| ProtocolError::BadPayload {
        kind: kind.to_string(),
        msg: e.to_string(),
    })?;
    Ok(ControlMessage { seq, payload })
}

// serde_json reports 1-based line and byte column
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (before + column.saturating_sub(1)).min(text.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ris_core::{Grid, STATES};

    fn msg(seq: u64, payload: Payload) -> ControlMessage {
        ControlMessage { seq, payload }
    }

    #[test]
    fn canonical_key_order() {
        assert_eq!(
            encode(&msg(7, Payload::RssiRequest {})),
            r#"{"type":"rssi_request","seq":7,"payload":{}}"#
        );
        assert_eq!(
            encode(&msg(1, Payload::Ack { of_seq: 3 })),
            r#"{"type":"ack","seq":1,"payload":{"of_seq":3}}"#
        );
    }

    #[test]
    fn codebook_travels_as_text() {
        let grid = Grid::full(1, 2).unwrap();
        let mut cb = ris_core::Codebook::all_off(&grid);
        cb.set(1, STATES[3]);
        let line = encode(&msg(2, Payload::SetCodebook { codebook: cb.clone() }));
        assert_eq!(
            line,
            r#"{"type":"set_codebook","seq":2,"payload":{"codebook":"RISCB v1 rows=1 cols=2\n03\n"}}"#
        );
        assert_eq!(decode(&line).unwrap().payload, Payload::SetCodebook { codebook: cb });
    }

    #[test]
    fn missing_seq_is_an_error() {
        assert_eq!(
            decode(r#"{"type":"rssi_request","payload":{}}"#),
            Err(ProtocolError::MissingField("seq"))
        );
        assert_eq!(
            decode(r#"{"type":"rssi_request","seq":-1,"payload":{}}"#),
            Err(ProtocolError::MissingField("seq"))
        );
        assert_eq!(
            decode(r#"{"type":"rssi_request","seq":1}"#),
            Err(ProtocolError::MissingField("payload"))
        );
        assert_eq!(decode(r#"[1,2]"#), Err(ProtocolError::NotAnObject));
    }

    #[test]
    fn malformed_json_reports_offset() {
        let line = r#"{"type":"ack","seq":1,"payload":{"of_seq":}}"#;
        match decode(line) {
            Err(ProtocolError::Malformed { offset, .. }) => {
                assert_eq!(&line[offset..offset + 1], "}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(decode(""), Err(ProtocolError::Malformed { offset: 0, .. })));
    }

    #[test]
    fn unknown_type_and_bad_payload() {
        assert_eq!(
            decode(r#"{"type":"reboot","seq":1,"payload":{}}"#),
            Err(ProtocolError::UnknownType("reboot".into()))
        );
        assert_eq!(
            decode(r#"{"type":"","seq":1,"payload":{}}"#),
            Err(ProtocolError::UnknownType("".into()))
        );
        assert!(matches!(
            decode(r#"{"type":"ack","seq":1,"payload":{}}"#),
            Err(ProtocolError::BadPayload { .. })
        ));
        assert!(matches!(
            decode(r#"{"type":"set_codebook","seq":1,"payload":{"codebook":"RISCB v1 rows=1 cols=1\n7\n"}}"#),
            Err(ProtocolError::BadPayload { .. })
        ));
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let m = decode(r#"{"type":"apply_cb","seq":4,"extra":true,"payload":{"location_id":"LocA","hint":1}}"#).unwrap();
        assert_eq!(m, msg(4, Payload::ApplyCb { location_id: "LocA".into() }));
    }

    #[test]
    fn infinite_rssi_round_trips_through_null() {
        let m = msg(3, Payload::RssiResponse { of_seq: 2, rssi_dbm: f64::NEG_INFINITY, frames: 50 });
        let line = encode(&m);
        assert!(line.contains(r#""rssi_dbm":null"#));
        assert_eq!(decode(&line).unwrap(), m);
    }

    #[test]
    fn readdressing_replies() {
        let p = Payload::CbList { of_seq: 1, location_ids: vec!["a".into()] };
        assert_eq!(p.readdressed(9).reply_to(), Some(9));
        assert_eq!(Payload::ListCb {}.readdressed(9).reply_to(), None);
    }
}
