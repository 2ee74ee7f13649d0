//! Line-oriented stream grammar. Each message is one line: a type tag
//! followed by space-separated `name=value` fields.
//!
//! ```text
//! FRAME t=0.1 omega_ref=120 omega_meas_filt=118.2 ... trip=false
//! CMD id=7 op=SetSpeedRef value=120
//! CMD id=8 op=SetGain name=kp_w value=0.4
//! ACK id=7
//! ERR id=8 invalid name: unknown gain name 'kp_x'
//! ERR id=- parse
//! STATS dropped=12
//! ```
//!
//! `ERR` carries the command id when one could be read and `-` otherwise;
//! everything after the id is free text. Lines that do not follow the
//! grammar are answered with `ERR id=- parse`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::frame::{TelemetryFrame, FRAME_FIELDS};
use crate::engine::{Command, CommandError};

#[derive(Clone, Debug, PartialEq)]
pub enum StreamMessage {
    Frame(TelemetryFrame),
    Command {
        id: u64,
        command: Command,
    },
    Ack {
        id: u64,
    },
    Error {
        id: Option<u64>,
        text: String,
    },
    /// Frames this client lost to back-pressure so far.
    Stats {
        dropped: u64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WireError {
    #[error("parse")]
    Parse { id: Option<u64> },
    #[error("invalid {0}")]
    Invalid(u64, CommandError),
}

impl WireError {
    pub fn id(&self) -> Option<u64> {
        match self {
            WireError::Parse { id } => *id,
            WireError::Invalid(id, _) => Some(*id),
        }
    }

    /// The `ERR` reply for this failure.
    pub fn reply(&self) -> StreamMessage {
        let text = match self {
            WireError::Parse { .. } => "parse".to_string(),
            WireError::Invalid(_, e) => format!("invalid {e}"),
        };
        StreamMessage::Error { id: self.id(), text }
    }
}

fn fields(tokens: &[&str]) -> Option<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok.split_once('=')?;
        if k.is_empty() || out.insert(k.to_string(), v.to_string()).is_some() {
            return None;
        }
    }
    Some(out)
}

fn parse_id(s: &str) -> Option<u64> {
    s.strip_prefix("id=")?.parse().ok()
}

impl StreamMessage {
    pub fn encode(&self) -> String {
        let mut s = String::new();
        match self {
            StreamMessage::Frame(f) => {
                s.push_str("FRAME");
                for (k, v) in FRAME_FIELDS.iter().zip(f.values()) {
                    let _ = write!(s, " {k}={v}");
                }
            }
            StreamMessage::Command { id, command } => {
                let _ = write!(s, "CMD id={id} op={}", command.op());
                for (k, v) in command.args() {
                    let _ = write!(s, " {k}={v}");
                }
            }
            StreamMessage::Ack { id } => {
                let _ = write!(s, "ACK id={id}");
            }
            StreamMessage::Error { id, text } => {
                let id = id.map_or("-".to_string(), |i| i.to_string());
                let text = text.replace(['\n', '\r'], " ");
                let _ = write!(s, "ERR id={id} {text}");
            }
            StreamMessage::Stats { dropped } => {
                let _ = write!(s, "STATS dropped={dropped}");
            }
        }
        s
    }

    pub fn decode(line: &str) -> Result<Self, WireError> {
        let line = line.trim_end_matches(['\n', '\r']);
        let parse = WireError::Parse { id: None };
        let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
        match tag {
            "FRAME" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let map = fields(&toks).ok_or(parse.clone())?;
                if map.len() != FRAME_FIELDS.len() {
                    return Err(parse);
                }
                TelemetryFrame::from_fields(|k| map.get(k).map(String::as_str))
                    .map(StreamMessage::Frame)
                    .map_err(|_| parse)
            }
            "CMD" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let id = toks.first().and_then(|t| parse_id(t)).ok_or(parse)?;
                let mut map = fields(&toks[1..]).ok_or(WireError::Parse { id: Some(id) })?;
                let op = map.remove("op").ok_or(WireError::Parse { id: Some(id) })?;
                let command = Command::from_args(&op, &map).map_err(|e| WireError::Invalid(id, e))?;
                Ok(StreamMessage::Command { id, command })
            }
            "ACK" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                match toks.as_slice() {
                    [t] => parse_id(t).map(|id| StreamMessage::Ack { id }).ok_or(parse),
                    _ => Err(parse),
                }
            }
            "ERR" => {
                let (id_tok, text) = rest.split_once(' ').unwrap_or((rest, ""));
                let id = match id_tok {
                    "id=-" => None,
                    t => Some(parse_id(t).ok_or(parse)?),
                };
                Ok(StreamMessage::Error {
                    id,
                    text: text.to_string(),
                })
            }
            "STATS" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                match toks.as_slice() {
                    [t] => t
                        .strip_prefix("dropped=")
                        .and_then(|v| v.parse().ok())
                        .map(|dropped| StreamMessage::Stats { dropped })
                        .ok_or(parse),
                    _ => Err(parse),
                }
            }
            _ => Err(parse),
        }
    }
}
