//! Run-time commands shared by scenario timelines and the live stream.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::firmware::{GainId, Mode};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Command {
    /// Mechanical speed reference, rad/s.
    SetSpeedRef(f64),
    SetMode(Mode),
    /// Load torque, N·m.
    SetLoadTorque(f64),
    SetGain(GainId, f64),
    PwmEnable(bool),
    /// d-axis current reference, A.
    SetIdRef(f64),
}

/// Problem with one command argument. `field` is the argument name, or
/// `op` when the command name itself is wrong.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{field}: {message}")]
pub struct CommandError {
    pub field: String,
    pub message: String,
}

impl CommandError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub const COMMAND_NAMES: [&str; 6] = [
    "SetSpeedRef",
    "SetMode",
    "SetLoadTorque",
    "SetGain",
    "PwmEnable",
    "SetIdRef",
];

fn number(args: &BTreeMap<String, String>, key: &str) -> Result<f64, CommandError> {
    let raw = args.get(key).ok_or_else(|| CommandError::new(key, "missing"))?;
    let v: f64 = raw
        .parse()
        .map_err(|_| CommandError::new(key, format!("not a number: '{raw}'")))?;
    if !v.is_finite() {
        return Err(CommandError::new(key, "must be finite"));
    }
    Ok(v)
}

fn text<'a>(args: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str, CommandError> {
    args.get(key)
        .map(String::as_str)
        .ok_or_else(|| CommandError::new(key, "missing"))
}

impl Command {
    /// Builds a command from its name and textual arguments. Unknown
    /// arguments are rejected.
    pub fn from_args(op: &str, args: &BTreeMap<String, String>) -> Result<Self, CommandError> {
        let allowed: &[&str] = match op {
            "SetGain" => &["name", "value"],
            "SetMode" => &["mode"],
            _ => &["value"],
        };
        if let Some(extra) = args.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CommandError::new(extra, "unexpected argument"));
        }
        match op {
            "SetSpeedRef" => Ok(Command::SetSpeedRef(number(args, "value")?)),
            "SetLoadTorque" => Ok(Command::SetLoadTorque(number(args, "value")?)),
            "SetIdRef" => Ok(Command::SetIdRef(number(args, "value")?)),
            "SetMode" => {
                let m = text(args, "mode")?;
                m.parse()
                    .map(Command::SetMode)
                    .map_err(|e| CommandError::new("mode", e))
            }
            "SetGain" => {
                let name = text(args, "name")?;
                let id: GainId = name.parse().map_err(|e| CommandError::new("name", e))?;
                Ok(Command::SetGain(id, number(args, "value")?))
            }
            "PwmEnable" => match text(args, "value")? {
                "true" | "1" => Ok(Command::PwmEnable(true)),
                "false" | "0" => Ok(Command::PwmEnable(false)),
                other => Err(CommandError::new("value", format!("not a boolean: '{other}'"))),
            },
            other => Err(CommandError::new("op", format!("unknown command '{other}'"))),
        }
    }

    pub fn op(&self) -> &'static str {
        match self {
            Command::SetSpeedRef(_) => "SetSpeedRef",
            Command::SetMode(_) => "SetMode",
            Command::SetLoadTorque(_) => "SetLoadTorque",
            Command::SetGain(..) => "SetGain",
            Command::PwmEnable(_) => "PwmEnable",
            Command::SetIdRef(_) => "SetIdRef",
        }
    }

    /// Arguments in the textual form accepted by [`Command::from_args`].
    pub fn args(&self) -> Vec<(&'static str, String)> {
        match *self {
            Command::SetSpeedRef(v) | Command::SetLoadTorque(v) | Command::SetIdRef(v) => {
                vec![("value", v.to_string())]
            }
            Command::SetMode(m) => vec![("mode", m.as_str().to_string())],
            Command::SetGain(id, v) => vec![("name", id.as_str().to_string()), ("value", v.to_string())],
            Command::PwmEnable(b) => vec![("value", b.to_string())],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op())?;
        for (k, v) in self.args() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
