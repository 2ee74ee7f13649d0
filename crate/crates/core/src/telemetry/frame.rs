use serde::{Deserialize, Serialize};

use crate::firmware::Mode;

/// Snapshot of the drive taken at a control-period boundary (or every ISR
/// at the fine frame rate). Currents are the firmware's measured values;
/// `omega_m` and `torque` come from the plant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryFrame {
    pub t: f64,
    pub omega_ref: f64,
    pub omega_meas_filt: f64,
    pub omega_m: f64,
    pub torque: f64,
    pub i_a: f64,
    pub i_b: f64,
    pub i_c: f64,
    pub i_d: f64,
    pub i_q: f64,
    pub theta_e: f64,
    pub duty_a: f64,
    pub duty_b: f64,
    pub duty_c: f64,
    pub mode: Mode,
    pub pwm_enabled: bool,
    pub saturation: bool,
    pub trip: bool,
}

/// Column names in serialization order.
pub const FRAME_FIELDS: [&str; 18] = [
    "t",
    "omega_ref",
    "omega_meas_filt",
    "omega_m",
    "torque",
    "i_a",
    "i_b",
    "i_c",
    "i_d",
    "i_q",
    "theta_e",
    "duty_a",
    "duty_b",
    "duty_c",
    "mode",
    "pwm_enabled",
    "saturation",
    "trip",
];

impl TelemetryFrame {
    /// Field values as text, in [`FRAME_FIELDS`] order. Floats use the
    /// shortest representation that reads back to the same value.
    pub fn values(&self) -> [String; 18] {
        let f = |x: f64| x.to_string();
        [
            f(self.t),
            f(self.omega_ref),
            f(self.omega_meas_filt),
            f(self.omega_m),
            f(self.torque),
            f(self.i_a),
            f(self.i_b),
            f(self.i_c),
            f(self.i_d),
            f(self.i_q),
            f(self.theta_e),
            f(self.duty_a),
            f(self.duty_b),
            f(self.duty_c),
            self.mode.as_str().to_string(),
            self.pwm_enabled.to_string(),
            self.saturation.to_string(),
            self.trip.to_string(),
        ]
    }

    /// Inverse of [`TelemetryFrame::values`]; `get` looks a field up by name.
    pub fn from_fields<'a>(get: impl Fn(&str) -> Option<&'a str>) -> Result<Self, String> {
        let num = |k: &str| -> Result<f64, String> {
            let v = get(k).ok_or_else(|| format!("missing field {k}"))?;
            v.parse().map_err(|_| format!("bad number in {k}: '{v}'"))
        };
        let flag = |k: &str| -> Result<bool, String> {
            match get(k) {
                Some("true") => Ok(true),
                Some("false") => Ok(false),
                Some(v) => Err(format!("bad flag in {k}: '{v}'")),
                None => Err(format!("missing field {k}")),
            }
        };
        Ok(Self {
            t: num("t")?,
            omega_ref: num("omega_ref")?,
            omega_meas_filt: num("omega_meas_filt")?,
            omega_m: num("omega_m")?,
            torque: num("torque")?,
            i_a: num("i_a")?,
            i_b: num("i_b")?,
            i_c: num("i_c")?,
            i_d: num("i_d")?,
            i_q: num("i_q")?,
            theta_e: num("theta_e")?,
            duty_a: num("duty_a")?,
            duty_b: num("duty_b")?,
            duty_c: num("duty_c")?,
            mode: get("mode").ok_or("missing field mode")?.parse()?,
            pwm_enabled: flag("pwm_enabled")?,
            saturation: flag("saturation")?,
            trip: flag("trip")?,
        })
    }
}
