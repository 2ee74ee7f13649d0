//! Three-phase two-level voltage-source inverter feeding an isolated star
//! load.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// Gate-level switching with dead-band intervals resolved by current sign.
    #[default]
    Switched,
    /// Period-averaged pole voltages from the active compare values.
    Averaged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverterConfig {
    pub v_dc: f64,
    pub coupling: Coupling,
}

impl Default for InverterConfig {
    fn default() -> Self {
        Self {
            v_dc: 300.0,
            coupling: Coupling::Switched,
        }
    }
}

/// How one inverter leg is driven over an integration interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LegDrive {
    /// High-side switch on.
    High,
    /// Low-side switch on.
    Low,
    /// Both switches off; a freewheeling diode carries the current.
    Off,
    /// Averaged model: fraction of time the high side conducts.
    Duty(f64),
}

impl LegDrive {
    /// Leg state from the gate outputs: `high` drives the upper switch,
    /// `low` the lower one.
    pub fn from_gates(high: bool, low: bool) -> Self {
        match (high, low) {
            (true, false) => LegDrive::High,
            (false, true) => LegDrive::Low,
            // Shoot-through never comes out of the dead-band generator; treat
            // it like a blanked leg rather than modelling a short.
            _ => LegDrive::Off,
        }
    }
}

fn pole_voltage(leg: LegDrive, current: f64, v_dc: f64) -> f64 {
    match leg {
        LegDrive::High => v_dc,
        LegDrive::Low => 0.0,
        LegDrive::Off => {
            if current < 0.0 {
                v_dc
            } else {
                0.0
            }
        }
        LegDrive::Duty(d) => d * v_dc,
    }
}

/// Line-to-neutral phase voltages for the given leg drives. `currents` are
/// the phase currents flowing out of the legs into the load.
pub fn inverter_voltages(legs: [LegDrive; 3], currents: [f64; 3], v_dc: f64) -> [f64; 3] {
    let poles = [
        pole_voltage(legs[0], currents[0], v_dc),
        pole_voltage(legs[1], currents[1], v_dc),
        pole_voltage(legs[2], currents[2], v_dc),
    ];
    let common = (poles[0] + poles[1] + poles[2]) / 3.0;
    [poles[0] - common, poles[1] - common, poles[2] - common]
}

/// Amplitude-invariant Clarke transform of a balanced phase-voltage set.
pub fn phase_to_alpha_beta(v: [f64; 3]) -> (f64, f64) {
    ((2.0 * v[0] - v[1] - v[2]) / 3.0, (v[1] - v[2]) / 3f64.sqrt())
}
