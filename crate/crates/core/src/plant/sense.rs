//! Shunt resistor followed by an isolation amplifier centred on `v_cm`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SenseChain {
    pub r_shunt: f64,
    pub amp_gain: f64,
    pub v_cm: f64,
    /// Amplifier input clip, volts differential.
    pub clip: f64,
}

impl Default for SenseChain {
    fn default() -> Self {
        Self {
            r_shunt: 0.01,
            amp_gain: 8.2,
            v_cm: 1.25,
            clip: 0.25,
        }
    }
}

impl SenseChain {
    /// Amplifier output for phase current `i`; the flag is set when the
    /// input clipped.
    pub fn output(&self, i: f64) -> (f64, bool) {
        let v_in = i * self.r_shunt;
        let clipped = v_in.clamp(-self.clip, self.clip);
        (self.v_cm + self.amp_gain * clipped, clipped != v_in)
    }

    /// Outputs for the two sensed phases.
    pub fn sense_voltages(&self, i_a: f64, i_b: f64) -> ((f64, bool), (f64, bool)) {
        (self.output(i_a), self.output(i_b))
    }

    /// Amps per volt at the amplifier output.
    pub fn amps_per_volt(&self) -> f64 {
        1.0 / (self.amp_gain * self.r_shunt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_output() {
        assert_eq!(SenseChain::default().output(0.0), (1.25, false));
    }

    #[test]
    fn ten_amps() {
        let (v, sat) = SenseChain::default().output(10.0);
        assert!((v - 2.07).abs() < 1e-12);
        assert!(!sat);
    }

    #[test]
    fn clipping() {
        let chain = SenseChain::default();
        let (v, sat) = chain.output(100.0);
        assert!((v - 3.30).abs() < 1e-12);
        assert!(sat);
        let (v, sat) = chain.output(-100.0);
        assert!((v - (1.25 - 2.05)).abs() < 1e-12);
        assert!(sat);
    }
}
