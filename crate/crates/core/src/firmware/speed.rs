//! Measurement scaling and speed estimation.

use std::f64::consts::TAU;

/// Converts an ADC result to amps: `(code − offset) · gain_i`.
pub fn scale_current(code: u16, offset: f64, gain_i: f64) -> f64 {
    (code as f64 - offset) * gain_i
}

/// Mechanical speed from a position change over one unit period.
pub fn speed_estimate(delta_counts: i64, counts_per_rev: u32, t_unit: f64) -> f64 {
    delta_counts as f64 * (TAU / counts_per_rev as f64) / t_unit
}

/// First-order low-pass filter, discretised with an exact pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowPass {
    alpha: f64,
    pub y: f64,
}

impl LowPass {
    pub fn new(cutoff_hz: f64, ts: f64) -> Self {
        let mut f = Self { alpha: 1.0, y: 0.0 };
        f.retune(cutoff_hz, ts);
        f
    }

    pub fn retune(&mut self, cutoff_hz: f64, ts: f64) {
        self.alpha = if cutoff_hz > 0.0 {
            1.0 - (-TAU * cutoff_hz * ts).exp()
        } else {
            1.0
        };
    }

    pub fn step(&mut self, x: f64) -> f64 {
        self.y += self.alpha * (x - self.y);
        self.y
    }
}
