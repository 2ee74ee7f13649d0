//! Open-loop V/f scalar control.

use std::f64::consts::TAU;

use super::flux::wrap_angle;
use super::modulation::duties_from_alpha_beta;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VfState {
    /// Stator frequency, Hz (signed: negative turns backwards).
    pub freq_hz: f64,
    pub theta_v: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VfOutput {
    pub duties: [f64; 3],
    pub amplitude: f64,
    /// Amplitude limited to `v_max` or a duty clamped.
    pub saturated: bool,
}

impl VfState {
    /// Moves the frequency toward `target_hz` by at most `slew * ts`.
    pub fn ramp(&mut self, target_hz: f64, slew_hz_per_s: f64, ts: f64) {
        let step = slew_hz_per_s * ts;
        self.freq_hz += (target_hz - self.freq_hz).clamp(-step, step);
    }

    /// One modulation update at the current-loop rate.
    pub fn control(&mut self, volts_per_hz: f64, boost: f64, v_max: f64, v_dc: f64, ts: f64) -> VfOutput {
        let wanted = boost + volts_per_hz * self.freq_hz.abs();
        let amplitude = wanted.clamp(0.0, v_max);
        self.theta_v = wrap_angle(self.theta_v + TAU * self.freq_hz * ts);
        let (s, c) = self.theta_v.sin_cos();
        let (duties, clamped) = duties_from_alpha_beta(amplitude * c, amplitude * s, v_dc);
        VfOutput {
            duties,
            amplitude,
            saturated: clamped || amplitude != wanted,
        }
    }
}
