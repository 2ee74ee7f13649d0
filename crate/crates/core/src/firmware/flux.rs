//! Indirect rotor-flux orientation: magnetizing-current model plus slip
//! relation, integrated at the current-loop rate.

use std::f64::consts::TAU;

/// Lower bound on the magnetizing current used in the slip relation.
pub const I_MR_FLOOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FluxEstimator {
    /// Electrical flux angle in `[0, 2π)`.
    pub theta_e: f64,
    pub i_mr: f64,
}

impl FluxEstimator {
    /// Advances the estimate by one sample of length `ts` and returns the new
    /// `(theta_e, i_mr)`.
    pub fn update(&mut self, i_d: f64, i_q: f64, omega_m: f64, ts: f64, tr: f64, pole_pairs: u32) -> (f64, f64) {
        self.i_mr += ts / tr * (i_d - self.i_mr);
        let slip = self.slip(i_q, tr);
        self.theta_e = wrap_angle(self.theta_e + (pole_pairs as f64 * omega_m + slip) * ts);
        (self.theta_e, self.i_mr)
    }

    /// Slip frequency i_q / (Tr · max(i_mr, floor)).
    pub fn slip(&self, i_q: f64, tr: f64) -> f64 {
        i_q / (tr * self.i_mr.max(I_MR_FLOOR))
    }
}

pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}
