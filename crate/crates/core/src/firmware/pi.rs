//! PI regulator with conditional-integration anti-windup.

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PiRegulator {
    pub integ: f64,
    pub last_output: f64,
}

impl PiRegulator {
    /// One update. The integrator takes `ki * ts * err` unless the command
    /// would then saturate in the direction the error pushes; in that case
    /// it only advances as far as the limit and never moves further into
    /// saturation.
    pub fn step(&mut self, err: f64, kp: f64, ki: f64, out_min: f64, out_max: f64, ts: f64) -> f64 {
        debug_assert!(out_min < out_max && ts > 0.0);
        let candidate = self.integ + ki * ts * err;
        let raw = kp * err + candidate;
        self.integ = if raw > out_max && err > 0.0 {
            candidate.min(self.integ.max(out_max - kp * err))
        } else if raw < out_min && err < 0.0 {
            candidate.max(self.integ.min(out_min - kp * err))
        } else {
            candidate
        };
        self.last_output = (kp * err + self.integ).clamp(out_min, out_max);
        self.last_output
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}
