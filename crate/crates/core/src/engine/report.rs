//! Run summary and per-step response metrics.

use serde::Serialize;

use crate::plant::MotorState;

/// Settling band as a fraction of the target.
pub const SETTLING_BAND: f64 = 0.02;
/// Length of the window averaged for the steady-state error, s.
pub const STEADY_WINDOW: f64 = 0.1;

/// Response to one speed-reference change, sampled at control-period
/// boundaries from the plant speed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepMetrics {
    /// Time the new reference took effect, s.
    pub t_applied: f64,
    pub from: f64,
    pub target: f64,
    /// Time from `t_applied` until the speed stays inside the band for the
    /// rest of the window; `None` when it never settles.
    pub settling_time: Option<f64>,
    /// Peak excursion past the target in the direction of the step, as a
    /// percentage of the step size.
    pub overshoot_pct: f64,
    /// |mean speed − target| over the last part of the window, rad/s.
    pub steady_state_error: f64,
    /// Mean firmware i_q from the command until the speed first enters the
    /// band (whole window if it never does).
    pub mean_iq_accel: f64,
    /// End of the observation window, s.
    pub t_end: f64,
}

impl StepMetrics {
    pub fn steady_state_error_pct(&self) -> f64 {
        100.0 * self.steady_state_error / self.target.abs().max(f64::EPSILON)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct StepTracker {
    t_applied: f64,
    from: f64,
    target: f64,
    band: f64,
    /// Samples of (t, ω_m).
    samples: Vec<(f64, f64)>,
    iq_sum: f64,
    iq_n: u64,
    entered: bool,
}

impl StepTracker {
    pub(crate) fn new(t_applied: f64, from: f64, target: f64) -> Self {
        let scale = if target != 0.0 {
            target.abs()
        } else {
            (target - from).abs()
        };
        Self {
            t_applied,
            from,
            target,
            band: SETTLING_BAND * scale,
            samples: Vec::new(),
            iq_sum: 0.0,
            iq_n: 0,
            entered: false,
        }
    }

    pub(crate) fn sample(&mut self, t: f64, omega: f64, i_q: f64) {
        self.samples.push((t, omega));
        if !self.entered && (omega - self.target).abs() <= self.band {
            self.entered = true;
        }
        if !self.entered {
            self.iq_sum += i_q;
            self.iq_n += 1;
        }
    }

    pub(crate) fn finish(self, t_end: f64) -> StepMetrics {
        let dir = (self.target - self.from).signum();
        let step = (self.target - self.from).abs();
        let mut settled_at = Some(self.t_applied);
        let mut peak: f64 = 0.0;
        for (i, &(_, w)) in self.samples.iter().enumerate() {
            if (w - self.target).abs() > self.band {
                settled_at = self.samples.get(i + 1).map(|s| s.0);
            }
            peak = peak.max((w - self.target) * dir);
        }
        let steady: Vec<f64> = self
            .samples
            .iter()
            .filter(|(t, _)| *t >= t_end - STEADY_WINDOW)
            .map(|s| s.1)
            .collect();
        let steady_state_error = if steady.is_empty() {
            f64::NAN
        } else {
            (steady.iter().sum::<f64>() / steady.len() as f64 - self.target).abs()
        };
        StepMetrics {
            t_applied: self.t_applied,
            from: self.from,
            target: self.target,
            settling_time: settled_at.map(|t| t - self.t_applied),
            overshoot_pct: if step > 0.0 { 100.0 * peak / step } else { 0.0 },
            steady_state_error,
            mean_iq_accel: if self.iq_n > 0 {
                self.iq_sum / self.iq_n as f64
            } else {
                0.0
            },
            t_end,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub total_ticks: u64,
    pub duration: f64,
    /// Counter-zero instants inside the run, one per PWM period started.
    pub pwm_periods: u64,
    pub soc_count: u64,
    pub isr_count: u64,
    pub current_ctrl_count: u64,
    pub speed_ctrl_count: u64,
    pub qep_timeouts: u64,
    pub frames: u64,
    pub final_state: MotorState,
    pub max_abs_phase_current: f64,
    pub max_abs_torque: f64,
    pub duty_clamp_events: u64,
    pub trips: u64,
    pub adc_saturations: u64,
    pub adc_overruns: u64,
    pub qep_glitches: u64,
    pub dac_masked_writes: u64,
    pub steps: Vec<StepMetrics>,
}
