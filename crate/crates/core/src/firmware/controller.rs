//! Interrupt-level controller: measurement scaling, multi-rate dispatch,
//! FOC and V/f current control, speed loop and PWM write-back.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use super::flux::FluxEstimator;
use super::modulation::duties_from_alpha_beta;
use super::pi::PiRegulator;
use super::speed::{scale_current, speed_estimate, LowPass};
use super::transforms::{clarke, inverse_park, park};
use super::vf::VfState;
use crate::periph::shortest_delta;
use crate::plant::MotorParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[default]
    #[serde(alias = "idle", alias = "IDLE")]
    Idle,
    #[serde(rename = "VF", alias = "vf", alias = "Vf")]
    Vf,
    #[serde(rename = "FOC", alias = "foc", alias = "Foc")]
    Foc,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Idle => "Idle",
            Mode::Vf => "VF",
            Mode::Foc => "FOC",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Idle" | "idle" | "IDLE" => Ok(Mode::Idle),
            "VF" | "vf" | "Vf" => Ok(Mode::Vf),
            "FOC" | "foc" | "Foc" => Ok(Mode::Foc),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Gains {
    pub kp_id: f64,
    pub ki_id: f64,
    pub kp_iq: f64,
    pub ki_iq: f64,
    pub kp_w: f64,
    pub ki_w: f64,
    pub vf_volts_per_hz: f64,
    pub vf_boost: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            kp_id: 40.0,
            ki_id: 8000.0,
            kp_iq: 40.0,
            ki_iq: 8000.0,
            kp_w: 0.5,
            ki_w: 5.0,
            vf_volts_per_hz: 3.0,
            vf_boost: 4.0,
        }
    }
}

/// Names accepted by `SetGain`.
pub const GAIN_NAMES: [&str; 10] = [
    "kp_id",
    "ki_id",
    "kp_iq",
    "ki_iq",
    "kp_w",
    "ki_w",
    "vf_volts_per_hz",
    "vf_boost",
    "id_ref",
    "speed_filter_hz",
];

/// A tunable that can be written while running.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GainId {
    KpId,
    KiId,
    KpIq,
    KiIq,
    KpW,
    KiW,
    VfVoltsPerHz,
    VfBoost,
    IdRef,
    SpeedFilterHz,
}

impl GainId {
    const ALL: [GainId; 10] = [
        GainId::KpId,
        GainId::KiId,
        GainId::KpIq,
        GainId::KiIq,
        GainId::KpW,
        GainId::KiW,
        GainId::VfVoltsPerHz,
        GainId::VfBoost,
        GainId::IdRef,
        GainId::SpeedFilterHz,
    ];

    pub fn as_str(&self) -> &'static str {
        GAIN_NAMES[Self::ALL.iter().position(|g| g == self).unwrap()]
    }
}

impl fmt::Display for GainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GainId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GAIN_NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| Self::ALL[i])
            .ok_or_else(|| format!("unknown gain name '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Software overcurrent trip level, A.
    pub i_max: f64,
    /// Speed-loop output clamp, A.
    pub iq_max: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            i_max: 12.0,
            iq_max: 8.0,
        }
    }
}

/// Firmware variable routed to the monitoring DAC.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DacSignal {
    #[default]
    OmegaMeas,
    Iq,
    ThetaE,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlConfig {
    pub mode: Mode,
    pub ds_ireg: u32,
    pub gains: Gains,
    pub id_ref: f64,
    pub limits: Limits,
    pub speed_filter_hz: f64,
    pub offset_ia: f64,
    pub offset_ib: f64,
    /// Amps per ADC code.
    pub gain_i: f64,
    pub vf_slew_hz_per_s: f64,
    /// Reproduce the listing's `switch(countCurrent)` dispatch: current
    /// control only on count 0, speed control only on count 1.
    pub literal_dispatch: bool,
    pub dac_signal: DacSignal,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Idle,
            ds_ireg: 10,
            gains: Gains::default(),
            id_ref: 1.8,
            limits: Limits::default(),
            speed_filter_hz: 50.0,
            offset_ia: 1706.0,
            offset_ib: 1706.0,
            gain_i: 3.0 / (4095.0 * 8.2 * 0.01),
            vf_slew_hz_per_s: 25.0,
            literal_dispatch: false,
            dac_signal: DacSignal::OmegaMeas,
        }
    }
}

impl ControlConfig {
    pub fn set_gain(&mut self, gain: GainId, value: f64) {
        let g = &mut self.gains;
        match gain {
            GainId::KpId => g.kp_id = value,
            GainId::KiId => g.ki_id = value,
            GainId::KpIq => g.kp_iq = value,
            GainId::KiIq => g.ki_iq = value,
            GainId::KpW => g.kp_w = value,
            GainId::KiW => g.ki_w = value,
            GainId::VfVoltsPerHz => g.vf_volts_per_hz = value,
            GainId::VfBoost => g.vf_boost = value,
            GainId::IdRef => self.id_ref = value,
            GainId::SpeedFilterHz => self.speed_filter_hz = value,
        }
    }

    pub fn gain(&self, gain: GainId) -> f64 {
        let g = &self.gains;
        match gain {
            GainId::KpId => g.kp_id,
            GainId::KiId => g.ki_id,
            GainId::KpIq => g.kp_iq,
            GainId::KiIq => g.ki_iq,
            GainId::KpW => g.kp_w,
            GainId::KiW => g.ki_w,
            GainId::VfVoltsPerHz => g.vf_volts_per_hz,
            GainId::VfBoost => g.vf_boost,
            GainId::IdRef => self.id_ref,
            GainId::SpeedFilterHz => self.speed_filter_hz,
        }
    }
}

/// Sample times and machine constants the firmware is built with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlTiming {
    /// ISR period, s.
    pub ts_isr: f64,
    /// eQEP unit period, s.
    pub t_unit: f64,
    pub counts_per_rev: u32,
    pub v_dc: f64,
    pub pole_pairs: u32,
    /// Rotor time constant used by the flux model, s.
    pub tr: f64,
}

impl ControlTiming {
    pub fn new(ts_isr: f64, t_unit: f64, counts_per_rev: u32, v_dc: f64, machine: &MotorParams) -> Self {
        Self {
            ts_isr,
            t_unit,
            counts_per_rev,
            v_dc,
            pole_pairs: machine.pole_pairs,
            tr: machine.tr(),
        }
    }

    pub fn v_max(&self) -> f64 {
        self.v_dc / 3f64.sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ControlState {
    pub count_current: u32,
    pub flux: FluxEstimator,
    pub vf: VfState,
    pub pi_id: PiRegulator,
    pub pi_iq: PiRegulator,
    pub pi_w: PiRegulator,
    pub omega_ref: f64,
    pub omega_raw: f64,
    pub omega_meas_filt: f64,
    pub iq_ref: f64,
    pub duties: [f64; 3],
    pub pwm_enabled: bool,
    pub tripped: bool,
    pub last_qpos: Option<u32>,
    pub i_abc: [f64; 3],
    pub i_d: f64,
    pub i_q: f64,
    /// Sticky until read by [`Controller::take_saturation`].
    pub saturated: bool,
    pos_since_current: i64,
    isrs_since_current: u32,
}

/// Register values the ISR reads.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IsrInputs {
    pub code_a: u16,
    pub code_b: u16,
    pub qposcnt: u32,
    /// Latched delta when a unit time-out happened since the previous ISR.
    pub unit_delta: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsrOutput {
    pub duties: [f64; 3],
    pub pwm_enabled: bool,
    pub ran_current: bool,
    pub ran_speed: bool,
    /// The decimation counter wrapped: end of a control period.
    pub boundary: bool,
    pub dac_value: u32,
}

#[derive(Clone, Debug)]
pub struct Controller {
    config: ControlConfig,
    timing: ControlTiming,
    state: ControlState,
    speed_filter: LowPass,
    current_runs: u64,
    speed_runs: u64,
    clamp_events: u64,
    trips: u64,
}

impl Controller {
    pub fn new(config: ControlConfig, timing: ControlTiming) -> Self {
        assert!(config.ds_ireg >= 1);
        let ts_speed = timing.ts_isr * config.ds_ireg as f64;
        let speed_filter = LowPass::new(config.speed_filter_hz, ts_speed);
        let state = ControlState {
            duties: [0.5; 3],
            ..ControlState::default()
        };
        Self {
            config,
            timing,
            state,
            speed_filter,
            current_runs: 0,
            speed_runs: 0,
            clamp_events: 0,
            trips: 0,
        }
    }

    pub fn config(&self) -> &ControlConfig {
        &self.config
    }

    pub fn state(&self) -> &ControlState {
        &self.state
    }

    pub fn timing(&self) -> &ControlTiming {
        &self.timing
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn current_runs(&self) -> u64 {
        self.current_runs
    }

    pub fn speed_runs(&self) -> u64 {
        self.speed_runs
    }

    pub fn clamp_events(&self) -> u64 {
        self.clamp_events
    }

    pub fn trips(&self) -> u64 {
        self.trips
    }

    pub fn ts_speed(&self) -> f64 {
        self.timing.ts_isr * self.config.ds_ireg as f64
    }

    /// Whether the next ISR ends a control period.
    pub fn next_isr_is_boundary(&self) -> bool {
        self.state.count_current + 1 == self.config.ds_ireg
    }

    /// Reads and clears the sticky saturation flag.
    pub fn take_saturation(&mut self) -> bool {
        std::mem::take(&mut self.state.saturated)
    }

    pub fn set_speed_ref(&mut self, omega: f64) {
        self.state.omega_ref = omega;
    }

    pub fn set_mode(&mut self, mode: Mode) {
        if mode != self.config.mode {
            self.config.mode = mode;
            self.reset_regulators();
        }
    }

    pub fn set_gain(&mut self, gain: GainId, value: f64) {
        self.config.set_gain(gain, value);
        if gain == GainId::SpeedFilterHz {
            let ts = self.ts_speed();
            self.speed_filter.retune(value, ts);
        }
    }

    pub fn set_id_ref(&mut self, id_ref: f64) {
        self.config.id_ref = id_ref;
    }

    /// Enabling clears a trip and restarts the regulators from zero.
    pub fn set_pwm_enabled(&mut self, enabled: bool) {
        if enabled && !self.state.pwm_enabled {
            self.state.tripped = false;
            self.reset_regulators();
        }
        self.state.pwm_enabled = enabled;
        if !enabled {
            self.state.duties = [0.5; 3];
        }
    }

    fn reset_regulators(&mut self) {
        self.state.pi_id.reset();
        self.state.pi_iq.reset();
        self.state.pi_w.reset();
        self.state.iq_ref = 0.0;
        self.state.vf = VfState::default();
    }

    /// One end-of-conversion interrupt.
    pub fn isr(&mut self, inputs: &IsrInputs) -> IsrOutput {
        let gain_i = self.config.gain_i;
        let i_a = scale_current(inputs.code_a, self.config.offset_ia, gain_i);
        let i_b = scale_current(inputs.code_b, self.config.offset_ib, gain_i);
        self.state.i_abc = [i_a, i_b, -i_a - i_b];

        if let Some(delta) = inputs.unit_delta {
            self.state.omega_raw = speed_estimate(delta, self.timing.counts_per_rev, self.timing.t_unit);
        }
        if let Some(prev) = self.state.last_qpos {
            self.state.pos_since_current += shortest_delta(prev, inputs.qposcnt, self.timing.counts_per_rev);
        }
        self.state.last_qpos = Some(inputs.qposcnt);
        self.state.isrs_since_current += 1;

        let count = self.state.count_current;
        self.state.count_current = (count + 1) % self.config.ds_ireg;
        let boundary = self.state.count_current == 0;
        let (run_current, run_speed) = if self.config.literal_dispatch {
            (count == 0, count == 1)
        } else {
            (true, boundary)
        };

        if run_speed {
            self.speed_control();
        }
        if run_current {
            self.current_control();
        }
        IsrOutput {
            duties: self.state.duties,
            pwm_enabled: self.state.pwm_enabled,
            ran_current: run_current,
            ran_speed: run_speed,
            boundary,
            dac_value: self.dac_value(),
        }
    }

    fn speed_control(&mut self) {
        self.speed_runs += 1;
        let ts = self.ts_speed();
        self.state.omega_meas_filt = self.speed_filter.step(self.state.omega_raw);
        if !self.state.pwm_enabled {
            return;
        }
        match self.config.mode {
            Mode::Foc => {
                let lim = self.config.limits.iq_max;
                let g = self.config.gains;
                self.state.iq_ref = self.state.pi_w.step(
                    self.state.omega_ref - self.state.omega_meas_filt,
                    g.kp_w,
                    g.ki_w,
                    -lim,
                    lim,
                    ts,
                );
            }
            Mode::Vf => {
                let target = self.state.omega_ref * self.timing.pole_pairs as f64 / TAU;
                self.state.vf.ramp(target, self.config.vf_slew_hz_per_s, ts);
            }
            Mode::Idle => {}
        }
    }

    fn current_control(&mut self) {
        self.current_runs += 1;
        let elapsed = self.timing.ts_isr * self.state.isrs_since_current as f64;
        let dtheta_m = self.state.pos_since_current as f64 * TAU / self.timing.counts_per_rev as f64;
        self.state.isrs_since_current = 0;
        self.state.pos_since_current = 0;
        let omega_m = dtheta_m / elapsed;

        let [i_a, i_b, i_c] = self.state.i_abc;
        let peak = i_a.abs().max(i_b.abs()).max(i_c.abs());
        if self.state.pwm_enabled && peak > self.config.limits.i_max {
            self.state.pwm_enabled = false;
            self.state.tripped = true;
            self.trips += 1;
        }
        let enabled = self.state.pwm_enabled;
        let (i_alpha, i_beta) = clarke(i_a, i_b);
        let v_max = self.timing.v_max();
        let v_dc = self.timing.v_dc;

        let duties = match self.config.mode {
            Mode::Foc => {
                let (i_d, i_q) = park(i_alpha, i_beta, self.state.flux.theta_e);
                self.state.i_d = i_d;
                self.state.i_q = i_q;
                let g = self.config.gains;
                let mut v = (0.0, 0.0);
                if enabled {
                    let v_d = self
                        .state
                        .pi_id
                        .step(self.config.id_ref - i_d, g.kp_id, g.ki_id, -v_max, v_max, elapsed);
                    let vq_lim = (v_max * v_max - v_d * v_d).max(0.0).sqrt().max(1e-9);
                    let v_q =
                        self.state
                            .pi_iq
                            .step(self.state.iq_ref - i_q, g.kp_iq, g.ki_iq, -vq_lim, vq_lim, elapsed);
                    v = (v_d, v_q);
                }
                let (theta, _) =
                    self.state
                        .flux
                        .update(i_d, i_q, omega_m, elapsed, self.timing.tr, self.timing.pole_pairs);
                if enabled {
                    let (v_alpha, v_beta) = inverse_park(v.0, v.1, theta);
                    let (d, clamped) = duties_from_alpha_beta(v_alpha, v_beta, v_dc);
                    self.note_clamp(clamped);
                    d
                } else {
                    [0.5; 3]
                }
            }
            Mode::Vf => {
                let (i_d, i_q) = park(i_alpha, i_beta, self.state.vf.theta_v);
                self.state.i_d = i_d;
                self.state.i_q = i_q;
                if enabled {
                    let g = self.config.gains;
                    let out = self
                        .state
                        .vf
                        .control(g.vf_volts_per_hz, g.vf_boost, v_max, v_dc, elapsed);
                    self.note_clamp(out.saturated);
                    self.state.flux.theta_e = self.state.vf.theta_v;
                    out.duties
                } else {
                    [0.5; 3]
                }
            }
            Mode::Idle => {
                let (i_d, i_q) = park(i_alpha, i_beta, self.state.flux.theta_e);
                self.state.i_d = i_d;
                self.state.i_q = i_q;
                [0.5; 3]
            }
        };
        self.state.duties = duties;
    }

    fn note_clamp(&mut self, clamped: bool) {
        if clamped {
            self.clamp_events += 1;
            self.state.saturated = true;
        }
    }

    fn dac_value(&self) -> u32 {
        let (x, full) = match self.config.dac_signal {
            DacSignal::OmegaMeas => (self.state.omega_meas_filt, 400.0),
            DacSignal::Iq => (self.state.i_q, 16.0),
            DacSignal::ThetaE => (self.state.flux.theta_e - std::f64::consts::PI, std::f64::consts::PI),
        };
        (2048.0 + x / full * 2048.0).round().clamp(0.0, 4095.0) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timing() -> ControlTiming {
        ControlTiming::new(1e-4, 0.01, 4096, 300.0, &MotorParams::default())
    }

    fn zero_inputs() -> IsrInputs {
        IsrInputs {
            code_a: 1706,
            code_b: 1706,
            qposcnt: 0,
            unit_delta: None,
        }
    }

    #[test]
    fn dispatch_ratio_default() {
        let mut c = Controller::new(ControlConfig::default(), timing());
        for _ in 0..100 {
            c.isr(&zero_inputs());
        }
        assert_eq!(c.current_runs(), 100);
        assert_eq!(c.speed_runs(), 10);
    }

    #[test]
    fn dispatch_ratio_partial_period() {
        let mut c = Controller::new(ControlConfig::default(), timing());
        for _ in 0..25 {
            c.isr(&zero_inputs());
        }
        assert_eq!(c.speed_runs(), 2);
    }

    #[test]
    fn dispatch_every_isr_when_not_decimated() {
        let cfg = ControlConfig {
            ds_ireg: 1,
            ..ControlConfig::default()
        };
        let mut c = Controller::new(cfg, timing());
        for _ in 0..7 {
            let out = c.isr(&zero_inputs());
            assert!(out.ran_current && out.ran_speed && out.boundary);
        }
    }

    #[test]
    fn literal_dispatch_matches_listing() {
        let cfg = ControlConfig {
            literal_dispatch: true,
            ..ControlConfig::default()
        };
        let mut c = Controller::new(cfg, timing());
        for _ in 0..100 {
            c.isr(&zero_inputs());
        }
        assert_eq!(c.current_runs(), 10);
        assert_eq!(c.speed_runs(), 10);
    }

    #[test]
    fn inhibited_controller_holds_neutral() {
        let cfg = ControlConfig {
            mode: Mode::Foc,
            ..ControlConfig::default()
        };
        let mut c = Controller::new(cfg, timing());
        c.set_speed_ref(100.0);
        for k in 0..500 {
            let out = c.isr(&IsrInputs {
                code_a: 1800,
                code_b: 1650,
                qposcnt: k % 4096,
                unit_delta: Some(3),
            });
            assert_eq!(out.duties, [0.5; 3]);
        }
        let s = c.state();
        assert_eq!(s.pi_id.integ, 0.0);
        assert_eq!(s.pi_iq.integ, 0.0);
        assert_eq!(s.pi_w.integ, 0.0);
    }

    #[test]
    fn null_command_gives_neutral_duties() {
        let cfg = ControlConfig {
            mode: Mode::Foc,
            id_ref: 0.0,
            ..ControlConfig::default()
        };
        let mut c = Controller::new(cfg, timing());
        c.set_pwm_enabled(true);
        let out = c.isr(&zero_inputs());
        for d in out.duties {
            assert!((d - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn d_axis_error_produces_d_voltage() {
        // ki = 0, kp_id = 10, 1 A of d error at θ = 0 → v_d = 10 V, v_q = 0
        let mut cfg = ControlConfig {
            mode: Mode::Foc,
            id_ref: 1.0,
            ..ControlConfig::default()
        };
        cfg.gains.kp_id = 10.0;
        cfg.gains.ki_id = 0.0;
        cfg.gains.ki_iq = 0.0;
        let mut c = Controller::new(cfg, timing());
        c.set_pwm_enabled(true);
        let out = c.isr(&zero_inputs());
        // flux angle after one update with zero speed and zero i_q stays 0
        let (expected, _) = duties_from_alpha_beta(10.0, 0.0, 300.0);
        for (d, e) in out.duties.iter().zip(expected) {
            assert!((d - e).abs() < 1e-12);
        }
        assert!(out.duties[0] > 0.5);
    }

    #[test]
    fn overcurrent_trips() {
        let cfg = ControlConfig {
            mode: Mode::Foc,
            ..ControlConfig::default()
        };
        let mut c = Controller::new(cfg, timing());
        c.set_pwm_enabled(true);
        // about 13.4 A on phase a
        let out = c.isr(&IsrInputs {
            code_a: 1706 + 1500,
            ..zero_inputs()
        });
        assert!(!out.pwm_enabled);
        assert_eq!(out.duties, [0.5; 3]);
        assert!(c.state().tripped);
        assert_eq!(c.trips(), 1);
        c.set_pwm_enabled(true);
        assert!(!c.state().tripped);
    }

    #[test]
    fn speed_loop_zero_error_zero_iq() {
        let cfg = ControlConfig {
            mode: Mode::Foc,
            ds_ireg: 1,
            ..ControlConfig::default()
        };
        let mut c = Controller::new(cfg, timing());
        c.set_pwm_enabled(true);
        c.isr(&zero_inputs());
        assert_eq!(c.state().iq_ref, 0.0);
    }

    #[test]
    fn speed_loop_proportional_step() {
        // kp_w only: first speed-loop output is kp_w * step
        let mut cfg = ControlConfig {
            mode: Mode::Foc,
            ..ControlConfig::default()
        };
        cfg.gains.ki_w = 0.0;
        cfg.gains.kp_w = 0.05;
        let mut c = Controller::new(cfg, timing());
        c.set_pwm_enabled(true);
        c.set_speed_ref(100.0);
        for _ in 0..10 {
            c.isr(&zero_inputs());
        }
        assert!((c.state().iq_ref - 5.0).abs() < 1e-12);
    }

    #[test]
    fn gain_names_round_trip() {
        for name in GAIN_NAMES {
            let id: GainId = name.parse().unwrap();
            assert_eq!(id.as_str(), name);
        }
        assert!("kp_x".parse::<GainId>().is_err());
        let mut cfg = ControlConfig::default();
        cfg.set_gain(GainId::KpW, 0.9);
        assert_eq!(cfg.gain(GainId::KpW), 0.9);
    }

    #[test]
    fn unit_delta_updates_raw_speed() {
        let mut c = Controller::new(ControlConfig::default(), timing());
        c.isr(&IsrInputs {
            unit_delta: Some(4096),
            ..zero_inputs()
        });
        assert!((c.state().omega_raw - 628.318_530_717_958_6).abs() < 1e-9);
    }
}
