//! Event-driven simulation core.
//!
//! Time is an integer count of system-clock ticks. Each step integrates the
//! plant up to the earliest pending event (PWM output edge, SOC, end of
//! conversion, eQEP unit time-out, substep boundary), then handles every
//! event due at that tick in a fixed order: PWM edges, SOC, eQEP time-out,
//! ADC interrupt. Commands are applied at the end of the ISR that closes a
//! control period, after which a frame is emitted.

mod command;
mod report;
mod scenario;

use std::f64::consts::{PI, TAU};
use std::sync::mpsc::{channel, Receiver, Sender};

use thiserror::Error;

pub use command::{Command, CommandError, COMMAND_NAMES};
pub use report::{RunReport, StepMetrics, SETTLING_BAND, STEADY_WINDOW};
pub use scenario::{
    default_scaling, load_scenario, AdcConfig, EncoderConfig, FrameRate, Scenario, ScenarioError, SimConfig,
    TimedCommand,
};

use crate::firmware::{ControlTiming, Controller, IsrInputs};
use crate::periph::{AdcUnit, DacUnit, PwmChannel, PwmConfig, PwmEdge, PwmOutput, QepConfig, QepEdge, QepState};
use crate::plant::{
    integrate, inverter_voltages, phase_to_alpha_beta, Coupling, Encoder, EncoderEdge, LegDrive, MotorState,
    PlantInputs,
};
use crate::telemetry::{TelemetryError, TelemetryFrame, TelemetrySink};
use report::StepTracker;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("plant diverged at tick {tick} (t = {time} s)")]
    Divergence {
        tick: u64,
        time: f64,
        last_state: MotorState,
    },
    #[error("telemetry sink: {0}")]
    Sink(#[from] TelemetryError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    PwmEdge {
        channel: usize,
        output: PwmOutput,
        level: bool,
    },
    EncoderEdge(QepEdge),
    Soc,
    QepTimeout {
        qposlat: u32,
        delta: i64,
    },
    Isr,
    Command(Command),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEvent {
    pub tick: u64,
    pub kind: EventKind,
}

fn phase_currents(s: &MotorState) -> [f64; 3] {
    let i_a = s.i_alpha;
    let i_b = 0.5 * (-s.i_alpha + 3f64.sqrt() * s.i_beta);
    [i_a, i_b, -i_a - i_b]
}

pub struct Engine {
    scenario: Scenario,
    end_tick: u64,
    substep: u64,
    now: u64,
    pwm: [PwmChannel; 3],
    /// Cached next output edge per channel; `None` means "recompute".
    edge_cache: [Option<Option<u64>>; 3],
    gates_enabled: bool,
    next_soc: Option<u64>,
    pending_eoc: Option<u64>,
    adc_a: AdcUnit,
    adc_b: AdcUnit,
    dac: DacUnit,
    qep: QepState,
    encoder: Encoder,
    motor: MotorState,
    theta_unwrapped: f64,
    load_torque: f64,
    controller: Controller,
    next_cmd: usize,
    inbox: Option<Receiver<Command>>,
    frames: Vec<TelemetryFrame>,
    frame_count: u64,
    trace: Option<Vec<TraceEvent>>,
    soc_count: u64,
    isr_count: u64,
    qep_timeouts: u64,
    duty_clamps: u64,
    max_abs_current: f64,
    max_abs_torque: f64,
    step: Option<StepTracker>,
    steps: Vec<StepMetrics>,
    edge_buf: Vec<PwmEdge>,
    enc_buf: Vec<EncoderEdge>,
}

impl Engine {
    pub fn new(scenario: &Scenario) -> Self {
        let sim = &scenario.sim;
        let channel = |k: usize| {
            PwmChannel::new(PwmConfig {
                tbprd: sim.tbprd,
                db_red: sim.deadband_ticks,
                db_fed: sim.deadband_ticks,
                initial_duty: 0.5,
                clock_enabled: true,
                soc_on_period: k == 0,
                force_low: true,
            })
        };
        let adc = || AdcUnit::new(sim.acqps, sim.conv_ticks, scenario.adc.v_ref, scenario.adc.bits);
        let cpr = 4 * scenario.encoder.lines;
        let timing = ControlTiming::new(
            sim.period_ticks() as f64 / sim.f_sys,
            scenario.encoder.quprd as f64 / sim.f_sys,
            cpr,
            scenario.inverter.v_dc,
            &scenario.motor,
        );
        let pwm = [channel(0), channel(1), channel(2)];
        let next_soc = pwm[0].next_soc_tick(0);
        let mut engine = Self {
            end_tick: sim.end_tick(),
            substep: sim.substep_ticks(),
            now: 0,
            pwm,
            edge_cache: [None; 3],
            gates_enabled: false,
            next_soc,
            pending_eoc: None,
            adc_a: adc(),
            adc_b: adc(),
            dac: DacUnit::new(scenario.adc.v_ref),
            qep: QepState::new(QepConfig {
                qposmax: cpr - 1,
                qposinit: scenario.encoder.qposinit,
                quprd: scenario.encoder.quprd,
                index_reset_on_rising: true,
            }),
            encoder: Encoder::new(scenario.encoder.lines, 0.0),
            motor: MotorState::default(),
            theta_unwrapped: 0.0,
            load_torque: 0.0,
            controller: Controller::new(scenario.control.clone(), timing),
            next_cmd: 0,
            inbox: None,
            frames: Vec::new(),
            frame_count: 0,
            trace: None,
            soc_count: 0,
            isr_count: 0,
            qep_timeouts: 0,
            duty_clamps: 0,
            max_abs_current: 0.0,
            max_abs_torque: 0.0,
            step: None,
            steps: Vec::new(),
            edge_buf: Vec::new(),
            enc_buf: Vec::new(),
            scenario: scenario.clone(),
        };
        engine.process_events(0);
        engine
    }

    /// Records every processed event from now on.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Sender for commands applied at the next control-period boundary.
    pub fn command_sender(&mut self) -> Sender<Command> {
        let (tx, rx) = channel();
        self.inbox = Some(rx);
        tx
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn time(&self) -> f64 {
        self.now as f64 / self.scenario.sim.f_sys
    }

    pub fn end_tick(&self) -> u64 {
        self.end_tick
    }

    pub fn is_finished(&self) -> bool {
        self.now >= self.end_tick
    }

    pub fn motor(&self) -> &MotorState {
        &self.motor
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn pwm(&self, k: usize) -> &PwmChannel {
        &self.pwm[k]
    }

    pub fn qep(&self) -> &QepState {
        &self.qep
    }

    pub fn dac(&self) -> &DacUnit {
        &self.dac
    }

    pub fn isr_count(&self) -> u64 {
        self.isr_count
    }

    pub fn soc_count(&self) -> u64 {
        self.soc_count
    }

    /// Frames emitted since the last call.
    pub fn drain_frames(&mut self) -> Vec<TelemetryFrame> {
        std::mem::take(&mut self.frames)
    }

    fn edge_tick(&mut self, k: usize) -> Option<u64> {
        if self.edge_cache[k].is_none() {
            self.edge_cache[k] = Some(self.pwm[k].next_edge_tick());
        }
        self.edge_cache[k].flatten()
    }

    /// Tick of the next event after `now`, capped by the substep and the end.
    pub fn next_event_tick(&mut self) -> u64 {
        let mut t = (self.now + self.substep).min(self.end_tick);
        match self.scenario.sim.coupling {
            Coupling::Switched => {
                for k in 0..3 {
                    if let Some(e) = self.edge_tick(k) {
                        t = t.min(e);
                    }
                }
            }
            Coupling::Averaged => {
                if let Some(z) = self.pwm[0].next_zero_tick(self.now + 1) {
                    t = t.min(z);
                }
            }
        }
        for e in [self.next_soc, self.pending_eoc, Some(self.qep.next_timeout())]
            .into_iter()
            .flatten()
        {
            t = t.min(e);
        }
        debug_assert!(t > self.now);
        t
    }

    /// Integrates to the next event and processes everything due there.
    pub fn step_to_next_event(&mut self) -> Result<(), EngineError> {
        if self.is_finished() {
            return Ok(());
        }
        let next = self.next_event_tick();
        self.integrate_to(next)?;
        self.now = next;
        if next < self.end_tick {
            self.process_events(next);
        }
        Ok(())
    }

    /// Runs until `tick` (or the end of the scenario).
    pub fn run_until(&mut self, tick: u64) -> Result<(), EngineError> {
        let tick = tick.min(self.end_tick);
        while self.now < tick {
            // never step past the requested tick
            let saved = self.end_tick;
            self.end_tick = tick;
            let r = self.step_to_next_event();
            self.end_tick = saved;
            r?;
            if self.now == tick && tick < saved {
                self.process_events(tick);
            }
        }
        Ok(())
    }

    fn leg_drives(&self) -> [LegDrive; 3] {
        let mut legs = [LegDrive::Off; 3];
        for (leg, ch) in legs.iter_mut().zip(&self.pwm) {
            *leg = match self.scenario.sim.coupling {
                Coupling::Switched => {
                    let (a, b) = ch.outputs();
                    LegDrive::from_gates(b, a)
                }
                Coupling::Averaged if ch.forced_low() => LegDrive::Off,
                Coupling::Averaged => LegDrive::Duty(ch.pole_duty()),
            };
        }
        legs
    }

    fn integrate_to(&mut self, next: u64) -> Result<(), EngineError> {
        let f_sys = self.scenario.sim.f_sys;
        let h = (next - self.now) as f64 / f_sys;
        let currents = phase_currents(&self.motor);
        let v = inverter_voltages(self.leg_drives(), currents, self.scenario.inverter.v_dc);
        let (v_alpha, v_beta) = phase_to_alpha_beta(v);
        let inputs = PlantInputs {
            v_alpha,
            v_beta,
            load_torque: self.load_torque,
        };
        let new = integrate(&self.motor, &inputs, h, &self.scenario.motor).map_err(|_| EngineError::Divergence {
            tick: next,
            time: next as f64 / f_sys,
            last_state: self.motor,
        })?;
        let mut d = new.theta_m - self.motor.theta_m;
        d -= TAU * ((d + PI) / TAU).floor();
        let from = (self.now, self.theta_unwrapped);
        self.theta_unwrapped += d;
        self.motor = new;

        self.enc_buf.clear();
        self.encoder
            .segment(from, (next, self.theta_unwrapped), &mut self.enc_buf);
        for e in &self.enc_buf {
            self.qep.apply_edge(e.edge);
            if let Some(tr) = self.trace.as_mut() {
                tr.push(TraceEvent {
                    tick: e.tick,
                    kind: EventKind::EncoderEdge(e.edge),
                });
            }
        }

        for i in phase_currents(&self.motor) {
            self.max_abs_current = self.max_abs_current.max(i.abs());
        }
        self.max_abs_torque = self.max_abs_torque.max(self.motor.torque(&self.scenario.motor).abs());
        Ok(())
    }

    fn record_pwm_edges(&mut self, k: usize) {
        if self.edge_buf.is_empty() {
            return;
        }
        self.edge_cache[k] = None;
        if let Some(tr) = self.trace.as_mut() {
            for e in &self.edge_buf {
                tr.push(TraceEvent {
                    tick: e.tick,
                    kind: EventKind::PwmEdge {
                        channel: k,
                        output: e.output,
                        level: e.level,
                    },
                });
            }
        }
        self.edge_buf.clear();
    }

    fn push_trace(&mut self, tick: u64, kind: EventKind) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(TraceEvent { tick, kind });
        }
    }

    fn process_events(&mut self, now: u64) {
        for k in 0..3 {
            self.pwm[k].advance(now, &mut self.edge_buf);
            self.record_pwm_edges(k);
            if matches!(self.edge_cache[k], Some(Some(e)) if e <= now) {
                self.edge_cache[k] = None;
            }
        }
        if self.next_soc == Some(now) {
            self.soc(now);
        }
        if self.qep.next_timeout() == now {
            let (qposlat, delta) = self.qep.unit_timeout(now);
            self.qep_timeouts += 1;
            self.push_trace(now, EventKind::QepTimeout { qposlat, delta });
        }
        if self.pending_eoc == Some(now) {
            self.isr(now);
        }
    }

    fn soc(&mut self, now: u64) {
        self.soc_count += 1;
        self.push_trace(now, EventKind::Soc);
        let [i_a, i_b, _] = phase_currents(&self.motor);
        let ((v_a, _), (v_b, _)) = self.scenario.sense.sense_voltages(i_a, i_b);
        if let Ok(eoc) = self.adc_a.start(v_a, now) {
            self.pending_eoc = Some(eoc);
        }
        let _ = self.adc_b.start(v_b, now);
        self.next_soc = self.pwm[0].next_soc_tick(now + 1);
    }

    fn isr(&mut self, now: u64) {
        self.adc_a.finish(now);
        self.adc_b.finish(now);
        self.pending_eoc = None;
        self.isr_count += 1;
        self.push_trace(now, EventKind::Isr);

        let inputs = IsrInputs {
            code_a: self.adc_a.result(),
            code_b: self.adc_b.result(),
            qposcnt: self.qep.qposcnt(),
            unit_delta: self.qep.take_timeout(),
        };
        let out = self.controller.isr(&inputs);
        self.adc_a.clear_int_flag();
        self.adc_b.clear_int_flag();
        self.dac.write(out.dac_value);
        for k in 0..3 {
            if self.pwm[k].set_duty(out.duties[k]) {
                self.duty_clamps += 1;
            }
            self.edge_cache[k] = None;
        }

        let t = now as f64 / self.scenario.sim.f_sys;
        if out.boundary {
            self.apply_due_commands(now, t);
        }
        self.sync_gate_enable();

        let emit = out.boundary || self.scenario.sim.frame_rate == FrameRate::Isr;
        if emit {
            let frame = self.frame(t);
            self.frames.push(frame);
            self.frame_count += 1;
        }
        if out.boundary {
            let i_q = self.controller.state().i_q;
            if let Some(step) = self.step.as_mut() {
                step.sample(t, self.motor.omega_m, i_q);
            }
        }
    }

    fn apply_due_commands(&mut self, now: u64, t: f64) {
        while let Some(tc) = self.scenario.timeline.get(self.next_cmd) {
            if tc.t > t {
                break;
            }
            let cmd = tc.command;
            self.next_cmd += 1;
            self.apply(now, t, cmd);
        }
        let pending: Vec<Command> = match &self.inbox {
            Some(rx) => rx.try_iter().collect(),
            None => Vec::new(),
        };
        for cmd in pending {
            self.apply(now, t, cmd);
        }
    }

    fn apply(&mut self, now: u64, t: f64, cmd: Command) {
        self.push_trace(now, EventKind::Command(cmd));
        match cmd {
            Command::SetSpeedRef(w) => {
                let from = self.controller.state().omega_ref;
                self.controller.set_speed_ref(w);
                if let Some(prev) = self.step.take() {
                    self.steps.push(prev.finish(t));
                }
                self.step = Some(StepTracker::new(t, from, w));
            }
            Command::SetMode(m) => self.controller.set_mode(m),
            Command::SetLoadTorque(v) => self.load_torque = v,
            Command::SetGain(id, v) => self.controller.set_gain(id, v),
            Command::PwmEnable(b) => self.controller.set_pwm_enabled(b),
            Command::SetIdRef(v) => self.controller.set_id_ref(v),
        }
    }

    /// Mirrors the firmware's enable flag onto the gate force.
    fn sync_gate_enable(&mut self) {
        let enabled = self.controller.state().pwm_enabled;
        if enabled == self.gates_enabled {
            return;
        }
        self.gates_enabled = enabled;
        for k in 0..3 {
            self.edge_buf = self.pwm[k].set_force_low(!enabled, !enabled);
            self.record_pwm_edges(k);
            self.edge_cache[k] = None;
        }
    }

    fn frame(&mut self, t: f64) -> TelemetryFrame {
        let saturation = self.controller.take_saturation();
        let s = self.controller.state();
        TelemetryFrame {
            t,
            omega_ref: s.omega_ref,
            omega_meas_filt: s.omega_meas_filt,
            omega_m: self.motor.omega_m,
            torque: self.motor.torque(&self.scenario.motor),
            i_a: s.i_abc[0],
            i_b: s.i_abc[1],
            i_c: s.i_abc[2],
            i_d: s.i_d,
            i_q: s.i_q,
            theta_e: s.flux.theta_e,
            duty_a: s.duties[0],
            duty_b: s.duties[1],
            duty_c: s.duties[2],
            mode: self.controller.mode(),
            pwm_enabled: s.pwm_enabled,
            saturation,
            trip: s.tripped,
        }
    }

    /// Summary of the run so far. Step metrics for the reference still in
    /// force are closed at the current time.
    pub fn report(&self) -> RunReport {
        let t = self.time();
        let mut steps = self.steps.clone();
        if let Some(cur) = self.step.clone() {
            steps.push(cur.finish(t));
        }
        let period = self.scenario.sim.period_ticks();
        RunReport {
            total_ticks: self.now,
            duration: t,
            pwm_periods: self.now.div_ceil(period),
            soc_count: self.soc_count,
            isr_count: self.isr_count,
            current_ctrl_count: self.controller.current_runs(),
            speed_ctrl_count: self.controller.speed_runs(),
            qep_timeouts: self.qep_timeouts,
            frames: self.frame_count,
            final_state: self.motor,
            max_abs_phase_current: self.max_abs_current,
            max_abs_torque: self.max_abs_torque,
            duty_clamp_events: self.duty_clamps + self.controller.clamp_events(),
            trips: self.controller.trips(),
            adc_saturations: self.adc_a.saturations() + self.adc_b.saturations(),
            adc_overruns: self.adc_a.overruns() + self.adc_b.overruns(),
            qep_glitches: self.qep.glitches(),
            dac_masked_writes: self.dac.masked_writes(),
            steps,
        }
    }
}

/// Runs a scenario to completion, feeding every frame to each sink.
pub fn run(scenario: &Scenario, sinks: &mut [&mut dyn TelemetrySink]) -> Result<RunReport, EngineError> {
    let mut engine = Engine::new(scenario);
    while !engine.is_finished() {
        engine.step_to_next_event()?;
        if !engine.frames.is_empty() {
            for f in engine.frames.drain(..) {
                for s in sinks.iter_mut() {
                    s.accept(&f)?;
                }
            }
        }
    }
    Ok(engine.report())
}
