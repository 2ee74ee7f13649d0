//! Scenario documents: JSON text with `sim`, `motor`, `sense`, `inverter`,
//! `encoder`, `control` and `timeline` sections. Every field is optional.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::command::Command;
use crate::firmware::{ControlConfig, DacSignal, Gains, Limits, Mode};
use crate::periph::adc::{DEFAULT_ACQPS, DEFAULT_CONV_TICKS};
use crate::plant::{Coupling, InverterConfig, MotorParams, ParamError, SenseChain};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Offending field for validation errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            ScenarioError::Invalid { field, .. } => Some(field),
            ScenarioError::Parse { .. } => None,
        }
    }
}

/// Which frames go to the sinks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameRate {
    /// One frame per speed-control period.
    #[default]
    Control,
    /// One frame per ISR.
    Isr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub duration: f64,
    pub coupling: Coupling,
    pub f_sys: f64,
    pub tbprd: u32,
    pub deadband_ticks: u32,
    pub substep_us: f64,
    pub acqps: u32,
    pub conv_ticks: u32,
    /// Width of the debug-pin pulse around the ISR body, ticks.
    pub isr_budget_ticks: u64,
    pub frame_rate: FrameRate,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 1.0,
            coupling: Coupling::Switched,
            f_sys: 200e6,
            tbprd: 10_000,
            deadband_ticks: 200,
            substep_us: 1.0,
            acqps: DEFAULT_ACQPS,
            conv_ticks: DEFAULT_CONV_TICKS,
            isr_budget_ticks: 4_000,
            frame_rate: FrameRate::Control,
        }
    }
}

impl SimConfig {
    pub fn end_tick(&self) -> u64 {
        (self.duration * self.f_sys).round() as u64
    }

    pub fn period_ticks(&self) -> u64 {
        2 * self.tbprd as u64
    }

    pub fn f_pwm(&self) -> f64 {
        self.f_sys / self.period_ticks() as f64
    }

    pub fn substep_ticks(&self) -> u64 {
        ((self.substep_us * 1e-6 * self.f_sys).round() as u64).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdcConfig {
    pub v_ref: f64,
    pub bits: u32,
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self { v_ref: 3.0, bits: 12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncoderConfig {
    pub lines: u32,
    /// Unit timer period, ticks.
    pub quprd: u64,
    pub qposinit: u32,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            lines: 1024,
            quprd: 2_000_000,
            qposinit: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimedCommand {
    pub t: f64,
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub sim: SimConfig,
    pub motor: MotorParams,
    pub sense: SenseChain,
    pub adc: AdcConfig,
    pub inverter: InverterConfig,
    pub encoder: EncoderConfig,
    pub control: ControlConfig,
    pub timeline: Vec<TimedCommand>,
}

impl Default for Scenario {
    fn default() -> Self {
        let adc = AdcConfig::default();
        let sense = SenseChain::default();
        let (offset, gain_i) = default_scaling(&sense, &adc);
        Self {
            sim: SimConfig::default(),
            motor: MotorParams::default(),
            sense,
            adc,
            inverter: InverterConfig::default(),
            encoder: EncoderConfig::default(),
            control: ControlConfig {
                offset_ia: offset,
                offset_ib: offset,
                gain_i,
                ..ControlConfig::default()
            },
            timeline: Vec::new(),
        }
    }
}

/// Zero-current code and amps per code matching a sense chain and ADC.
pub fn default_scaling(sense: &SenseChain, adc: &AdcConfig) -> (f64, f64) {
    let full = ((1u64 << adc.bits) - 1) as f64;
    let offset = (full * sense.v_cm / adc.v_ref).round();
    let gain = adc.v_ref / (full * sense.amp_gain * sense.r_shunt);
    (offset, gain)
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct Doc {
    sim: SimDoc,
    motor: MotorDoc,
    sense: SenseDoc,
    inverter: InverterDoc,
    encoder: EncoderDoc,
    control: ControlDoc,
    timeline: Vec<BTreeMap<String, Value>>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SimDoc {
    duration: Option<f64>,
    coupling: Option<Coupling>,
    f_sys: Option<f64>,
    tbprd: Option<u32>,
    deadband_ticks: Option<u32>,
    ds_ireg: Option<u32>,
    substep_us: Option<f64>,
    acqps: Option<u32>,
    conv_ticks: Option<u32>,
    isr_budget_ticks: Option<u64>,
    frame_rate: Option<FrameRate>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct MotorDoc {
    #[serde(rename = "Rs")]
    rs: Option<f64>,
    #[serde(rename = "Rr")]
    rr: Option<f64>,
    #[serde(rename = "Ls")]
    ls: Option<f64>,
    #[serde(rename = "Lr")]
    lr: Option<f64>,
    #[serde(rename = "Lm")]
    lm: Option<f64>,
    pole_pairs: Option<u32>,
    #[serde(rename = "J")]
    inertia: Option<f64>,
    #[serde(rename = "B")]
    friction: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct SenseDoc {
    r_shunt: Option<f64>,
    amp_gain: Option<f64>,
    v_cm: Option<f64>,
    clip: Option<f64>,
    v_ref: Option<f64>,
    adc_bits: Option<u32>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct InverterDoc {
    v_dc: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct EncoderDoc {
    lines: Option<u32>,
    quprd: Option<u64>,
    qposinit: Option<u32>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ControlDoc {
    mode: Option<Mode>,
    gains: Option<Gains>,
    id_ref: Option<f64>,
    speed_filter_hz: Option<f64>,
    limits: Option<Limits>,
    offset_ia: Option<f64>,
    offset_ib: Option<f64>,
    gain_i: Option<f64>,
    vf_slew_hz_per_s: Option<f64>,
    literal_dispatch: Option<bool>,
    dac_signal: Option<DacSignal>,
}

fn positive(field: &str, v: f64) -> Result<f64, ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ScenarioError::invalid(field, format!("must be positive, got {v}")))
    }
}

fn arg_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn parse_timeline(entries: &[BTreeMap<String, Value>], duration: f64) -> Result<Vec<TimedCommand>, ScenarioError> {
    let mut out: Vec<TimedCommand> = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let path = format!("timeline[{i}]");
        let t = entry
            .get("t")
            .and_then(Value::as_f64)
            .ok_or_else(|| ScenarioError::invalid(format!("{path}.t"), "missing or not a number"))?;
        if !(0.0..=duration).contains(&t) {
            return Err(ScenarioError::invalid(
                format!("{path}.t"),
                format!("{t} outside [0, {duration}]"),
            ));
        }
        let op = entry
            .get("cmd")
            .and_then(Value::as_str)
            .ok_or_else(|| ScenarioError::invalid(format!("{path}.cmd"), "missing or not a string"))?;
        let mut args = BTreeMap::new();
        for (k, v) in entry.iter().filter(|(k, _)| *k != "t" && *k != "cmd") {
            let text = arg_text(v).ok_or_else(|| ScenarioError::invalid(format!("{path}.{k}"), "must be a scalar"))?;
            args.insert(k.clone(), text);
        }
        let command = Command::from_args(op, &args).map_err(|e| {
            let field = if e.field == "op" {
                format!("{path}.cmd")
            } else {
                format!("{path}.{}", e.field)
            };
            ScenarioError::invalid(field, e.message)
        })?;
        if out.last().is_some_and(|prev| prev.t > t) {
            return Err(ScenarioError::invalid(
                "timeline",
                format!("entry {i} at t={t} is earlier than the entry before it"),
            ));
        }
        out.push(TimedCommand { t, command });
    }
    Ok(out)
}

/// Parses and validates a scenario document, filling defaults.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    let d = Scenario::default();

    let s = doc.sim;
    let sim = SimConfig {
        duration: positive("sim.duration", s.duration.unwrap_or(d.sim.duration))?,
        coupling: s.coupling.unwrap_or(d.sim.coupling),
        f_sys: positive("sim.f_sys", s.f_sys.unwrap_or(d.sim.f_sys))?,
        tbprd: s.tbprd.unwrap_or(d.sim.tbprd),
        deadband_ticks: s.deadband_ticks.unwrap_or(d.sim.deadband_ticks),
        substep_us: positive("sim.substep_us", s.substep_us.unwrap_or(d.sim.substep_us))?,
        acqps: s.acqps.unwrap_or(d.sim.acqps),
        conv_ticks: s.conv_ticks.unwrap_or(d.sim.conv_ticks),
        isr_budget_ticks: s.isr_budget_ticks.unwrap_or(d.sim.isr_budget_ticks),
        frame_rate: s.frame_rate.unwrap_or_default(),
    };
    if sim.tbprd == 0 {
        return Err(ScenarioError::invalid("sim.tbprd", "must be at least 1"));
    }
    if sim.deadband_ticks >= sim.tbprd {
        return Err(ScenarioError::invalid("sim.deadband_ticks", "must be below tbprd"));
    }
    let conv_latency = sim.acqps as u64 + 1 + sim.conv_ticks as u64;
    if conv_latency >= sim.period_ticks() {
        return Err(ScenarioError::invalid(
            "sim.conv_ticks",
            "conversion must finish within one PWM period",
        ));
    }
    if sim.end_tick() == 0 {
        return Err(ScenarioError::invalid("sim.duration", "shorter than one clock tick"));
    }

    let m = doc.motor;
    let motor = MotorParams {
        rs: m.rs.unwrap_or(d.motor.rs),
        rr: m.rr.unwrap_or(d.motor.rr),
        ls: m.ls.unwrap_or(d.motor.ls),
        lr: m.lr.unwrap_or(d.motor.lr),
        lm: m.lm.unwrap_or(d.motor.lm),
        pole_pairs: m.pole_pairs.unwrap_or(d.motor.pole_pairs),
        inertia: m.inertia.unwrap_or(d.motor.inertia),
        friction: m.friction.unwrap_or(d.motor.friction),
    };
    motor.validate().map_err(|e| {
        let field = match e {
            ParamError::NotPositive(name) => match name {
                "rs" => "Rs",
                "rr" => "Rr",
                "ls" => "Ls",
                "lr" => "Lr",
                "lm" => "Lm",
                "inertia" => "J",
                "friction" => "B",
                other => other,
            },
            ParamError::MagnetizingTooLarge => "Lm",
        };
        ScenarioError::invalid(format!("motor.{field}"), e.to_string())
    })?;

    let se = doc.sense;
    let sense = SenseChain {
        r_shunt: positive("sense.r_shunt", se.r_shunt.unwrap_or(d.sense.r_shunt))?,
        amp_gain: positive("sense.amp_gain", se.amp_gain.unwrap_or(d.sense.amp_gain))?,
        v_cm: se.v_cm.unwrap_or(d.sense.v_cm),
        clip: positive("sense.clip", se.clip.unwrap_or(d.sense.clip))?,
    };
    let adc = AdcConfig {
        v_ref: positive("sense.v_ref", se.v_ref.unwrap_or(d.adc.v_ref))?,
        bits: se.adc_bits.unwrap_or(d.adc.bits),
    };
    if !(1..=16).contains(&adc.bits) {
        return Err(ScenarioError::invalid("sense.adc_bits", "must be between 1 and 16"));
    }

    let inverter = InverterConfig {
        v_dc: positive("inverter.v_dc", doc.inverter.v_dc.unwrap_or(d.inverter.v_dc))?,
        coupling: sim.coupling,
    };

    let e = doc.encoder;
    let encoder = EncoderConfig {
        lines: e.lines.unwrap_or(d.encoder.lines),
        quprd: e.quprd.unwrap_or(d.encoder.quprd),
        qposinit: e.qposinit.unwrap_or(d.encoder.qposinit),
    };
    if encoder.lines == 0 {
        return Err(ScenarioError::invalid("encoder.lines", "must be at least 1"));
    }
    if encoder.quprd == 0 {
        return Err(ScenarioError::invalid("encoder.quprd", "must be at least 1"));
    }
    if encoder.qposinit >= 4 * encoder.lines {
        return Err(ScenarioError::invalid("encoder.qposinit", "must be below 4 * lines"));
    }

    let c = doc.control;
    let (offset, gain_i) = default_scaling(&sense, &adc);
    let control = ControlConfig {
        mode: c.mode.unwrap_or_default(),
        ds_ireg: s.ds_ireg.unwrap_or(d.control.ds_ireg),
        gains: c.gains.unwrap_or_default(),
        id_ref: c.id_ref.unwrap_or(d.control.id_ref),
        limits: c.limits.unwrap_or_default(),
        speed_filter_hz: positive(
            "control.speed_filter_hz",
            c.speed_filter_hz.unwrap_or(d.control.speed_filter_hz),
        )?,
        offset_ia: c.offset_ia.unwrap_or(offset),
        offset_ib: c.offset_ib.unwrap_or(offset),
        gain_i: positive("control.gain_i", c.gain_i.unwrap_or(gain_i))?,
        vf_slew_hz_per_s: positive(
            "control.vf_slew_hz_per_s",
            c.vf_slew_hz_per_s.unwrap_or(d.control.vf_slew_hz_per_s),
        )?,
        literal_dispatch: c.literal_dispatch.unwrap_or(false),
        dac_signal: c.dac_signal.unwrap_or_default(),
    };
    if control.ds_ireg == 0 {
        return Err(ScenarioError::invalid("sim.ds_ireg", "must be at least 1"));
    }
    if control.literal_dispatch && control.ds_ireg < 2 {
        return Err(ScenarioError::invalid(
            "control.literal_dispatch",
            "needs ds_ireg of at least 2",
        ));
    }
    positive("control.limits.i_max", control.limits.i_max)?;
    positive("control.limits.iq_max", control.limits.iq_max)?;

    let timeline = parse_timeline(&doc.timeline, sim.duration)?;
    Ok(Scenario {
        sim,
        motor,
        sense,
        adc,
        inverter,
        encoder,
        control,
        timeline,
    })
}
