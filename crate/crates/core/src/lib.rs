//! Deterministic virtual motor-drive testbench.
//!
//! The crate reproduces an induction-motor control stack at register level:
//! ePWM/ADC/DAC/eQEP behavioral models ([`periph`]), an inverter and
//! induction-machine plant ([`plant`]), the interrupt-driven control code
//! ([`firmware`]), an event-driven simulation core ([`engine`]) and frame
//! logging plus the live stream grammar ([`telemetry`]).

pub mod conformance;
pub mod engine;
pub mod firmware;
pub mod periph;
pub mod plant;
pub mod scenarios;
pub mod telemetry;

pub use engine::{load_scenario, run, Command, Engine, EngineError, RunReport, Scenario, ScenarioError};
pub use telemetry::{Recorder, TelemetryFrame, TelemetrySink};
