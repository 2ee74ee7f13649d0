//! Behavioral models of the on-chip peripherals the control code programs.
//!
//! All models are pure state machines driven by the system-clock tick count.
//! None of them owns a clock; the engine advances them explicitly.

pub mod adc;
pub mod dac;
pub mod pwm;
pub mod qep;

pub use adc::{AdcBusy, AdcUnit};
pub use dac::DacUnit;
pub use pwm::{PwmChannel, PwmConfig, PwmEdge, PwmOutput};
pub use qep::{shortest_delta, QepConfig, QepEdge, QepState};
