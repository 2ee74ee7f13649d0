//! Continuous-time plant: inverter, induction machine in the stationary
//! αβ frame, incremental encoder and the shunt/isolation-amplifier sense
//! chain.

pub mod encoder;
pub mod inverter;
pub mod motor;
pub mod sense;

pub use encoder::{Encoder, EncoderEdge};
pub use inverter::{inverter_voltages, phase_to_alpha_beta, Coupling, InverterConfig, LegDrive};
pub use motor::{integrate, motor_derivatives, MotorParams, MotorState, NonFinite, ParamError, PlantInputs};
pub use sense::SenseChain;
