//! Control code run from the ADC end-of-conversion interrupt.

pub mod controller;
pub mod flux;
pub mod modulation;
pub mod pi;
pub mod speed;
pub mod transforms;
pub mod vf;

pub use controller::{
    ControlConfig, ControlState, ControlTiming, Controller, DacSignal, GainId, Gains, IsrInputs, IsrOutput, Limits,
    Mode, GAIN_NAMES,
};
pub use flux::FluxEstimator;
pub use modulation::duties_from_alpha_beta;
pub use pi::PiRegulator;
pub use speed::{scale_current, speed_estimate, LowPass};
pub use transforms::{clarke, inverse_park, park};
