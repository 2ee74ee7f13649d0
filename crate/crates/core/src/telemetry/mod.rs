//! Frame logging, CSV export and the stream message grammar.

pub mod frame;
pub mod ring;
pub mod wire;

use thiserror::Error;

pub use frame::{TelemetryFrame, FRAME_FIELDS};
pub use ring::{Recorder, DEFAULT_CAPACITY};
pub use wire::{StreamMessage, WireError};

#[derive(Debug, Error)]
pub enum TelemetryError {
    #[error("frame at t={t} does not follow t={previous}")]
    OutOfOrder { previous: f64, t: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("sink closed")]
    Closed,
}

/// Consumer of frames emitted by the engine.
pub trait TelemetrySink {
    fn accept(&mut self, frame: &TelemetryFrame) -> Result<(), TelemetryError>;
}

impl TelemetrySink for Vec<TelemetryFrame> {
    fn accept(&mut self, frame: &TelemetryFrame) -> Result<(), TelemetryError> {
        self.push(*frame);
        Ok(())
    }
}
