use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;

use super::frame::{TelemetryFrame, FRAME_FIELDS};
use super::{TelemetryError, TelemetrySink};

pub const DEFAULT_CAPACITY: usize = 1 << 20;

/// Bounded frame log. When full the oldest frame is dropped and counted.
#[derive(Clone, Debug)]
pub struct Recorder {
    frames: VecDeque<TelemetryFrame>,
    capacity: usize,
    evicted: u64,
}

impl Default for Recorder {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_CAPACITY)
    }
}

impl Recorder {
    pub fn with_capacity(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            frames: VecDeque::with_capacity(capacity.min(4096)),
            capacity,
            evicted: 0,
        }
    }

    pub fn record(&mut self, frame: TelemetryFrame) -> Result<(), TelemetryError> {
        if let Some(last) = self.frames.back() {
            if frame.t.partial_cmp(&last.t) != Some(std::cmp::Ordering::Greater) {
                return Err(TelemetryError::OutOfOrder {
                    previous: last.t,
                    t: frame.t,
                });
            }
        }
        if self.frames.len() == self.capacity {
            self.frames.pop_front();
            self.evicted += 1;
        }
        self.frames.push_back(frame);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn evicted(&self) -> u64 {
        self.evicted
    }

    pub fn frames(&self) -> impl Iterator<Item = &TelemetryFrame> {
        self.frames.iter()
    }

    /// Writes a header row and one row per frame; returns the row count.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<usize, TelemetryError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(FRAME_FIELDS)?;
        for f in &self.frames {
            w.write_record(f.values())?;
        }
        w.flush()?;
        Ok(self.frames.len())
    }

    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<usize, TelemetryError> {
        let file = std::fs::File::create(path.as_ref())?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

impl TelemetrySink for Recorder {
    fn accept(&mut self, frame: &TelemetryFrame) -> Result<(), TelemetryError> {
        self.record(*frame)
    }
}
