//! eQEP in quadrature-count mode with 4x decoding, position wrap at
//! QPOSMAX, index reset to QPOSINIT and position latch on unit time-out.

/// Single input transition seen by the decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QepEdge {
    ARise,
    AFall,
    BRise,
    BFall,
    IndexRise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QepConfig {
    pub qposmax: u32,
    pub qposinit: u32,
    /// Unit period in system-clock ticks.
    pub quprd: u64,
    pub index_reset_on_rising: bool,
}

impl Default for QepConfig {
    fn default() -> Self {
        Self {
            qposmax: 4095,
            qposinit: 0,
            quprd: 2_000_000,
            index_reset_on_rising: true,
        }
    }
}

/// Outcome of one decoded input change.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Forward,
    Reverse,
    Index,
    Glitch,
}

#[derive(Clone, Debug)]
pub struct QepState {
    config: QepConfig,
    qposcnt: u32,
    qposlat: u32,
    last_delta: i64,
    a: bool,
    b: bool,
    glitches: u64,
    last_timeout: u64,
    timeout_flag: bool,
}

/// Shortest signed difference `cur - prev` on a ring of `modulus` counts,
/// mapped to `[-modulus/2, modulus/2)`.
pub fn shortest_delta(prev: u32, cur: u32, modulus: u32) -> i64 {
    let m = modulus as i64;
    let d = (cur as i64 - prev as i64).rem_euclid(m);
    if d >= (m + 1) / 2 {
        d - m
    } else {
        d
    }
}

fn gray_index(a: bool, b: bool) -> u8 {
    match (a, b) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    }
}

impl QepState {
    pub fn new(config: QepConfig) -> Self {
        Self {
            qposcnt: config.qposinit.min(config.qposmax),
            qposlat: config.qposinit.min(config.qposmax),
            config,
            last_delta: 0,
            a: false,
            b: false,
            glitches: 0,
            last_timeout: 0,
            timeout_flag: false,
        }
    }

    pub fn config(&self) -> &QepConfig {
        &self.config
    }

    pub fn qposcnt(&self) -> u32 {
        self.qposcnt
    }

    pub fn qposlat(&self) -> u32 {
        self.qposlat
    }

    pub fn glitches(&self) -> u64 {
        self.glitches
    }

    pub fn counts_per_rev(&self) -> u32 {
        self.config.qposmax + 1
    }

    pub fn levels(&self) -> (bool, bool) {
        (self.a, self.b)
    }

    /// Feeds one input edge through the decoder.
    pub fn apply_edge(&mut self, edge: QepEdge) -> Step {
        let (a, b) = match edge {
            QepEdge::ARise => (true, self.b),
            QepEdge::AFall => (false, self.b),
            QepEdge::BRise => (self.a, true),
            QepEdge::BFall => (self.a, false),
            QepEdge::IndexRise => {
                if self.config.index_reset_on_rising {
                    self.qposcnt = self.config.qposinit.min(self.config.qposmax);
                }
                return Step::Index;
            }
        };
        self.apply_levels(a, b)
    }

    /// Decodes a new sampled (A, B) pair. A change on both channels at once
    /// or no change at all is a glitch and leaves the position alone.
    pub fn apply_levels(&mut self, a: bool, b: bool) -> Step {
        let from = gray_index(self.a, self.b);
        let to = gray_index(a, b);
        self.a = a;
        self.b = b;
        match (to + 4 - from) % 4 {
            1 => {
                self.qposcnt = if self.qposcnt >= self.config.qposmax {
                    0
                } else {
                    self.qposcnt + 1
                };
                Step::Forward
            }
            3 => {
                self.qposcnt = if self.qposcnt == 0 {
                    self.config.qposmax
                } else {
                    self.qposcnt - 1
                };
                Step::Reverse
            }
            _ => {
                self.glitches += 1;
                Step::Glitch
            }
        }
    }

    /// Next unit time-out tick.
    pub fn next_timeout(&self) -> u64 {
        self.last_timeout + self.config.quprd
    }

    /// Latches the position on unit time-out and returns the latch together
    /// with the shortest signed change since the previous latch.
    pub fn unit_timeout(&mut self, now: u64) -> (u32, i64) {
        debug_assert!(now >= self.next_timeout());
        let prev = self.qposlat;
        self.qposlat = self.qposcnt;
        self.last_delta = shortest_delta(prev, self.qposlat, self.counts_per_rev());
        self.last_timeout = now;
        self.timeout_flag = true;
        (self.qposlat, self.last_delta)
    }

    /// Reads and clears the unit time-out flag, returning the latched delta
    /// when a time-out happened since the last read.
    pub fn take_timeout(&mut self) -> Option<i64> {
        std::mem::take(&mut self.timeout_flag).then_some(self.last_delta)
    }
}
