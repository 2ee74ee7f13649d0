//! Buffered DAC, reference VREFHI, loaded on SYSCLK (immediate).

#[derive(Clone, Debug)]
pub struct DacUnit {
    pub v_ref: f64,
    value: u16,
    masked_writes: u64,
}

impl Default for DacUnit {
    fn default() -> Self {
        Self::new(3.0)
    }
}

impl DacUnit {
    pub fn new(v_ref: f64) -> Self {
        Self {
            v_ref,
            value: 0,
            masked_writes: 0,
        }
    }

    /// Writes DACVALS. Values wider than 12 bits are masked and counted.
    pub fn write(&mut self, value: u32) -> f64 {
        if value > 0xFFF {
            self.masked_writes += 1;
        }
        self.value = (value & 0xFFF) as u16;
        self.out()
    }

    pub fn value(&self) -> u16 {
        self.value
    }

    pub fn out(&self) -> f64 {
        self.v_ref * self.value as f64 / 4096.0
    }

    pub fn masked_writes(&self) -> u64 {
        self.masked_writes
    }
}
