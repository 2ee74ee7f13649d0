//! SOC-triggered ADC with a fixed acquisition window and conversion latency.

use thiserror::Error;

/// Conversion time after the acquisition window, in system-clock ticks
/// (about 10.5 ADC clocks at the /4 prescaler).
pub const DEFAULT_CONV_TICKS: u32 = 42;
/// Acquisition window register value; the window is `acqps + 1` ticks.
pub const DEFAULT_ACQPS: u32 = 30;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("conversion already in progress until tick {busy_until}")]
pub struct AdcBusy {
    pub busy_until: u64,
}

#[derive(Clone, Debug)]
pub struct AdcUnit {
    pub acqps: u32,
    pub conv_ticks: u32,
    pub v_ref: f64,
    pub bits: u32,
    result: u16,
    int_flag: bool,
    pending: Option<(u16, u64)>,
    saturations: u64,
    overruns: u64,
    conversions: u64,
}

impl Default for AdcUnit {
    fn default() -> Self {
        Self::new(DEFAULT_ACQPS, DEFAULT_CONV_TICKS, 3.0, 12)
    }
}

impl AdcUnit {
    pub fn new(acqps: u32, conv_ticks: u32, v_ref: f64, bits: u32) -> Self {
        Self {
            acqps,
            conv_ticks,
            v_ref,
            bits,
            result: 0,
            int_flag: false,
            pending: None,
            saturations: 0,
            overruns: 0,
            conversions: 0,
        }
    }

    pub fn full_scale(&self) -> u16 {
        ((1u32 << self.bits) - 1) as u16
    }

    /// Transfer function: `clamp(round(full_scale * v_in / v_ref))`.
    /// The flag reports an input outside `[0, v_ref]`.
    pub fn code_for(&self, v_in: f64) -> (u16, bool) {
        let full = self.full_scale() as f64;
        let saturated = !(0.0..=self.v_ref).contains(&v_in);
        let code = (full * v_in / self.v_ref).round().clamp(0.0, full);
        (code as u16, saturated)
    }

    /// Ticks from SOC to EOC.
    pub fn latency(&self) -> u64 {
        (self.acqps + 1) as u64 + self.conv_ticks as u64
    }

    /// Samples `v_in` at `soc_tick` and schedules the end of conversion.
    pub fn start(&mut self, v_in: f64, soc_tick: u64) -> Result<u64, AdcBusy> {
        if let Some((_, eoc)) = self.pending {
            if eoc > soc_tick {
                self.overruns += 1;
                return Err(AdcBusy { busy_until: eoc });
            }
            self.finish(eoc);
        }
        let (code, saturated) = self.code_for(v_in);
        if saturated {
            self.saturations += 1;
        }
        let eoc = soc_tick + self.latency();
        self.pending = Some((code, eoc));
        Ok(eoc)
    }

    /// Tick of the pending end of conversion, if any.
    pub fn pending_eoc(&self) -> Option<u64> {
        self.pending.map(|(_, eoc)| eoc)
    }

    /// Completes the conversion when `now` is its EOC tick. Returns whether
    /// the interrupt flag was raised.
    pub fn finish(&mut self, now: u64) -> bool {
        match self.pending {
            Some((code, eoc)) if eoc == now => {
                self.result = code;
                self.int_flag = true;
                self.pending = None;
                self.conversions += 1;
                true
            }
            _ => false,
        }
    }

    pub fn result(&self) -> u16 {
        self.result
    }

    pub fn int_flag(&self) -> bool {
        self.int_flag
    }

    pub fn clear_int_flag(&mut self) {
        self.int_flag = false;
    }

    pub fn saturations(&self) -> u64 {
        self.saturations
    }

    pub fn overruns(&self) -> u64 {
        self.overruns
    }

    pub fn conversions(&self) -> u64 {
        self.conversions
    }
}
