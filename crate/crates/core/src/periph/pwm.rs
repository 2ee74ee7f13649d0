//! ePWM unit: up-down time base, shadowed compares, action qualifier,
//! dead-band generator and continuous software force.
//!
//! The counter starts at zero on tick 0 and counts up to `tbprd`, then back
//! down, so one PWM period lasts `2 * tbprd` ticks. Compare shadows are
//! loaded on counter-zero. The action qualifier sets the raw A signal on the
//! up-count compare match and clears it on the down-count match. The
//! dead-band generator runs in full-enable, active-high-complementary mode:
//! `out_a` is raw A with its rising edges delayed by `db_red` ticks and
//! `out_b` is the inverse of raw A with its rising edges delayed by `db_fed`
//! ticks. Before tick 0 raw A is taken to have been low forever and both
//! outputs low.
//!
//! Instead of stepping every tick the channel jumps between the ticks where
//! something can change (compare matches, counter-zero, expiry of a pending
//! dead-band delay), so edges come out on their exact tick.

/// Channel output pin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PwmOutput {
    A,
    B,
}

/// A level change on one output, effective from `tick` onwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PwmEdge {
    pub tick: u64,
    pub output: PwmOutput,
    pub level: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PwmConfig {
    pub tbprd: u32,
    pub db_red: u32,
    pub db_fed: u32,
    /// Initial duty loaded into both active and shadow compares.
    pub initial_duty: f64,
    /// TBCLKSYNC: the time base only runs when set.
    pub clock_enabled: bool,
    /// ETSEL.SOCAEN with SOCASEL = counter equals period.
    pub soc_on_period: bool,
    pub force_low: bool,
}

impl Default for PwmConfig {
    fn default() -> Self {
        Self {
            tbprd: 10_000,
            db_red: 0,
            db_fed: 0,
            initial_duty: 0.5,
            clock_enabled: true,
            soc_on_period: false,
            force_low: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PwmChannel {
    tbprd: u32,
    cmpa_active: u32,
    cmpa_shadow: u32,
    cmpb_active: u32,
    cmpb_shadow: u32,
    db_red: u32,
    db_fed: u32,
    force_low_a: bool,
    force_low_b: bool,
    clock_enabled: bool,
    soc_on_period: bool,
    /// First tick not yet processed.
    cursor: u64,
    raw_a: bool,
    last_rise: Option<u64>,
    last_fall: Option<u64>,
    out_a: bool,
    out_b: bool,
    clamp_count: u64,
}

impl PwmChannel {
    pub fn new(config: PwmConfig) -> Self {
        assert!(config.tbprd >= 1, "tbprd must be at least 1");
        let cmp = duty_to_compare(config.initial_duty.clamp(0.0, 1.0), config.tbprd);
        Self {
            tbprd: config.tbprd,
            cmpa_active: cmp,
            cmpa_shadow: cmp,
            cmpb_active: cmp,
            cmpb_shadow: cmp,
            db_red: config.db_red,
            db_fed: config.db_fed,
            force_low_a: config.force_low,
            force_low_b: config.force_low,
            clock_enabled: config.clock_enabled,
            soc_on_period: config.soc_on_period,
            cursor: 0,
            raw_a: false,
            last_rise: None,
            last_fall: None,
            out_a: false,
            out_b: false,
            clamp_count: 0,
        }
    }

    pub fn tbprd(&self) -> u32 {
        self.tbprd
    }

    pub fn period_ticks(&self) -> u64 {
        2 * self.tbprd as u64
    }

    pub fn cmpa_active(&self) -> u32 {
        self.cmpa_active
    }

    pub fn cmpa_shadow(&self) -> u32 {
        self.cmpa_shadow
    }

    pub fn cmpb_active(&self) -> u32 {
        self.cmpb_active
    }

    pub fn cmpb_shadow(&self) -> u32 {
        self.cmpb_shadow
    }

    pub fn outputs(&self) -> (bool, bool) {
        (self.out_a, self.out_b)
    }

    pub fn forced_low(&self) -> bool {
        self.force_low_a && self.force_low_b
    }

    pub fn clamp_count(&self) -> u64 {
        self.clamp_count
    }

    pub fn clock_enabled(&self) -> bool {
        self.clock_enabled
    }

    /// Next tick that has not been processed yet.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    /// Counter value and direction (`true` = up) at the last processed tick.
    pub fn counter(&self) -> Option<(u32, bool)> {
        let n = self.cursor.checked_sub(1)?;
        Some(self.counter_at(n))
    }

    fn counter_at(&self, n: u64) -> (u32, bool) {
        let p = self.tbprd as u64;
        let phase = n % (2 * p);
        if phase < p {
            (phase as u32, true)
        } else {
            ((2 * p - phase) as u32, false)
        }
    }

    /// Fraction of the period the high-side gate (`out_b`) is commanded on,
    /// from the active compare. Used by the averaged inverter model.
    pub fn pole_duty(&self) -> f64 {
        self.cmpa_active as f64 / self.tbprd as f64
    }

    /// Writes `duty * tbprd` into both compare shadows. Out-of-range duties
    /// are clamped and counted; the return value tells whether that happened.
    pub fn set_duty(&mut self, duty: f64) -> bool {
        let clamped = !(0.0..=1.0).contains(&duty);
        let duty = if duty.is_nan() { 0.5 } else { duty.clamp(0.0, 1.0) };
        if clamped {
            self.clamp_count += 1;
        }
        let cmp = duty_to_compare(duty, self.tbprd);
        self.cmpa_shadow = cmp;
        self.cmpb_shadow = cmp;
        clamped
    }

    /// Raw shadow write, saturating at `tbprd`.
    pub fn set_shadow_compare(&mut self, cmp: u32) {
        let cmp = cmp.min(self.tbprd);
        self.cmpa_shadow = cmp;
        self.cmpb_shadow = cmp;
    }

    /// Updates the continuous software force. The resulting output changes
    /// take effect on the last processed tick.
    pub fn set_force_low(&mut self, force_a: bool, force_b: bool) -> Vec<PwmEdge> {
        self.force_low_a = force_a;
        self.force_low_b = force_b;
        let mut edges = Vec::new();
        if let Some(n) = self.cursor.checked_sub(1) {
            self.update_outputs(n, &mut edges);
        }
        edges
    }

    /// Processes every tick up to and including `to`, appending output edges.
    pub fn advance(&mut self, to: u64, edges: &mut Vec<PwmEdge>) {
        while let Some(t) = self.next_internal_tick() {
            if t > to {
                break;
            }
            self.process_tick(t, edges);
        }
        self.cursor = self.cursor.max(to + 1);
    }

    /// Tick of the next output edge, assuming no further register writes.
    /// Looks at most three periods ahead; steady 0 % or 100 % outputs return
    /// `None`.
    pub fn next_edge_tick(&self) -> Option<u64> {
        if !self.clock_enabled {
            return None;
        }
        let horizon = self.cursor + 3 * self.period_ticks() + self.db_red.max(self.db_fed) as u64;
        let mut probe = self.clone();
        let mut edges = Vec::new();
        while let Some(t) = probe.next_internal_tick() {
            if t > horizon {
                return None;
            }
            probe.process_tick(t, &mut edges);
            if let Some(e) = edges.first() {
                return Some(e.tick);
            }
        }
        None
    }

    /// First counter-zero tick at or after `from`.
    pub fn next_zero_tick(&self, from: u64) -> Option<u64> {
        if !self.clock_enabled {
            return None;
        }
        Some(from.div_ceil(self.period_ticks()) * self.period_ticks())
    }

    /// First SOCA tick at or after `from` (counter equals period).
    pub fn next_soc_tick(&self, from: u64) -> Option<u64> {
        if !self.clock_enabled || !self.soc_on_period {
            return None;
        }
        let p = self.tbprd as u64;
        let per = 2 * p;
        if from <= p {
            return Some(p);
        }
        let k = (from - p).div_ceil(per);
        Some(p + k * per)
    }

    /// SOCA ticks inside `[from, to]`.
    pub fn soc_ticks(&self, from: u64, to: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut t = self.next_soc_tick(from);
        while let Some(tick) = t {
            if tick > to {
                break;
            }
            out.push(tick);
            t = Some(tick + self.period_ticks());
        }
        out
    }

    fn next_internal_tick(&self) -> Option<u64> {
        if !self.clock_enabled {
            return None;
        }
        let c = self.cursor;
        let p = self.tbprd as u64;
        let per = 2 * p;
        let mut best = c.div_ceil(per) * per;

        if self.raw_a {
            if let Some(r) = self.last_rise {
                let t = r + self.db_red as u64;
                if t >= c {
                    best = best.min(t);
                }
            }
        } else if let Some(f) = self.last_fall {
            let t = f + self.db_fed as u64;
            if t >= c {
                best = best.min(t);
            }
        }

        let base = (c / per) * per;
        let cmp = if c > base { self.cmpa_active } else { self.cmpa_shadow } as u64;
        if cmp < p && base + cmp >= c {
            best = best.min(base + cmp);
        }
        if cmp > 0 && base + per - cmp >= c {
            best = best.min(base + per - cmp);
        }
        Some(best)
    }

    fn process_tick(&mut self, n: u64, edges: &mut Vec<PwmEdge>) {
        let per = self.period_ticks();
        if n.is_multiple_of(per) {
            self.cmpa_active = self.cmpa_shadow;
            self.cmpb_active = self.cmpb_shadow;
        }
        let (ctr, up) = self.counter_at(n);
        if ctr == self.cmpa_active {
            if up && !self.raw_a {
                self.raw_a = true;
                self.last_rise = Some(n);
            } else if !up && self.raw_a {
                self.raw_a = false;
                self.last_fall = Some(n);
            }
        }
        self.cursor = n + 1;
        self.update_outputs(n, edges);
    }

    fn dead_band(&self, n: u64) -> (bool, bool) {
        let a = self.raw_a && self.last_rise.is_some_and(|r| n >= r && n - r >= self.db_red as u64);
        let b = !self.raw_a && self.last_fall.is_none_or(|f| n >= f && n - f >= self.db_fed as u64);
        (a, b)
    }

    fn update_outputs(&mut self, n: u64, edges: &mut Vec<PwmEdge>) {
        let (a, b) = self.dead_band(n);
        let a = a && !self.force_low_a;
        let b = b && !self.force_low_b;
        if a != self.out_a {
            self.out_a = a;
            edges.push(PwmEdge {
                tick: n,
                output: PwmOutput::A,
                level: a,
            });
        }
        if b != self.out_b {
            self.out_b = b;
            edges.push(PwmEdge {
                tick: n,
                output: PwmOutput::B,
                level: b,
            });
        }
    }
}

fn duty_to_compare(duty: f64, tbprd: u32) -> u32 {
    ((duty * tbprd as f64).round() as u32).min(tbprd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_running(tbprd: u32, red: u32, fed: u32) -> PwmChannel {
        PwmChannel::new(PwmConfig {
            tbprd,
            db_red: red,
            db_fed: fed,
            initial_duty: 0.5,
            clock_enabled: true,
            soc_on_period: true,
            force_low: false,
        })
    }

    fn edges_until(ch: &mut PwmChannel, to: u64) -> Vec<PwmEdge> {
        let mut e = Vec::new();
        ch.advance(to, &mut e);
        e
    }

    #[test]
    fn half_duty_output_a_window() {
        let mut ch = free_running(100, 0, 0);
        let edges = edges_until(&mut ch, 399);
        let a: Vec<_> = edges
            .iter()
            .filter(|e| e.output == PwmOutput::A)
            .map(|e| (e.tick, e.level))
            .collect();
        assert_eq!(a, vec![(50, true), (150, false), (250, true), (350, false)]);
        let b: Vec<_> = edges
            .iter()
            .filter(|e| e.output == PwmOutput::B)
            .map(|e| (e.tick, e.level))
            .collect();
        assert_eq!(b, vec![(0, true), (50, false), (150, true), (250, false), (350, true)]);
    }

    #[test]
    fn shadow_write_loads_on_zero() {
        let mut ch = free_running(10_000, 0, 0);
        let _ = edges_until(&mut ch, 100);
        ch.set_duty(0.25);
        assert_eq!(ch.cmpa_shadow(), 2500);
        assert_eq!(ch.cmpa_active(), 5000);
        let _ = edges_until(&mut ch, 19_999);
        assert_eq!(ch.cmpa_active(), 5000);
        let _ = edges_until(&mut ch, 20_000);
        assert_eq!(ch.cmpa_active(), 2500);
    }

    #[test]
    fn duty_zero_keeps_high_side_off() {
        let mut ch = free_running(100, 0, 0);
        ch.set_duty(0.0);
        let edges = edges_until(&mut ch, 1_000);
        // After the first load the high-side output (B) never turns on again.
        assert!(edges
            .iter()
            .filter(|e| e.output == PwmOutput::B && e.level)
            .all(|e| e.tick == 0));
        assert_eq!(ch.outputs(), (true, false));
    }

    #[test]
    fn duty_one_keeps_low_side_off() {
        let mut ch = free_running(100, 0, 0);
        ch.set_duty(1.0);
        let edges = edges_until(&mut ch, 1_000);
        assert!(edges
            .iter()
            .all(|e| e.output == PwmOutput::B || !e.level || e.tick < 200));
        assert_eq!(ch.outputs(), (false, true));
    }

    #[test]
    fn dead_band_gaps() {
        let mut ch = free_running(100, 10, 10);
        let edges = edges_until(&mut ch, 999);
        for w in edges.windows(2) {
            let (x, y) = (w[0], w[1]);
            if x.output == PwmOutput::B && !x.level && y.output == PwmOutput::A && y.level {
                assert_eq!(y.tick - x.tick, 10);
            }
            if x.output == PwmOutput::A && !x.level && y.output == PwmOutput::B && y.level {
                assert_eq!(y.tick - x.tick, 10);
            }
        }
        assert!(edges
            .iter()
            .any(|e| e.output == PwmOutput::A && e.level && e.tick == 60));
    }

    #[test]
    fn forced_low_emits_no_edges() {
        let mut ch = free_running(100, 3, 3);
        ch.set_force_low(true, true);
        assert!(edges_until(&mut ch, 5_000).is_empty());
        assert_eq!(ch.outputs(), (false, false));
        assert_eq!(ch.next_edge_tick(), None);
    }

    #[test]
    fn soc_on_period_peak() {
        let ch = free_running(10_000, 0, 0);
        assert_eq!(ch.soc_ticks(0, 50_000), vec![10_000, 30_000, 50_000]);
        let small = free_running(1, 0, 0);
        assert_eq!(small.soc_ticks(0, 5), vec![1, 3, 5]);
        let stopped = PwmChannel::new(PwmConfig {
            clock_enabled: false,
            soc_on_period: true,
            ..PwmConfig::default()
        });
        assert!(stopped.soc_ticks(0, 1_000_000).is_empty());
    }

    #[test]
    fn clamped_duty_is_counted() {
        let mut ch = free_running(100, 0, 0);
        assert!(ch.set_duty(1.3));
        assert!(ch.set_duty(-0.1));
        assert!(!ch.set_duty(0.3));
        assert_eq!(ch.clamp_count(), 2);
        assert_eq!(ch.cmpa_shadow(), 30);
    }

    #[test]
    fn next_edge_tick_predicts_advance() {
        let mut ch = free_running(100, 7, 4);
        ch.set_duty(0.3);
        for _ in 0..20 {
            let predicted = ch.next_edge_tick().unwrap();
            let e = edges_until(&mut ch, predicted);
            assert_eq!(e.first().map(|e| e.tick), Some(predicted));
        }
    }
}
