//! Reference models that step one tick at a time, and randomized suites
//! comparing them against the event-driven peripherals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{load_scenario, run};
use crate::periph::{AdcUnit, PwmChannel, PwmConfig, PwmEdge, PwmOutput, QepConfig, QepEdge, QepState};

/// Straightforward per-tick ePWM: counter, compare, action qualifier and
/// dead band evaluated on every tick.
#[derive(Clone, Debug)]
pub struct TickPwm {
    tbprd: u64,
    red: u64,
    fed: u64,
    active: u64,
    shadow: u64,
    force: bool,
    raw: bool,
    /// Tick of the last raw change; `None` means the level has held since
    /// before tick 0.
    changed: Option<u64>,
    out: (bool, bool),
    tick: u64,
}

impl TickPwm {
    pub fn new(tbprd: u32, red: u32, fed: u32, initial_cmp: u32, force: bool) -> Self {
        Self {
            tbprd: tbprd as u64,
            red: red as u64,
            fed: fed as u64,
            active: initial_cmp as u64,
            shadow: initial_cmp as u64,
            force,
            raw: false,
            changed: None,
            out: (false, false),
            tick: 0,
        }
    }

    pub fn write_compare(&mut self, cmp: u32) {
        self.shadow = (cmp as u64).min(self.tbprd);
    }

    pub fn set_force(&mut self, force: bool, edges: &mut Vec<PwmEdge>) {
        self.force = force;
        if self.tick > 0 {
            self.refresh(self.tick - 1, edges);
        }
    }

    pub fn outputs(&self) -> (bool, bool) {
        self.out
    }

    /// Evaluates the next tick.
    pub fn tick(&mut self, edges: &mut Vec<PwmEdge>) {
        let n = self.tick;
        let p = self.tbprd;
        let phase = n % (2 * p);
        if phase == 0 {
            self.active = self.shadow;
        }
        let (ctr, up) = if phase < p {
            (phase, true)
        } else {
            (2 * p - phase, false)
        };
        if ctr == self.active {
            let level = up;
            if level != self.raw {
                self.raw = level;
                self.changed = Some(n);
            }
        }
        self.refresh(n, edges);
        self.tick += 1;
    }

    fn refresh(&mut self, n: u64, edges: &mut Vec<PwmEdge>) {
        let held = |delay: u64| self.changed.is_none_or(|c| n - c >= delay);
        let a = self.raw && held(self.red) && !self.force;
        let b = !self.raw && held(self.fed) && !self.force;
        if a != self.out.0 {
            edges.push(PwmEdge {
                tick: n,
                output: PwmOutput::A,
                level: a,
            });
        }
        if b != self.out.1 {
            edges.push(PwmEdge {
                tick: n,
                output: PwmOutput::B,
                level: b,
            });
        }
        self.out = (a, b);
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: u64,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String) {
        // keep reports readable
        if self.failures.len() < 20 {
            self.failures.push(msg);
        }
    }
}

/// One randomized PWM case: configuration plus a compare write per period.
#[derive(Clone, Debug)]
pub struct PwmCase {
    pub tbprd: u32,
    pub red: u32,
    pub fed: u32,
    pub periods: u64,
    pub initial_cmp: u32,
    /// (tick after which the write happens, compare value)
    pub writes: Vec<(u64, u32)>,
}

impl PwmCase {
    pub fn random(rng: &mut impl Rng) -> Self {
        let tbprd = rng.gen_range(2..=1000u32);
        let max_db = (tbprd / 2).max(1);
        let red = rng.gen_range(1..=max_db);
        let fed = rng.gen_range(1..=max_db);
        let periods = rng.gen_range(5..=12u64);
        let per = 2 * tbprd as u64;
        let writes = (0..periods)
            .map(|k| {
                let at = k * per + rng.gen_range(0..per);
                let cmp = match rng.gen_range(0..10) {
                    0 => 0,
                    1 => tbprd,
                    _ => rng.gen_range(0..=tbprd),
                };
                (at, cmp)
            })
            .collect();
        Self {
            tbprd,
            red,
            fed,
            periods,
            initial_cmp: rng.gen_range(0..=tbprd),
            writes,
        }
    }

    pub fn ticks(&self) -> u64 {
        self.periods * 2 * self.tbprd as u64
    }

    /// Edge list and per-tick output levels from the reference model.
    pub fn oracle(&self) -> (Vec<PwmEdge>, Vec<(bool, bool)>) {
        let mut m = TickPwm::new(self.tbprd, self.red, self.fed, self.initial_cmp, false);
        let mut edges = Vec::new();
        let mut levels = Vec::with_capacity(self.ticks() as usize);
        let mut w = self.writes.iter().peekable();
        for n in 0..self.ticks() {
            m.tick(&mut edges);
            levels.push(m.outputs());
            while let Some(&&(at, cmp)) = w.peek() {
                if at != n {
                    break;
                }
                m.write_compare(cmp);
                w.next();
            }
        }
        (edges, levels)
    }

    /// Edge list from the event-driven channel, advanced in uneven chunks,
    /// together with any next-edge predictions that turned out wrong.
    pub fn event_driven(&self, rng: &mut impl Rng) -> (Vec<PwmEdge>, Vec<String>) {
        let mut ch = PwmChannel::new(PwmConfig {
            tbprd: self.tbprd,
            db_red: self.red,
            db_fed: self.fed,
            initial_duty: self.initial_cmp as f64 / self.tbprd as f64,
            clock_enabled: true,
            soc_on_period: true,
            force_low: false,
        });
        let mut edges = Vec::new();
        let mut bad = Vec::new();
        let end = self.ticks() - 1;
        let mut t = 0u64;
        let mut w = self.writes.iter().peekable();
        loop {
            let next_write = w.peek().map(|x| x.0).unwrap_or(end).min(end);
            let stop = if rng.gen_bool(0.3) {
                next_write
            } else {
                t + rng.gen_range(0..=next_write - t)
            };
            let predicted = ch.next_edge_tick();
            let before = edges.len();
            ch.advance(stop, &mut edges);
            if let Some(p) = predicted {
                let first = edges[before..].first().map(|e| e.tick);
                let ok = if p <= stop { first == Some(p) } else { first.is_none() };
                if !ok {
                    bad.push(format!("predicted edge at {p}, got {first:?}"));
                }
            }
            while let Some(&&(at, cmp)) = w.peek() {
                if at != stop {
                    break;
                }
                ch.set_shadow_compare(cmp);
                w.next();
            }
            if stop == end {
                break;
            }
            t = stop + 1;
        }
        (edges, bad)
    }
}

/// Event-driven vs per-tick PWM over `cases` random configurations.
pub fn pwm_suite(cases: u64, seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("pwm");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..cases {
        let case = PwmCase::random(&mut rng);
        res.cases += 1;
        let (want, levels) = case.oracle();
        let (got, bad) = case.event_driven(&mut rng);
        let tag = format!("case {i} (tbprd {}, red {}, fed {})", case.tbprd, case.red, case.fed);
        if got != want {
            let k = got
                .iter()
                .zip(&want)
                .position(|(a, b)| a != b)
                .unwrap_or(got.len().min(want.len()));
            res.fail(format!(
                "{tag}: edge lists differ at index {k}: got {:?}, want {:?}",
                got.get(k),
                want.get(k)
            ));
        }
        for b in bad {
            res.fail(format!("{tag}: {b}"));
        }
        if let Some(n) = levels.iter().position(|&(a, b)| a && b) {
            res.fail(format!("{tag}: both outputs high at tick {n}"));
        }
        for msg in dead_gap_errors(&want, case.red, case.fed) {
            res.fail(format!("{tag}: {msg}"));
        }
    }
    res
}

/// Whenever one output falls and the next edge is the other output rising,
/// the both-low gap between them must equal that output's dead band.
pub fn dead_gap_errors(edges: &[PwmEdge], red: u32, fed: u32) -> Vec<String> {
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (f, r) = (w[0], w[1]);
        if f.level || !r.level || f.output == r.output {
            continue;
        }
        let want = match r.output {
            PwmOutput::A => red,
            PwmOutput::B => fed,
        } as u64;
        if r.tick - f.tick != want {
            out.push(format!(
                "{:?} rises {} ticks after {:?} fell at {}, want {want}",
                r.output,
                r.tick - f.tick,
                f.output,
                f.tick
            ));
        }
    }
    out
}

/// ADC transfer function, monotonicity and end-of-conversion timing.
pub fn adc_suite(cases: u64, seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("adc");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adc = AdcUnit::default();
    let mut soc = 0u64;
    let mut prev: Option<(f64, u16)> = None;
    let mut volts: Vec<f64> = (0..cases).map(|_| rng.gen_range(-0.5..3.5)).collect();
    volts.sort_by(f64::total_cmp);
    for v in volts {
        res.cases += 1;
        // reference: nearest of the 4096 code centres, integer-clamped
        let x = v / 3.0 * 4095.0;
        let want = if x <= 0.0 {
            0
        } else if x >= 4095.0 {
            4095
        } else {
            let lo = x.floor();
            if x - lo >= 0.5 {
                lo as u16 + 1
            } else {
                lo as u16
            }
        };
        soc += rng.gen_range(100..20_000);
        match adc.start(v, soc) {
            Ok(eoc) => {
                let expect_eoc = soc + (adc.acqps as u64 + 1) + adc.conv_ticks as u64;
                if eoc != expect_eoc {
                    res.fail(format!("soc {soc}: eoc {eoc}, want {expect_eoc}"));
                }
                if adc.finish(eoc - 1) {
                    res.fail(format!("soc {soc}: interrupt before end of conversion"));
                }
                if !adc.finish(eoc) || !adc.int_flag() {
                    res.fail(format!("soc {soc}: no interrupt at end of conversion"));
                }
                adc.clear_int_flag();
                if adc.result() != want {
                    res.fail(format!("{v} V: code {}, want {want}", adc.result()));
                }
            }
            Err(e) => res.fail(format!("soc {soc}: {e}")),
        }
        if let Some((pv, pc)) = prev {
            if adc.result() < pc {
                res.fail(format!("code fell from {pc} at {pv} V to {} at {v} V", adc.result()));
            }
        }
        prev = Some((v, adc.result()));
    }
    res
}

/// Random legal quadrature walks with occasional index pulses and unit
/// time-outs, checked against modular and unwrapped counts.
pub fn qep_suite(edges: u64, seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("qep");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qposinit = rng.gen_range(0..4096u32);
    let cfg = QepConfig {
        qposinit,
        ..QepConfig::default()
    };
    let m = 4096i64;
    let mut q = QepState::new(cfg);
    // Gray position of the inputs: 0..3 for (A, B) = 00, 10, 11, 01
    let mut gray = 0u8;
    let mut net: i64 = qposinit as i64;
    let mut since_latch: i64 = 0;
    let mut index_since_latch = false;
    let mut latch_ref = qposinit as i64;
    let mut now = 0u64;
    let mut forward = true;
    for k in 0..edges {
        res.cases += 1;
        if rng.gen_bool(0.02) {
            forward = !forward;
        }
        let edge = if forward {
            let e = [QepEdge::ARise, QepEdge::BRise, QepEdge::AFall, QepEdge::BFall][gray as usize];
            gray = (gray + 1) % 4;
            net += 1;
            since_latch += 1;
            e
        } else {
            let e = [QepEdge::BRise, QepEdge::AFall, QepEdge::BFall, QepEdge::ARise][gray as usize];
            gray = (gray + 3) % 4;
            net -= 1;
            since_latch -= 1;
            e
        };
        q.apply_edge(edge);
        if rng.gen_bool(0.001) {
            q.apply_edge(QepEdge::IndexRise);
            net = qposinit as i64;
            index_since_latch = true;
            if q.qposcnt() != qposinit {
                res.fail(format!("edge {k}: index left {} instead of {qposinit}", q.qposcnt()));
            }
        }
        let want = net.rem_euclid(m) as u32;
        if q.qposcnt() != want {
            res.fail(format!("edge {k}: qposcnt {}, want {want}", q.qposcnt()));
            break;
        }
        now += rng.gen_range(1..2_000u64);
        if now >= q.next_timeout() {
            let (lat, delta) = q.unit_timeout(now);
            let cur = net.rem_euclid(m);
            let want_delta = if !index_since_latch && since_latch.abs() < m / 2 {
                since_latch
            } else {
                let d = (cur - latch_ref).rem_euclid(m);
                if d >= m / 2 {
                    d - m
                } else {
                    d
                }
            };
            if lat as i64 != cur || delta != want_delta {
                res.fail(format!("edge {k}: latch ({lat}, {delta}), want ({cur}, {want_delta})"));
            }
            latch_ref = cur;
            since_latch = 0;
            index_since_latch = false;
        }
    }
    if q.glitches() != 0 {
        res.fail(format!("{} glitches on a legal sequence", q.glitches()));
    }
    res
}

/// Engine runs with small random periods: SOC ticks on the counter peak,
/// and SOC, ISR and speed-loop counts consistent with the period count.
pub fn timing_suite(cases: u64, seed: u64) -> SuiteResult {
    let mut res = SuiteResult::new("timing");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..cases {
        res.cases += 1;
        let tbprd = rng.gen_range(200..=2000u32);
        let ds = rng.gen_range(1..=12u32);
        let periods = rng.gen_range(20..=200u64);
        let duration = (periods * 2 * tbprd as u64) as f64 / 200e6;
        let doc = format!(
            r#"{{"sim": {{"duration": {duration}, "tbprd": {tbprd}, "ds_ireg": {ds}, "deadband_ticks": 10}},
                "control": {{"mode": "FOC"}},
                "timeline": [{{"t": 0, "cmd": "PwmEnable", "value": true}},
                             {{"t": 0, "cmd": "SetSpeedRef", "value": 10}}]}}"#
        );
        let scenario = match load_scenario(&doc) {
            Ok(s) => s,
            Err(e) => {
                res.fail(format!("case {i}: {e}"));
                continue;
            }
        };
        let r = match run(&scenario, &mut []) {
            Ok(r) => r,
            Err(e) => {
                res.fail(format!("case {i}: {e}"));
                continue;
            }
        };
        let tag = format!("case {i} (tbprd {tbprd}, ds_ireg {ds}, {periods} periods)");
        if r.pwm_periods != periods || r.soc_count != periods || r.isr_count != periods {
            res.fail(format!(
                "{tag}: periods {}, socs {}, isrs {}",
                r.pwm_periods, r.soc_count, r.isr_count
            ));
        }
        if r.speed_ctrl_count != r.isr_count / ds as u64 || r.current_ctrl_count != r.isr_count {
            res.fail(format!(
                "{tag}: speed {} current {} for {} isrs",
                r.speed_ctrl_count, r.current_ctrl_count, r.isr_count
            ));
        }
    }
    res
}

/// All suites with the default sizes.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    vec![
        pwm_suite(200, seed),
        adc_suite(10_000, seed.wrapping_add(1)),
        qep_suite(100_000, seed.wrapping_add(2)),
        timing_suite(20, seed.wrapping_add(3)),
    ]
}
