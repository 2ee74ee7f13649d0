//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any failed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vdrive_core::conformance::{pwm_suite, qep_suite, timing_suite};
use vdrive_core::engine::EventKind;
use vdrive_core::firmware::scale_current;
use vdrive_core::periph::AdcUnit;
use vdrive_core::plant::{integrate, MotorParams, MotorState, PlantInputs, SenseChain};
use vdrive_core::{load_scenario, run, scenarios, Engine, Recorder, RunReport, Scenario, TelemetryFrame};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn bundled(name: &str) -> Scenario {
    scenarios::bundled(name).expect("bundled").expect("valid")
}

fn run_frames(s: &Scenario) -> (RunReport, Vec<TelemetryFrame>) {
    let mut frames: Vec<TelemetryFrame> = Vec::new();
    let report = run(s, &mut [&mut frames]).expect("run");
    (report, frames)
}

/// One reference step as seen in the frame stream.
struct Step {
    t0: f64,
    from: f64,
    target: f64,
    settling: Option<f64>,
    overshoot_pct: f64,
    /// |mean ω − target| over the last 0.1 s of the window.
    ss_error: f64,
    /// Mean i_q from the step until ω first enters the band.
    mean_iq_accel: f64,
}

fn steps_from_frames(frames: &[TelemetryFrame]) -> Vec<Step> {
    let mut starts = Vec::new();
    for (k, w) in frames.windows(2).enumerate() {
        if w[1].omega_ref != w[0].omega_ref {
            starts.push(k + 1);
        }
    }
    let mut out = Vec::new();
    for (n, &s) in starts.iter().enumerate() {
        let end = starts.get(n + 1).copied().unwrap_or(frames.len());
        let win = &frames[s..end];
        let from = frames[s - 1].omega_ref;
        let target = win[0].omega_ref;
        let delta = target - from;
        let band = 0.02 * if target != 0.0 { target.abs() } else { delta.abs() };
        let t0 = win[0].t;
        let outside = |f: &TelemetryFrame| (f.omega_m - target).abs() > band;
        let settling = match win.iter().rposition(outside) {
            None => Some(0.0),
            Some(i) if i + 1 < win.len() => Some(win[i + 1].t - t0),
            Some(_) => None,
        };
        let peak = win
            .iter()
            .map(|f| (f.omega_m - target) * delta.signum())
            .fold(0.0f64, f64::max);
        let tail: Vec<f64> = win
            .iter()
            .filter(|f| f.t > win[win.len() - 1].t - 0.1)
            .map(|f| f.omega_m)
            .collect();
        let mean_tail = tail.iter().sum::<f64>() / tail.len() as f64;
        let first_in = win.iter().position(|f| !outside(f)).unwrap_or(win.len());
        let accel = &win[..first_in.max(1)];
        let mean_iq_accel = accel.iter().map(|f| f.i_q).sum::<f64>() / accel.len() as f64;
        out.push(Step {
            t0,
            from,
            target,
            settling,
            overshoot_pct: 100.0 * peak / delta.abs(),
            ss_error: (mean_tail - target).abs(),
            mean_iq_accel,
        });
    }
    out
}

fn step120() -> Outcome {
    let s = bundled("step120");
    let t = Instant::now();
    let (report, frames) = run_frames(&s);
    let wall = t.elapsed().as_secs_f64();
    let steps = steps_from_frames(&frames);
    if steps.len() != 1 || steps[0].target != 120.0 {
        return outcome(false, format!("expected one step to 120, found {}", steps.len()));
    }
    let st = &steps[0];
    let settling = st.settling.unwrap_or(f64::INFINITY);
    // the engine's own metrics must agree with the frame-based ones
    let rep = &report.steps[0];
    let agree = rep.settling_time.is_some_and(|x| (x - settling).abs() < 1.5e-3)
        && (rep.overshoot_pct - st.overshoot_pct).abs() < 0.5;
    outcome(
        settling <= 0.7 && st.overshoot_pct <= 5.0 && wall <= 30.0 && report.duration == 2.0 && agree,
        format!(
            "settling {settling:.3} s (<= 0.7), overshoot {:.2}% (<= 5), wall {wall:.2} s for {} s simulated (<= 30), report agrees: {agree}",
            st.overshoot_pct, report.duration
        ),
    )
}

fn reversal() -> Outcome {
    let (_, frames) = run_frames(&bundled("reversal"));
    let steps = steps_from_frames(&frames);
    let mut ok = steps.len() == 4;
    let mut parts = Vec::new();
    for st in &steps {
        let settling = st.settling.unwrap_or(f64::INFINITY);
        let sign_ok = st.mean_iq_accel.signum() == (st.target - st.from).signum();
        ok &= settling <= 0.7 && sign_ok;
        parts.push(format!(
            "{}->{} at {:.2}s: settle {settling:.3}s, mean iq {:+.2}",
            st.from, st.target, st.t0, st.mean_iq_accel
        ));
    }
    outcome(ok, format!("{} reversals; {}", steps.len(), parts.join("; ")))
}

fn multistep() -> Outcome {
    let (_, frames) = run_frames(&bundled("multistep"));
    let steps = steps_from_frames(&frames);
    let mut ok = steps.len() == 3;
    let mut parts = Vec::new();
    for st in &steps {
        let pct = 100.0 * st.ss_error / st.target.abs();
        ok &= st.settling.is_some() && pct <= 1.0;
        parts.push(format!(
            "{}: error {pct:.4}% settle {:?}",
            st.target,
            st.settling.map(|x| (x * 1e3).round() / 1e3)
        ));
    }
    outcome(ok, format!("{} steps; {}", steps.len(), parts.join("; ")))
}

fn safe_torque() -> Outcome {
    let (report, frames) = run_frames(&bundled("safe_torque"));
    let w = report.final_state.omega_m.abs();
    let te = report.max_abs_torque;
    let enabled = frames
        .iter()
        .all(|f| f.pwm_enabled && f.duty_a == 0.5 && f.duty_b == 0.5 && f.duty_c == 0.5);
    outcome(
        w < 0.01 && te < 0.01 && enabled && report.duration == 1.0,
        format!("|w| {w:.3e} rad/s (< 0.01), max |Te| {te:.3e} N*m (< 0.01), duties 0.5 with PWM enabled: {enabled}"),
    )
}

fn pwm_conformance() -> Outcome {
    let r = pwm_suite(200, 0x5eed);
    outcome(
        r.passed() && r.cases == 200,
        format!(
            "{} configs, {} failures {:?}",
            r.cases,
            r.failures.len(),
            r.failures.first()
        ),
    )
}

fn timing() -> Outcome {
    let counts = timing_suite(20, 7);
    let mut errs: Vec<String> = counts.failures.clone();
    // SOC instants on a traced engine
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let tbprd: u64 = rng.gen_range(500..=5000);
        let doc = format!(
            r#"{{"sim": {{"duration": {}, "tbprd": {tbprd}, "deadband_ticks": 20}}}}"#,
            (60 * tbprd) as f64 / 200e6
        );
        let mut e = Engine::new(&load_scenario(&doc).unwrap());
        e.enable_trace();
        while !e.is_finished() {
            e.step_to_next_event().unwrap();
        }
        let socs: Vec<u64> = e
            .trace()
            .iter()
            .filter(|t| t.kind == EventKind::Soc)
            .map(|t| t.tick)
            .collect();
        let want: Vec<u64> = (0..30).map(|k| (2 * k + 1) * tbprd).collect();
        if socs != want {
            errs.push(format!("tbprd {tbprd}: soc ticks {:?}..", &socs[..socs.len().min(3)]));
        }
    }
    // the bundled run as well
    let s = bundled("step120");
    let r = run(&s, &mut []).unwrap();
    let ds = s.control.ds_ireg as u64;
    if !(r.soc_count == r.pwm_periods && r.isr_count == r.soc_count && r.speed_ctrl_count == r.isr_count / ds) {
        errs.push(format!("step120 counts: {r:?}"));
    }
    outcome(
        errs.is_empty(),
        format!(
            "{} random runs + 5 traced + step120 ({} periods, {} SOC, {} ISR, {} speed); failures {:?}",
            counts.cases,
            r.pwm_periods,
            r.soc_count,
            r.isr_count,
            r.speed_ctrl_count,
            errs.first()
        ),
    )
}

fn eqep() -> Outcome {
    let r = qep_suite(100_000, 3);
    outcome(
        r.passed() && r.cases == 100_000,
        format!(
            "{} edges, {} failures {:?}",
            r.cases,
            r.failures.len(),
            r.failures.first()
        ),
    )
}

/// α-axis locked-rotor model: x = [i_α, ψ_α], x' = A x + b v.
fn locked_rotor_matrix(p: &MotorParams) -> ([[f64; 2]; 2], [f64; 2]) {
    let sls = p.sigma() * p.ls;
    let tr = p.lr / p.rr;
    let k = p.lm / p.lr;
    let rs = p.rs + p.rr * k * k;
    ([[-rs / sls, k / (tr * sls)], [p.lm / tr, -1.0 / tr]], [1.0 / sls, 0.0])
}

/// Closed-form x(t) from rest under constant v: A⁻¹ (e^{At} − I) b v, with
/// e^{At} from Sylvester's formula for distinct real eigenvalues.
fn locked_rotor_exact(p: &MotorParams, v: f64, t: f64) -> [f64; 2] {
    let (a, b) = locked_rotor_matrix(p);
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    let c0 = (l1 * (l2 * t).exp() - l2 * (l1 * t).exp()) / (l1 - l2);
    let c1 = ((l1 * t).exp() - (l2 * t).exp()) / (l1 - l2);
    let e = [[c0 + c1 * a[0][0], c1 * a[0][1]], [c1 * a[1][0], c0 + c1 * a[1][1]]];
    let bv = [b[0] * v, b[1] * v];
    let m = [[e[0][0] - 1.0, e[0][1]], [e[1][0], e[1][1] - 1.0]];
    let y = [m[0][0] * bv[0] + m[0][1] * bv[1], m[1][0] * bv[0] + m[1][1] * bv[1]];
    // A⁻¹ y
    [
        (a[1][1] * y[0] - a[0][1] * y[1]) / det,
        (-a[1][0] * y[0] + a[0][0] * y[1]) / det,
    ]
}

fn locked_rotor_run(p: &MotorParams, v: f64, h: f64, steps: usize, mut each: impl FnMut(f64, &MotorState)) -> bool {
    let inputs = PlantInputs {
        v_alpha: v,
        ..PlantInputs::default()
    };
    let mut s = MotorState::default();
    for n in 1..=steps {
        s = integrate(&s, &inputs, h, p).unwrap();
        if s.omega_m != 0.0 || s.i_beta != 0.0 {
            return false;
        }
        each(n as f64 * h, &s);
    }
    true
}

fn numerics() -> Outcome {
    let p = MotorParams::default();
    let v = 10.0;

    // locked rotor
    let mut max_err = 0.0f64;
    let mut max_i = 0.0f64;
    let locked = locked_rotor_run(&p, v, 1e-5, 50_000, |t, s| {
        let x = locked_rotor_exact(&p, v, t);
        max_err = max_err.max((s.i_alpha - x[0]).abs());
        max_i = max_i.max(x[0].abs());
    });
    let locked_rel = max_err / max_i;

    // convergence order at a fixed end time
    let t_end: f64 = 0.05;
    let errs: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|&h| {
            let n = (t_end / h).round() as usize;
            let mut last = MotorState::default();
            locked_rotor_run(&p, v, h, n, |_, s| last = *s);
            let x = locked_rotor_exact(&p, v, t_end);
            ((last.i_alpha - x[0]).powi(2) + (last.psi_alpha - x[1]).powi(2)).sqrt()
        })
        .collect();
    let order = (errs[0] / errs[1]).log2().min((errs[1] / errs[2]).log2());

    // free deceleration: ω(t) = ω0·exp(−B t / J)
    let w0 = 100.0;
    let mut s = MotorState {
        omega_m: w0,
        ..MotorState::default()
    };
    let h = 1e-3;
    let mut decel_err = 0.0f64;
    for n in 1..=10_000 {
        s = integrate(&s, &PlantInputs::default(), h, &p).unwrap();
        let t = n as f64 * h;
        decel_err = decel_err.max((s.omega_m - w0 * (-p.friction * t / p.inertia).exp()).abs());
    }

    let balance = power_balance();

    let pass = locked && locked_rel <= 1e-3 && decel_err <= 1e-6 && order >= 3.8 && balance <= 0.01;
    outcome(
        pass,
        format!(
            "locked rotor {:.2e} rel (<= 1e-3), free decel {decel_err:.2e} (<= 1e-6), RK4 order {order:.3} (>= 3.8), power balance {:.4}% (<= 1%)",
            locked_rel,
            100.0 * balance
        ),
    )
}

/// Averaged coupling, loaded steady state: energy from the DC link against
/// shaft power plus stator and rotor copper losses over the last 0.5 s.
fn power_balance() -> f64 {
    let doc = r#"{
        "sim": {"duration": 2.0, "coupling": "averaged"},
        "control": {"mode": "FOC"},
        "timeline": [
            {"t": 0.0, "cmd": "PwmEnable", "value": true},
            {"t": 0.0, "cmd": "SetSpeedRef", "value": 100},
            {"t": 0.0, "cmd": "SetLoadTorque", "value": 3.0}
        ]
    }"#;
    let s = load_scenario(doc).unwrap();
    let p = s.motor;
    let v_dc = s.inverter.v_dc;
    let mut e = Engine::new(&s);
    e.run_until((1.5 * s.sim.f_sys) as u64).unwrap();
    let phase = |m: &MotorState| {
        let a = m.i_alpha;
        let b = 0.5 * (-m.i_alpha + 3f64.sqrt() * m.i_beta);
        [a, b, -a - b]
    };
    let loss = |m: &MotorState| {
        let (ra, rb) = m.rotor_current(&p);
        1.5 * (p.rs * (m.i_alpha.powi(2) + m.i_beta.powi(2)) + p.rr * (ra * ra + rb * rb))
    };
    let (mut e_dc, mut e_out) = (0.0, 0.0);
    while !e.is_finished() {
        let d: Vec<f64> = (0..3).map(|k| e.pwm(k).pole_duty()).collect();
        let s0 = *e.motor();
        let t0 = e.time();
        e.step_to_next_event().unwrap();
        let s1 = *e.motor();
        let dt = e.time() - t0;
        let p_dc = |m: &MotorState| phase(m).iter().zip(&d).map(|(i, d)| d * v_dc * i).sum::<f64>();
        let p_out = |m: &MotorState| m.torque(&p) * m.omega_m + loss(m);
        e_dc += 0.5 * dt * (p_dc(&s0) + p_dc(&s1));
        e_out += 0.5 * dt * (p_out(&s0) + p_out(&s1));
    }
    ((e_dc - e_out) / e_dc).abs()
}

fn sense_round_trip() -> Outcome {
    let s = Scenario::default();
    let sense = SenseChain::default();
    let adc = AdcUnit::default();
    let mut worst = 0.0f64;
    let mut worst_at = 0.0;
    let n = 240_000;
    for k in 0..=n {
        let i = -12.0 + 24.0 * k as f64 / n as f64;
        let (v, sat) = sense.output(i);
        let (code, adc_sat) = adc.code_for(v);
        assert!(!sat && !adc_sat);
        let back = scale_current(code, s.control.offset_ia, s.control.gain_i);
        if (back - i).abs() > worst {
            worst = (back - i).abs();
            worst_at = i;
        }
    }
    outcome(
        worst <= 0.009,
        format!(
            "worst error {worst:.5} A at {worst_at:.4} A over {} points in [-12, 12] A (<= 0.009)",
            n + 1
        ),
    )
}

fn determinism() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in scenarios::names() {
        let s = bundled(name);
        let csv = || {
            let mut rec = Recorder::default();
            run(&s, &mut [&mut rec]).unwrap();
            let mut buf = Vec::new();
            rec.write_csv(&mut buf).unwrap();
            buf
        };
        let (a, b) = (csv(), csv());
        ok &= a == b && !a.is_empty();
        parts.push(format!(
            "{name} {} bytes {}",
            a.len(),
            if a == b { "same" } else { "DIFFERENT" }
        ));
    }
    outcome(ok, parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("step120 settling/overshoot/runtime", step120),
        ("reversal tracking and iq polarity", reversal),
        ("multistep steady-state error", multistep),
        ("safe torque at equal duties", safe_torque),
        ("PWM conformance", pwm_conformance),
        ("timing counts and SOC instants", timing),
        ("eQEP conformance", eqep),
        ("plant numerics", numerics),
        ("sense chain round trip", sense_round_trip),
        ("determinism of CSV export", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
