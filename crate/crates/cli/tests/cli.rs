use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn vdrive(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdrive")).args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_step120_writes_frames_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let o = vdrive(&["run", "--scenario", "step120.cfg", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));

    let csv = fs::read_to_string(out.join("frames.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("t,omega_ref,omega_meas_filt,omega_m,"));
    assert_eq!(lines.count(), 2000);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["isr_count"], 20000);
    let settle = report["steps"][0]["settling_time"].as_f64().unwrap();
    assert!(settle <= 0.7, "{settle}");
    assert!(text(&o.stdout).contains("step 0 -> 120"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = vdrive(&["run", "-s", "vf_ramp", "-o", d.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(
        fs::read(a.join("frames.csv")).unwrap(),
        fs::read(b.join("frames.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("report.json")).unwrap(),
        fs::read(b.join("report.json")).unwrap()
    );
}

#[test]
fn isr_frame_rate_override() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", r#"{"sim": {"duration": 0.01}}"#);
    let out = dir.path().join("o");
    let o = vdrive(&["run", "-s", &sc, "-o", out.to_str().unwrap(), "--frame-rate", "isr"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("frames.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 100);
}

#[test]
fn malformed_scenario_exits_1_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "bad.json", r#"{"sim": {"duration": 1.0, "tbprd": 0}}"#);
    let o = vdrive(&["run", "-s", &sc, "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("sim.tbprd"), "{}", text(&o.stderr));

    let sc = write(dir.path(), "bad2.json", r#"{"sim": {"duration": }"#);
    let o = vdrive(&["run", "-s", &sc, "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("line 1"), "{}", text(&o.stderr));
}

#[test]
fn bad_arguments_exit_1() {
    assert_eq!(vdrive(&["run"]).status.code(), Some(1));
    assert_eq!(
        vdrive(&["serve", "-s", "step120", "--realtime", "-1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        vdrive(&["serve", "-s", "step120", "--port", "70000"]).status.code(),
        Some(1)
    );
    assert_eq!(vdrive(&["--help"]).status.code(), Some(0));
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "div.json",
        r#"{"motor": {"J": 1e-300}, "sim": {"duration": 0.01},
            "timeline": [{"t": 0.0, "cmd": "SetLoadTorque", "value": 1e300}]}"#,
    );
    let o = vdrive(&["run", "-s", &sc, "-o", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("diverged at tick"));
}

#[test]
fn missing_scenario_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = vdrive(&["run", "-s", "no_such_thing", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(text(&o.stderr).contains("no_such_thing"));
}

#[test]
fn conformance_passes_with_counts() {
    let o = vdrive(&["conformance"]);
    assert!(o.status.success());
    let out = text(&o.stdout);
    for suite in [
        "pwm: 200 cases",
        "adc: 10000 cases",
        "qep: 100000 cases",
        "timing: 20 cases",
    ] {
        assert!(out.contains(&format!("PASS {suite}")), "{out}");
    }
}

#[test]
fn list_shows_bundled_scenarios() {
    let out = text(&vdrive(&["list"]).stdout);
    assert_eq!(
        out.lines().collect::<Vec<_>>(),
        ["safe_torque", "step120", "reversal", "multistep", "vf_ramp"]
    );
}

#[test]
fn serve_announces_address_and_exits_on_finish() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_vdrive"))
        .args([
            "serve",
            "-s",
            "safe_torque",
            "--port",
            "0",
            "--realtime",
            "0",
            "--exit-on-finish",
        ])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    let mut first = String::new();
    stdout.read_line(&mut first).unwrap();
    assert!(first.starts_with("streaming on ws://127.0.0.1:"), "{first}");
    assert!(first.trim_end().ends_with("/stream"));
    let mut rest = String::new();
    stdout.read_to_string(&mut rest).unwrap();
    assert!(child.wait().unwrap().success());
    assert!(rest.contains("simulated 1.000 s: 10000 ISRs"), "{rest}");
}
