//! `vdrive`: run scenarios headless, serve a live session, or run the
//! peripheral conformance suites.
//!
//! Exit codes: 0 success, 1 bad arguments or scenario, 2 plant divergence,
//! 3 conformance failure, 4 I/O.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use vdrive_core::conformance::{self, SuiteResult};
use vdrive_core::engine::FrameRate;
use vdrive_core::telemetry::TelemetryError;
use vdrive_core::{load_scenario, scenarios, EngineError, Recorder, RunReport, Scenario, ScenarioError};
use vdrive_server::{ServeError, Server, StreamConfig};

#[derive(Parser)]
#[command(name = "vdrive", version, about = "Virtual induction-motor drive testbench")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario to completion and write frames.csv and report.json.
    Run(RunArgs),
    /// Run a scenario paced in real time with the live stream at /stream.
    Serve(ServeArgs),
    /// Run the per-tick PWM/ADC/eQEP oracle suites.
    Conformance(ConformanceArgs),
    /// List the bundled scenarios.
    List,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, short)]
    scenario: String,
    /// Frame rate for sinks; overrides the scenario.
    #[arg(long, value_enum)]
    frame_rate: Option<Rate>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory (created if missing).
    #[arg(long, short)]
    out: PathBuf,
    /// Run the conformance suites first and stop if they fail.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// TCP port; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Simulated seconds per wall second; 0 runs as fast as possible.
    #[arg(long, default_value_t = 1.0, value_parser = parse_realtime)]
    realtime: f64,
    /// Broadcast every n-th frame.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    decimation: u32,
    /// Stop when the scenario reaches its end instead of waiting for Ctrl-C.
    #[arg(long)]
    exit_on_finish: bool,
}

#[derive(Args)]
struct ConformanceArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rate {
    Control,
    Isr,
}

fn parse_realtime(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err("must be a finite number >= 0".into())
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("scenario {source_name}: {error}")]
    Scenario { source_name: String, error: ScenarioError },
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("conformance failed: {0}")]
    Conformance(String),
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: std::io::Error },
    #[error("{0}")]
    Telemetry(#[from] TelemetryError),
    #[error("{0}")]
    Serve(#[from] ServeError),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Scenario { .. } => 1,
            CliError::Engine(EngineError::Divergence { .. }) => 2,
            CliError::Engine(EngineError::Sink(_)) => 4,
            CliError::Conformance(_) => 3,
            CliError::Io { .. } | CliError::Telemetry(_) => 4,
            CliError::Serve(ServeError::Engine(EngineError::Divergence { .. })) => 2,
            CliError::Serve(ServeError::Config(_)) => 1,
            CliError::Serve(_) => 4,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |error| CliError::Io {
        path: path.to_path_buf(),
        error,
    }
}

/// A path that exists is read as a file; otherwise the argument (minus any
/// extension) is looked up among the bundled scenarios.
fn load(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    let path = Path::new(&args.scenario);
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(io_err(path))?
    } else {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        match scenarios::source(stem) {
            Some(t) => t.to_string(),
            None => {
                return Err(CliError::Io {
                    path: path.to_path_buf(),
                    error: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled scenario"),
                })
            }
        }
    };
    let mut scenario = load_scenario(&text).map_err(|error| CliError::Scenario {
        source_name: args.scenario.clone(),
        error,
    })?;
    if let Some(r) = args.frame_rate {
        scenario.sim.frame_rate = match r {
            Rate::Control => FrameRate::Control,
            Rate::Isr => FrameRate::Isr,
        };
    }
    Ok(scenario)
}

fn print_report(r: &RunReport) {
    println!(
        "simulated {:.3} s: {} ISRs, {} speed-loop runs, {} frames",
        r.duration, r.isr_count, r.speed_ctrl_count, r.frames
    );
    println!(
        "final speed {:.4} rad/s, max |i| {:.3} A, max |T| {:.3} N*m, clamps {}, trips {}",
        r.final_state.omega_m, r.max_abs_phase_current, r.max_abs_torque, r.duty_clamp_events, r.trips
    );
    for s in &r.steps {
        let settle = s
            .settling_time
            .map_or("not settled".to_string(), |t| format!("settled in {t:.3} s"));
        println!(
            "step {} -> {} at {:.3} s: {settle}, overshoot {:.2}%, steady-state error {:.4}",
            s.from, s.target, s.t_applied, s.overshoot_pct, s.steady_state_error
        );
    }
}

fn conformance_checks(seed: u64) -> Result<(), CliError> {
    let results = conformance::run_all(seed);
    report_suites(&results);
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Conformance(failed.join(", ")))
    }
}

fn report_suites(results: &[SuiteResult]) {
    for r in results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!("{status} {}: {} cases, {} failures", r.name, r.cases, r.failures.len());
        for f in &r.failures {
            println!("    {f}");
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let scenario = load(&args.scenario)?;
    if args.oracle {
        conformance_checks(1)?;
    }
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let mut rec = Recorder::default();
    let report = vdrive_core::run(&scenario, &mut [&mut rec])?;
    if rec.evicted() > 0 {
        eprintln!(
            "warning: {} oldest frames were evicted from the recorder",
            rec.evicted()
        );
    }
    let csv = args.out.join("frames.csv");
    let rows = rec.export_csv(&csv)?;
    let json = args.out.join("report.json");
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&json, text + "\n").map_err(io_err(&json))?;
    print_report(&report);
    println!(
        "wrote {rows} frames to {} and the report to {}",
        csv.display(),
        json.display()
    );
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<(), CliError> {
    let scenario = load(&args.scenario)?;
    let config = StreamConfig {
        decimation: args.decimation,
        realtime: args.realtime,
        exit_on_finish: args.exit_on_finish,
        ..StreamConfig::default()
    };
    let rt = tokio::runtime::Runtime::new().map_err(|error| CliError::Io {
        path: PathBuf::from("<runtime>"),
        error,
    })?;
    let report = rt.block_on(async {
        let server = Server::bind((args.host.as_str(), args.port), &scenario, config).await?;
        let addr = server.local_addr()?;
        println!("streaming on ws://{addr}/stream");
        server
            .run(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    print_report(&report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the validation exit code
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Serve(a) => cmd_serve(a),
        Cmd::Conformance(a) => conformance_checks(a.seed),
        Cmd::List => {
            for n in scenarios::names() {
                println!("{n}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
