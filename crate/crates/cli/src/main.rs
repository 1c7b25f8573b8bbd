//! `graftlab`: verification suites, grafting simulations and dilatation checks.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on malformed
//! input (scenario, map spec, constants) or any other error.

mod output;
mod qccheck;
mod scenario;
mod simulate;
mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use graftlab::Constants;
use serde::Serialize;

use output::Sink;
use scenario::{input_error, resolve_constants, Scenario};
use verify::{Check, Suite, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "graftlab",
    version,
    about = "Certified length bounds under iterated grafting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory; the main report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized property sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance override `name=value`, e.g. `qcmaps.twist_sup_k=1e-7`.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an invariant suite.
    Verify {
        suite: Suite,
        /// Scenario supplying constants, lattice and tolerance overrides.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Lattice side for the Beltrami checks.
        #[arg(long)]
        lattice: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Propagate length bounds for a scenario.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Beltrami estimate of one map over a refinement series.
    QcCheck {
        /// Map spec as inline JSON or a path to a JSON file.
        #[arg(long)]
        map: String,
        /// Lattice sides, repeatable.
        #[arg(long = "lattice", default_values_t = [129usize])]
        lattices: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

const PLACEHOLDERS: [&str; 4] = ["kappa", "k2", "k3", "t_radius"];

#[derive(Serialize)]
struct RunReport<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    suite: Option<Suite>,
    seed: u64,
    constants: Constants,
    /// Constants whose values are placeholders for unspecified universal constants.
    placeholder_constants: [&'static str; 4],
    tolerance_overrides: &'a BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<&'a Scenario>,
    checks: &'a [Check],
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<R>,
}

fn parse_tolerances(raw: &[String], base: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let mut out = base.clone();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| input_error(format!("tolerance {item:?} is not NAME=VALUE")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| input_error(format!("tolerance {item:?} has a non-numeric value")))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(input_error(format!(
                "tolerance {item:?} must be non-negative"
            )));
        }
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn load(path: Option<&PathBuf>) -> Result<Option<Scenario>> {
    path.map(|p| Scenario::load(p)).transpose()
}

fn timing(sink: &Sink, start: Instant) -> Result<()> {
    sink.json_file(
        "timing.json",
        &serde_json::json!({ "wall_clock_seconds": start.elapsed().as_secs_f64() }),
    )
}

fn run(cli: Cli) -> Result<bool> {
    let start = Instant::now();
    match cli.command {
        Command::Verify {
            suite,
            scenario,
            lattice,
            common,
        } => {
            let sc = load(scenario.as_ref())?;
            let constants = resolve_constants(sc.as_ref())?;
            let base = sc
                .as_ref()
                .map(|s| s.tolerances.clone())
                .unwrap_or_default();
            let tolerances = parse_tolerances(&common.tolerances, &base)?;
            let lattice = lattice
                .or(sc.as_ref().and_then(|s| s.lattice))
                .unwrap_or(129);
            if lattice < graftlab::qcmaps::MIN_LATTICE {
                return Err(input_error(format!(
                    "lattice {lattice} is below the minimum {}",
                    graftlab::qcmaps::MIN_LATTICE
                )));
            }
            let sink = Sink::new(common.out.as_deref())?;
            let cfg = VerifyConfig {
                constants,
                lattice,
                seed: common.seed,
                tolerances: tolerances.clone(),
            };
            let checks = verify::run(suite, &cfg)?;
            let passed = checks.iter().all(|c| c.passed);
            for c in &checks {
                eprintln!(
                    "{} {} value={:e} {} {:e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.relation,
                    c.tolerance
                );
            }
            let report = RunReport::<()> {
                tool: "graftlab",
                version: env!("CARGO_PKG_VERSION"),
                command: "verify",
                suite: Some(suite),
                seed: common.seed,
                constants,
                placeholder_constants: PLACEHOLDERS,
                tolerance_overrides: &tolerances,
                scenario: sc.as_ref(),
                checks: &checks,
                passed,
                results: None,
            };
            sink.report("report.json", &report)?;
            timing(&sink, start)?;
            Ok(passed)
        }
        Command::Simulate { scenario, common } => {
            let sc = Scenario::load(&scenario)?;
            let constants = resolve_constants(Some(&sc))?;
            let tolerances = parse_tolerances(&common.tolerances, &sc.tolerances)?;
            let sink = Sink::new(common.out.as_deref())?;
            let results = simulate::run(&sc, &constants, &sink)?;
            let report = RunReport {
                tool: "graftlab",
                version: env!("CARGO_PKG_VERSION"),
                command: "simulate",
                suite: None,
                seed: common.seed,
                constants,
                placeholder_constants: PLACEHOLDERS,
                tolerance_overrides: &tolerances,
                scenario: Some(&sc),
                checks: &[],
                passed: true,
                results: Some(results),
            };
            sink.report("report.json", &report)?;
            timing(&sink, start)?;
            Ok(true)
        }
        Command::QcCheck {
            map,
            lattices,
            common,
        } => {
            let spec = qccheck::parse_map(&map)?;
            let tolerances = parse_tolerances(&common.tolerances, &BTreeMap::new())?;
            if let Some(&n) = lattices
                .iter()
                .find(|&&n| n < graftlab::qcmaps::MIN_LATTICE)
            {
                return Err(input_error(format!(
                    "lattice {n} is below the minimum {}",
                    graftlab::qcmaps::MIN_LATTICE
                )));
            }
            let tol = tolerances.get("qc.rel_error").copied().unwrap_or(1e-6);
            let sink = Sink::new(common.out.as_deref())?;
            let report = qccheck::run(spec, &lattices, tol, &sink)?;
            let passed = report.passed;
            sink.report("qc_report.json", &report)?;
            timing(&sink, start)?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
