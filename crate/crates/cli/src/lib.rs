//! Command-line front end: argument parsing, configuration layering, the
//! per-verb experiments and atomic output.

pub mod args;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::Parser;
use furthlab_core::ExperimentReport;

use crate::args::{Cli, Verb};
use crate::config::{read_config_file, RunConfig};
use crate::error::{CliError, CliResult};
use crate::experiments::{defaults, run_verb, Outcome, VERBS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GATE: i32 = 2;

pub const THREADS_ENV: &str = "FURTHLAB_THREADS";

/// Caps the global rayon pool from `FURTHLAB_THREADS` when set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn resolve(verb: &str, file: &BTreeMap<String, String>, flags: &[(&str, String)]) -> CliResult<RunConfig> {
    RunConfig::resolve(verb, defaults(verb), file, flags)
}

/// Runs one experiment and writes its outputs into `dir`.
pub fn execute(cfg: &RunConfig, dir: &Path) -> CliResult<ExperimentReport> {
    let Outcome { report, tables } = run_verb(cfg)?;
    output::write_outputs(dir, &report, &tables)?;
    Ok(report)
}

/// Runs every experiment into `<out>/<verb>/` and writes a summary report
/// holding all gates, prefixed by experiment.
pub fn execute_all(file: &BTreeMap<String, String>, flags: &[(&str, String)]) -> CliResult<ExperimentReport> {
    let top = resolve("all", file, flags)?;
    let dir = top.out_dir();
    let mut summary = ExperimentReport::new("all");
    for (k, v) in top.echo() {
        summary.config(&k, v);
    }
    for verb in VERBS {
        let cfg = resolve(verb, file, flags)?;
        let report = execute(&cfg, &dir.join(verb))?;
        summary.result(verb, serde_json::json!({ "passed": report.all_passed(), "gates": report.gates.len() }));
        for g in &report.gates {
            let mut g = g.clone();
            g.name = format!("{verb}.{}", g.name);
            summary.gates.push(g);
        }
        summary.warnings.extend(report.warnings.iter().map(|w| format!("{verb}: {w}")));
    }
    output::write_atomic(&dir.join("report.json"), summary.to_json().as_bytes())?;
    Ok(summary)
}

fn run_cli(cli: Cli) -> CliResult<ExperimentReport> {
    configure_threads()?;
    let verb = &cli.verb;
    let file = match &verb.common().config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let flags = verb.flags();
    match verb {
        Verb::All(_) => execute_all(&file, &flags),
        _ => {
            let cfg = resolve(verb.name(), &file, &flags)?;
            execute(&cfg, &cfg.out_dir())
        }
    }
}

fn summarize(report: &ExperimentReport) {
    for g in &report.gates {
        eprintln!("{} {} measured={:e} tolerance={:e}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.measured, g.tolerance);
    }
    for w in &report.warnings {
        eprintln!("note: {w}");
    }
}

/// Parses `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let started = std::time::Instant::now();
    match run_cli(cli) {
        Ok(report) => {
            summarize(&report);
            eprintln!("elapsed {:.2}s", started.elapsed().as_secs_f64());
            if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_GATE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
