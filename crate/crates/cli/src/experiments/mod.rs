//! One module per verb. Each turns a resolved `RunConfig` into a report and
//! its CSV tables without touching the filesystem.

pub mod dispersions;
pub mod evolve;
pub mod kernels;
pub mod paths;
pub mod radial;
pub mod wkb;

use furthlab_core::{ExperimentReport, PhysicsConstants};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::CsvTable;

pub const VERBS: [&str; 6] = ["kernels", "paths", "evolve", "wkb", "radial", "dispersions"];

pub struct Outcome {
    pub report: ExperimentReport,
    pub tables: Vec<CsvTable>,
}

/// (key, quick default, full default) for each verb.
pub fn defaults(verb: &str) -> &'static [(&'static str, &'static str, &'static str)] {
    match verb {
        "kernels" => kernels::DEFAULTS,
        "paths" => paths::DEFAULTS,
        "evolve" => evolve::DEFAULTS,
        "wkb" => wkb::DEFAULTS,
        "radial" => radial::DEFAULTS,
        "dispersions" => dispersions::DEFAULTS,
        _ => &[],
    }
}

pub fn run_verb(cfg: &RunConfig) -> CliResult<Outcome> {
    match cfg.verb.as_str() {
        "kernels" => kernels::run(cfg),
        "paths" => paths::run(cfg),
        "evolve" => evolve::run(cfg),
        "wkb" => wkb::run(cfg),
        "radial" => radial::run(cfg),
        "dispersions" => dispersions::run(cfg),
        other => Err(CliError::Usage(format!("unknown experiment {other}"))),
    }
}

pub(crate) fn base_report(cfg: &RunConfig) -> CliResult<(ExperimentReport, PhysicsConstants)> {
    let constants = cfg.constants()?;
    let mut report = ExperimentReport::new(cfg.verb.clone());
    for (k, v) in cfg.echo() {
        report.config(&k, v);
    }
    Ok((report, constants))
}
