use furthlab_core::num_complex::Complex64;
use furthlab_core::stats::log_log_fit;
use furthlab_core::timeslice::*;
use furthlab_core::{Grid1D, PhysicsConstants, PotentialSpec, WaveFunction};

use super::{base_report, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::CsvTable;

pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("eps", "0.01", "0.01"),
    ("n_steps", "100", "100"),
    ("potential", "harmonic", "harmonic"),
    ("mode", "full", "full"),
    ("dx", "0.05", "0.05"),
    ("half_width", "8", "8"),
];

const BARRIER: PotentialSpec = PotentialSpec::Barrier { height: 4.0, width: 0.5 };
const MODES_BARRIER_HEIGHT: f64 = 4.0;

/// Ground-state width of U = x²/2: σ² = ħ/(2mω), ω = 1/√m.
fn harmonic_ground_state(grid: Grid1D, c: &PhysicsConstants) -> CliResult<WaveFunction> {
    let omega = (1.0 / c.mass()).sqrt();
    Ok(WaveFunction::gaussian_packet(grid, 0.0, (c.hbar() / (2.0 * c.mass() * omega)).sqrt(), 0.0)?)
}

fn full(eps: f64, n: usize) -> CliResult<EvolutionConfig> {
    Ok(EvolutionConfig::new(eps, n, PotentialMode::FullExponential)?)
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let (mut report, c) = base_report(cfg)?;
    let harmonic = PotentialSpec::Harmonic { k: 1.0 };

    // free spreading
    let free_grid = Grid1D::symmetric(15.0, 0.05)?;
    let packet = WaveFunction::gaussian_packet(free_grid, 0.0, 1.0, 0.0)?;
    let free = evolve(&packet, &full(0.01, 100)?, &PotentialSpec::Free, &c, 1)?;
    let s2 = free.last().position_variance();
    let s2_exact = 1.0 + (c.hbar() * 1.0 / (2.0 * c.mass())).powi(2);
    report.result("free_variance", serde_json::json!({ "measured": s2, "exact": s2_exact }));
    report.gate_below("free_variance_relative_error", (s2 - s2_exact).abs() / s2_exact, 1e-3);
    let free_drift = free.norm_drift.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    report.gate_below("free_norm_drift_per_step", free_drift, 1e-6);
    let residual = schrodinger_residual(&free.snapshots[..11], 0.01, &PotentialSpec::Free, &c)?;
    report.gate_below("schrodinger_residual", residual, 1e-3);

    // harmonic stationarity and drift
    let ground = harmonic_ground_state(Grid1D::symmetric(8.0, 0.05)?, &c)?;
    let stat = evolve(&ground, &full(0.01, 100)?, &harmonic, &c, 100)?;
    let deviation = stat.last().max_modulus_diff(&ground)?;
    report.gate_below("harmonic_ground_state_deviation", deviation, 1e-3);
    let per_step = stat.norm_drift.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    report.result(
        "harmonic_norm_drift",
        serde_json::json!({ "max_per_step": per_step, "cumulative": stat.cumulative_drift(), "midpoint_estimate_per_step": 1e-4 / (4.0 * c.mass()) }),
    );
    if per_step > 1e-6 {
        report.warn(format!("harmonic norm drift per step {per_step:.3e} exceeds 1e-6 (midpoint potential sampling)"));
    }

    let moving = WaveFunction::gaussian_packet(Grid1D::symmetric(10.0, 0.05)?, 1.0, 0.8, 0.5)?;
    let stepped = evolve(&moving, &full(0.01, 100)?, &harmonic, &c, 100)?;
    let reference = spectral_reference_evolve(&moving, &full(0.01, 100)?, &harmonic, &c)?;
    report.gate_below("harmonic_vs_split_operator", stepped.last().max_abs_diff(&reference)?, 1e-3);

    // expanded against full potential factor
    let modes_grid = Grid1D::symmetric(10.0, 0.05)?;
    let modes_pot = PotentialSpec::Barrier { height: MODES_BARRIER_HEIGHT, width: 0.525 };
    let start = WaveFunction::gaussian_packet(modes_grid, 0.0, 1.0, 2.0)?;
    let eps = [0.02, 0.01, 0.005, 0.0025];
    let mut diffs = Vec::new();
    let mut within_bound = true;
    for &e in &eps {
        let a = short_time_step(&start, &full(e, 1)?, &modes_pot, &c)?;
        let b = short_time_step(&start, &EvolutionConfig::new(e, 1, PotentialMode::ExpandedFirstOrder)?, &modes_pot, &c)?;
        let diff: Vec<Complex64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
        let l2 = WaveFunction::new(modes_grid, diff)?.norm();
        within_bound &= l2 <= (e * MODES_BARRIER_HEIGHT / c.hbar()).powi(2) / 2.0 * start.norm();
        diffs.push(a.max_abs_diff(&b)?);
    }
    let order = log_log_fit(&eps, &diffs)?.slope;
    report.result("mode_difference", serde_json::json!({ "eps": eps, "max_abs_diff": diffs, "order": order }));
    report.gate_at_least("mode_difference_order", order, 1.9);
    report.gate_holds("mode_difference_within_expansion_bound", within_bound);

    // configured run
    let potential = match cfg.raw("potential")? {
        "free" => PotentialSpec::Free,
        "harmonic" => harmonic,
        "barrier" => BARRIER,
        other => return Err(CliError::Config(format!("unknown potential {other:?}"))),
    };
    let mode = match cfg.raw("mode")? {
        "full" => PotentialMode::FullExponential,
        "expanded" => PotentialMode::ExpandedFirstOrder,
        other => return Err(CliError::Config(format!("unknown mode {other:?}"))),
    };
    let half_width = cfg.positive("half_width")?;
    let grid = Grid1D::symmetric(half_width, cfg.positive("dx")?)?;
    let mut run_cfg = EvolutionConfig::new(cfg.positive("eps")?, cfg.count("n_steps", 0)?, mode)?;
    let psi0 = match potential {
        PotentialSpec::Harmonic { .. } => harmonic_ground_state(grid, &c)?,
        PotentialSpec::Barrier { .. } => {
            if half_width < 12.0 {
                return Err(CliError::Config("barrier runs need half_width >= 12".into()));
            }
            run_cfg.renormalize = true;
            WaveFunction::gaussian_packet(grid, -6.0, 1.5, 2.0)?
        }
        _ => WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0)?,
    };
    let evo = evolve(&psi0, &run_cfg, &potential, &c, run_cfg.n_steps.max(1))?;
    let last = evo.last();
    report.result(
        "run",
        serde_json::json!({
            "potential": potential,
            "total_time": run_cfg.total_time(),
            "renormalized": run_cfg.renormalize,
            "cumulative_norm_drift": evo.cumulative_drift(),
            "mean_position": last.mean_position(),
            "position_variance": last.position_variance(),
        }),
    );
    if let PotentialSpec::Barrier { width, .. } = potential {
        let reference = spectral_reference_evolve(&psi0, &EvolutionConfig { renormalize: false, ..run_cfg }, &potential, &c)?;
        let t = probability_beyond(last, width / 2.0);
        let t_ref = probability_beyond(&reference, width / 2.0);
        report.result("transmission", serde_json::json!({ "time_slice": t, "split_operator": t_ref }));
        report.gate_below("transmission_difference", (t - t_ref).abs(), 1e-2);
    }

    let mut snap = CsvTable::new("snapshots.csv", &["x", "re", "im", "abs2"]);
    for (i, z) in last.values().iter().enumerate() {
        snap.push_numbers(&[grid.x(i), z.re, z.im, z.norm_sqr()]);
    }
    Ok(Outcome { report, tables: vec![snap] })
}
