use furthlab_core::stochastic_paths::*;

use super::{base_report, Outcome};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::CsvTable;

pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("eps", "0.01", "0.01"),
    ("n_paths", "200", "1000"),
    ("n_steps", "500", "1000"),
    ("drift", "1", "1"),
];

const SWEEP_EPS: [f64; 4] = [0.04, 0.02, 0.01, 0.005];
const CHAIN_EPS: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];
const CSV_PATHS: usize = 20;

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let (mut report, c) = base_report(cfg)?;
    let spec = EnsembleSpec {
        n_paths: cfg.count("n_paths", 1)?,
        n_steps: cfg.count("n_steps", 2)?,
        epsilon: cfg.positive("eps")?,
        drift: 0.0,
        master_seed: cfg.seed(),
    };
    let drift: f64 = cfg.get("drift")?;

    let ensemble = sample_wiener_ensemble(&spec, &c)?;
    let diffusion = estimate_diffusion(&ensemble)?;
    report.result("n_increments", ensemble.n_increments());
    report.gate_below("diffusivity_discrepancy_sigma", diffusion.discrepancy_sigma.unwrap_or(f64::NAN), 3.0);
    report.result("diffusivity", &diffusion);
    report.result("increment_variance", increment_variance(&ensemble));
    report.result("velocity_gap_statistics", velocity_gap_statistics(&ensemble)?);
    report.result("osmotic_speed", osmotic_speed(&ensemble)?);

    let gap = gap_sweep(&SWEEP_EPS, &spec.with_seed(sweep_seed(spec.master_seed, 1)), &c)?;
    report.gate_below("gap_slope_offset_from_minus_half", (gap.fit.slope + 0.5).abs(), 0.05);
    report.result("gap_sweep", &gap);

    let drifting = EnsembleSpec { drift, ..spec.with_seed(sweep_seed(spec.master_seed, 2)) };
    let kinetic = kinetic_sweep(&SWEEP_EPS, &drifting, &c)?;
    let md = c.mass() * c.diffusivity();
    report.gate_below("naive_kinetic_slope_relative_error", (kinetic.naive_fit.slope - md).abs() / md, 0.1);
    let worst_sigma = kinetic
        .estimates
        .iter()
        .map(|k| k.symmetric.discrepancy_sigma.unwrap_or(f64::NAN))
        .fold(0.0, |m: f64, s| if s.is_nan() { f64::NAN } else { m.max(s) });
    report.gate_below("symmetric_kinetic_worst_sigma", worst_sigma, 3.0);
    report.result("kinetic_sweep", &kinetic);

    let drifting_ensemble = sample_wiener_ensemble(&drifting, &c)?;
    let identity = velocity_identity_residual(&ensemble).max(velocity_identity_residual(&drifting_ensemble));
    report.gate_below("velocity_identity_residual", identity, 1e-12);

    let chains = CHAIN_EPS.iter().map(|&e| uncertainty_products(e, &c)).collect::<furthlab_core::Result<Vec<_>>>()?;
    let xp_claim = chains[0].xp_claim;
    let xp_error = chains.iter().map(|ch| (ch.xp_product - ch.xp_claim).abs() / xp_claim).fold(0.0, f64::max);
    let products: Vec<f64> = chains.iter().map(|ch| ch.xp_product).collect();
    let spread = products.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b))
        - products.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    report.gate_below("xp_product_relative_error", xp_error, 1e-12);
    report.gate_below("xp_product_eps_spread", spread / xp_claim, 1e-12);
    let quarter = (c.hbar() / 4.0).powi(2);
    let et_ok = chains.iter().all(|ch| (ch.et_product - quarter).abs() <= 1e-12 * quarter);
    let flagged = chains.iter().all(|ch| (ch.et_discrepancy_factor - 4.0).abs() < 1e-12);
    if flagged {
        report.warn(format!(
            "energy-time product is (hbar/4)^2 = {quarter}, a factor 4 below the claimed (hbar/2)^2 = {}",
            chains[0].et_claim
        ));
    }
    report.gate_holds("energy_time_discrepancy_reported", et_ok && flagged);
    report.result("uncertainty_chain", &chains);

    let mut ens = CsvTable::new("ensembles.csv", &["path_id", "step", "t", "x"]);
    for (id, step, t, x) in ensemble.rows().take_while(|r| r.0 < CSV_PATHS) {
        ens.rows.push(vec![id.to_string(), step.to_string(), t.to_string(), x.to_string()]);
    }
    let mut sweep = CsvTable::new("eps_sweep.csv", &["eps", "naive_ke", "naive_stderr", "symm_ke", "symm_stderr"]);
    kinetic.rows().for_each(|r| sweep.push_numbers(&r));
    let mut gaps = CsvTable::new("gap_sweep.csv", &["eps", "gap_rms", "gap_stderr", "claim"]);
    for (e, r) in gap.epsilons.iter().zip(&gap.reports) {
        gaps.push_numbers(&[*e, r.estimate, r.stderr, r.claim.unwrap_or(f64::NAN)]);
    }
    Ok(Outcome { report, tables: vec![ens, sweep, gaps] })
}
