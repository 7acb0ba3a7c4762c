use furthlab_core::kernels::*;
use furthlab_core::Grid1D;

use super::{base_report, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::CsvTable;

pub const DEFAULTS: &[(&str, &str, &str)] =
    &[("tau", "1", "1"), ("split", "0.5", "0.5"), ("slices", "4", "4"), ("damping", "0.01", "0.001")];

const PROFILE_WINDOW: f64 = 5.0;

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let (mut report, c) = base_report(cfg)?;
    let tau = cfg.positive("tau")?;
    let split: f64 = cfg.get("split")?;
    if !(split > 0.0 && split < 1.0) {
        return Err(CliError::Config(format!("split must lie in (0, 1), got {split}")));
    }
    let slices = cfg.count("slices", 1)?;
    let damping = cfg.positive("damping")?;

    let d = c.diffusivity();
    let sigma_min = (2.0 * d * tau * split.min(1.0 - split)).sqrt();
    let heat_grid = Grid1D::symmetric(1.0 + 10.0 * (2.0 * d * tau).sqrt(), sigma_min / 10.0)?;
    let heat = chapman_kolmogorov_residual(KernelKind::Heat, tau, split, &heat_grid, 0.0, &c)?;
    report.result("heat_composition_residual", heat);
    report.gate_below("heat_composition_residual", heat, 1e-8);

    let sweep = quantum_composition_sweep(tau, split, &DEFAULT_DAMPINGS, &c)?;
    let at_1e3 = sweep.dampings.iter().position(|&x| x == 1e-3).map(|i| sweep.residuals[i]).unwrap_or(f64::NAN);
    report.result("quantum_damping_sweep", &sweep);
    report.gate_below("quantum_composition_residual_at_1e-3", at_1e3, 1e-3);
    report.gate_holds("quantum_residual_monotone_in_damping", sweep.monotone());

    let (masses, limit) = damped_kernel_mass(tau, &DEFAULT_DAMPINGS, &c)?;
    report.result("damped_kernel_mass", serde_json::json!({ "values": masses, "extrapolated": limit }));

    let grid = multi_slice_grid(tau, slices, damping, &c)?;
    let sliced = multi_slice_kernel(KernelKind::Quantum, tau, slices, &grid, damping, &c)?;
    let direct = KernelTable::direct(KernelKind::Quantum, tau, grid, &c)?;
    let deviation = sliced.max_deviation(&direct, 2.0)?;
    report.result("multi_slice", serde_json::json!({ "slices": slices, "damping": damping, "max_deviation_within_2": deviation }));

    let mut table = CsvTable::new("kernel.csv", &["displacement", "re", "im"]);
    for (x, re, im) in sliced.rows().filter(|(x, _, _)| x.abs() <= PROFILE_WINDOW) {
        table.push_numbers(&[x, re, im]);
    }
    let mut sweep_table = CsvTable::new("damping_sweep.csv", &["damping", "residual"]);
    for (dmp, r) in sweep.dampings.iter().zip(&sweep.residuals) {
        sweep_table.push_numbers(&[*dmp, *r]);
    }
    Ok(Outcome { report, tables: vec![table, sweep_table] })
}
