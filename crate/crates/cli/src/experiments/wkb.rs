use furthlab_core::radial::{numerov_1d_eigenstate, numerov_eigensolve, radial_moments, Geometry, RadialProblem};
use furthlab_core::wkb::*;
use furthlab_core::PotentialSpec;

use super::{base_report, Outcome};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::CsvTable;

pub const DEFAULTS: &[(&str, &str, &str)] = &[("n", "10", "10"), ("guard", "0.1", "0.1")];

const HALF_WIDTH: f64 = 12.0;
const STEP: f64 = 0.005;

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let (mut report, c) = base_report(cfg)?;
    let n = cfg.count("n", 0)?;
    let guard = cfg.positive("guard")?;
    let pot = PotentialSpec::Harmonic { k: 1.0 };

    let state = numerov_1d_eigenstate(&pot, n, HALF_WIDTH, STEP, &c)?;
    let (branches, sol) = fit_wkb(state.energy, &pot, &state.state, guard, &c)?;
    let error = masked_relative_error(&sol, &state.state)?;
    report.result("energy", state.energy);
    report.result("turning_points", &sol.turning_points.points);
    report.result("masked_points", sol.masked_count());
    report.result("amplitudes", &branches);
    report.gate_below("wkb_relative_l2_error", error, 0.02);

    let identity = sol
        .momentum
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| (amplitude_factor(0.5 * p.ln()) - p.powf(-0.5)).abs() / p.powf(-0.5))
        .fold(0.0, f64::max);
    report.gate_below("amplitude_identity_relative_error", identity, 1e-12);

    let levels: Vec<usize> = {
        let mut v = vec![0, 1, 2, 5, n];
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut worst = 0.0f64;
    let mut splits = Vec::new();
    for level in levels {
        let s = numerov_1d_eigenstate(&pot, level, HALF_WIDTH, STEP, &c)?;
        let d = energy_decomposition_check(&s.state, s.energy, &pot, &c);
        worst = worst.max(d.residual.abs());
        splits.push(serde_json::json!({ "n": level, "decomposition": d }));
    }
    report.result("energy_decompositions", splits);
    report.gate_below("energy_decomposition_residual", worst, 1e-8);

    let hydrogen = RadialProblem::new(Geometry::Spherical, 0, PotentialSpec::Coulomb { charge: 1.0 });
    let h1s = numerov_eigensolve(&hydrogen, 0, &c)?;
    report.result("hydrogen_1s_moments", radial_moments(&h1s, &hydrogen, &c));

    let mut table = CsvTable::new("wkb.csv", &["x", "wkb_re", "wkb_im", "exact", "mask"]);
    let grid = state.state.grid();
    for (i, (w, e)) in sol.values.iter().zip(state.state.values()).enumerate() {
        table.push_numbers(&[grid.x(i), w.re, w.im, e.re, if sol.mask[i] { 1.0 } else { 0.0 }]);
    }
    Ok(Outcome { report, tables: vec![table] })
}
