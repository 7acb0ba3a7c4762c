use furthlab_core::radial::*;
use furthlab_core::PotentialSpec;

use super::{base_report, Outcome};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::CsvTable;

pub const DEFAULTS: &[(&str, &str, &str)] = &[("l_max", "10", "10")];

const W2_L_MAX: u32 = 5;

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let (mut report, c) = base_report(cfg)?;
    let l_max: u32 = cfg.get("l_max")?;
    let h2 = c.hbar().powi(2);

    let mut table = CsvTable::new(
        "dispersions.csv",
        &["l", "dLx2", "dLy2", "dLz2", "lz_mean", "l2_total", "claim_dLz2", "l2_claim", "gap"],
    );
    let (mut top_error, mut gap_error, mut identity_error) = (0.0f64, 0.0f64, 0.0f64);
    let mut gaps = Vec::new();
    for l in 0..=l_max {
        let r = angular_momentum_oracle(l, l as i32, &c)?;
        let target = l as f64 * h2 / 2.0;
        top_error = top_error.max((r.dispersions.x - target).abs()).max((r.dispersions.y - target).abs());
        gap_error = gap_error.max((r.l2_gap - h2 / 4.0).abs());
        gaps.push(r.l2_gap);
        let lh = l as f64 * c.hbar();
        identity_error = identity_error.max((lh * lh + l as f64 * h2 + h2 / 4.0 - (lh + c.hbar() / 2.0).powi(2)).abs());
        table.push_numbers(&[
            l as f64,
            r.dispersions.x,
            r.dispersions.y,
            r.dispersions.z,
            r.lz_mean,
            r.l2_total,
            r.claims.dispersions.z,
            r.claims.l2_total,
            r.l2_gap,
        ]);
    }
    report.result("l2_gaps", &gaps);
    report.gate_below("top_state_transverse_dispersion_error", top_error, 1e-12);
    report.gate_below("completed_square_identity_error", identity_error, 1e-12);
    report.gate_below("l2_gap_minus_quarter_hbar2", gap_error, 1e-12);
    report.warn(format!(
        "oracle top states have <dLz^2> = 0 where the minimal-dispersion ansatz takes hbar^2/4; <L^2> = hbar^2 l(l+1) sits hbar^2/4 = {} below (l hbar + hbar/2)^2",
        h2 / 4.0
    ));

    let mut w2_margin = f64::INFINITY;
    for l in 0..=W2_L_MAX {
        for m in -(l as i32)..=l as i32 {
            w2_margin = w2_margin.min(angular_momentum_oracle(l, m, &c)?.w2_margin);
        }
    }
    report.gate_at_least("w2_inequality_worst_margin", w2_margin, -1e-12);

    let minimal: Vec<_> = (0..=l_max)
        .map(|l| minimal_dispersion_solver(l as f64 * c.hbar(), Symmetry::Cylindrical, &c))
        .collect::<furthlab_core::Result<_>>()?;
    report.result("minimal_cylindrical", &minimal);
    report.result("minimal_spherical", minimal_dispersion_solver(0.0, Symmetry::Spherical, &c)?);

    let hydrogen = RadialProblem::new(Geometry::Spherical, 0, PotentialSpec::Coulomb { charge: 1.0 });
    let s = numerov_eigensolve(&hydrogen, 0, &c)?;
    let moments = radial_moments(&s, &hydrogen, &c);
    let floor = radial_momentum_floor(moments.delta_r_sq, &c)?;
    report.result(
        "radial_momentum_floor",
        serde_json::json!({ "delta_r_sq": moments.delta_r_sq, "radial_momentum_sq": moments.radial_momentum_sq, "floor": floor }),
    );
    report.gate_holds("radial_momentum_above_floor", moments.radial_momentum_sq > floor.bound);
    Ok(Outcome { report, tables: vec![table] })
}
