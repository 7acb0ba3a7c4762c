use furthlab_core::radial::*;
use furthlab_core::{PhysicsConstants, PotentialSpec};

use super::{base_report, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::CsvTable;

pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("potential", "coulomb", "coulomb"),
    ("geometry", "spherical", "spherical"),
    ("l", "0", "0"),
    ("n_radial", "0", "0"),
    ("index", "half_integer", "half_integer"),
    ("k_z", "0", "0"),
];

const SPECTRUM_LEVELS: usize = 4;

/// Closed-form levels for unit charge and unit spring constant.
fn closed_form(problem: &RadialProblem, n_radial: usize, c: &PhysicsConstants) -> f64 {
    let (h, m) = (c.hbar(), c.mass());
    let n = n_radial as f64;
    match (problem.potential, problem.geometry) {
        (PotentialSpec::Coulomb { charge }, Geometry::Spherical) => {
            -m * charge * charge / (2.0 * h * h * (n + problem.l as f64 + 1.0).powi(2))
        }
        (PotentialSpec::Harmonic { k }, _) => h * (k / m).sqrt() * (2.0 * n + problem.nu() + 1.0),
        _ => f64::NAN,
    }
}

/// Widens the default radial range so the highest level needed still decays
/// well inside it.
fn sized(problem: RadialProblem, max_n_radial: usize, c: &PhysicsConstants) -> RadialProblem {
    let top = max_n_radial as f64 + problem.l as f64 + 1.0;
    let needed = match problem.potential {
        PotentialSpec::Coulomb { charge } => c.hbar().powi(2) / (c.mass() * charge) * (4.0 * top * top + 30.0),
        PotentialSpec::Harmonic { k } => {
            let length = (c.hbar() / (c.mass() * k).sqrt()).sqrt();
            length * ((4.0 * top + 2.0).sqrt() + 6.0)
        }
        _ => problem.r_max,
    };
    if needed <= problem.r_max {
        return problem;
    }
    let n_points = ((needed / problem.r_min).ln() / problem.log_step()).round() as usize + 1;
    let r_min = problem.r_min;
    problem.with_range(r_min, needed, n_points)
}

fn solve_and_gate(
    report: &mut furthlab_core::ExperimentReport,
    name: &str,
    problem: &RadialProblem,
    n_radial: usize,
    c: &PhysicsConstants,
) -> CliResult<EigenSolution> {
    let s = numerov_eigensolve(problem, n_radial, c)?;
    let exact = closed_form(problem, n_radial, c);
    report.result(name, serde_json::json!({ "energy": s.energy, "exact": exact, "nodes": s.node_count, "residual": s.residual }));
    report.gate_below(&format!("{name}_energy_error"), (s.energy - exact).abs(), 1e-8);
    Ok(s)
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let (mut report, c) = base_report(cfg)?;
    let potential = match cfg.raw("potential")? {
        "coulomb" => PotentialSpec::Coulomb { charge: 1.0 },
        "harmonic" => PotentialSpec::Harmonic { k: 1.0 },
        other => return Err(CliError::Config(format!("unknown radial potential {other:?}"))),
    };
    let geometry = match cfg.raw("geometry")? {
        "spherical" => Geometry::Spherical,
        "cylindrical" => Geometry::Cylindrical,
        other => return Err(CliError::Config(format!("unknown geometry {other:?}"))),
    };
    let index = match cfg.raw("index")? {
        "half_integer" => CylindricalIndex::HalfInteger,
        "integer" => CylindricalIndex::Integer,
        other => return Err(CliError::Config(format!("unknown index {other:?}"))),
    };
    let l: u32 = cfg.get("l")?;
    let n_radial: usize = cfg.get("n_radial")?;
    let k_z: f64 = cfg.get("k_z")?;

    let problem = sized(RadialProblem::new(geometry, l, potential).with_cylindrical_index(index), n_radial.max(SPECTRUM_LEVELS - 1), &c);
    let requested = numerov_eigensolve(&problem, n_radial, &c)?;
    let exact = closed_form(&problem, n_radial, &c);
    report.result("energy", requested.energy);
    report.result("node_count", requested.node_count);
    report.result("boundary_value", requested.boundary_value());
    report.result("residual", requested.residual);
    report.result("centrifugal_coefficient", problem.centrifugal_coefficient());
    if exact.is_finite() {
        report.result("exact_energy", exact);
        report.gate_below("requested_energy_error", (requested.energy - exact).abs(), 1e-8);
    }
    report.result("moments", radial_moments(&requested, &problem, &c));

    let mut spectrum = CsvTable::new("spectrum.csv", &["n_radial", "energy", "exact"]);
    let mut increasing = true;
    let mut previous = f64::NEG_INFINITY;
    for n in 0..SPECTRUM_LEVELS {
        let s = numerov_eigensolve(&problem, n, &c)?;
        increasing &= s.energy > previous;
        previous = s.energy;
        spectrum.push_numbers(&[n as f64, s.energy, closed_form(&problem, n, &c)]);
    }
    report.gate_holds("energies_increase_with_nodes", increasing);

    let hydrogen = RadialProblem::new(Geometry::Spherical, 0, PotentialSpec::Coulomb { charge: 1.0 });
    let h1s = solve_and_gate(&mut report, "hydrogen_1s", &hydrogen, 0, &c)?;
    solve_and_gate(&mut report, "hydrogen_2s", &hydrogen, 1, &c)?;
    let osc3 = RadialProblem::new(Geometry::Spherical, 0, PotentialSpec::Harmonic { k: 1.0 });
    solve_and_gate(&mut report, "harmonic_3d", &osc3, 0, &c)?;
    let osc2 = RadialProblem::new(Geometry::Cylindrical, 0, PotentialSpec::Harmonic { k: 1.0 })
        .with_cylindrical_index(CylindricalIndex::Integer);
    solve_and_gate(&mut report, "harmonic_2d", &osc2, 0, &c)?;
    let osc2_half = RadialProblem::new(Geometry::Cylindrical, 0, PotentialSpec::Harmonic { k: 1.0 });
    report.result("harmonic_2d_half_integer_energy", numerov_eigensolve(&osc2_half, 0, &c)?.energy);

    let mapped = spherical_to_cylindrical_map(&h1s, &hydrogen, &c)?;
    report.gate_below("substitution_residual", mapped.residual, 1e-6);
    report.gate_below("substitution_round_trip", mapped.round_trip_error, 1e-12);

    let cyl = RadialProblem::new(Geometry::Cylindrical, l, PotentialSpec::Harmonic { k: 1.0 });
    let phi = numerov_eigensolve(&cyl, 0, &c)?;
    let half = separation_check(&phi, &cyl, l as f64 + 0.5, k_z, &c)?;
    let integer = separation_check(&phi, &cyl, l as f64, k_z, &c)?;
    report.result("separation", serde_json::json!({ "half_integer": half, "integer": integer }));
    report.gate_below("separation_residual_half_integer", half.residual, 1e-6);
    report.gate_holds("separation_integer_strictly_worse", integer.residual > half.residual);

    let mut eig = CsvTable::new("eigenfunctions.csv", &["r", "value"]);
    for (r, v) in requested.radii.iter().zip(&requested.radial_function) {
        eig.push_numbers(&[*r, *v]);
    }
    Ok(Outcome { report, tables: vec![eig, spectrum] })
}
