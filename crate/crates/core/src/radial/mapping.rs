use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{log_grid_g, EigenSolution, Geometry, RadialProblem};
use crate::error::{domain, Result};
use crate::PhysicsConstants;

/// Five-point second derivative in x = ln ρ at interior nodes 2..n−2.
fn second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    (2..f.len() - 2)
        .map(|i| (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / (12.0 * h * h))
        .collect()
}

/// Residual of the cylindrical equation in log form, Φ_xx − g·Φ, relative
/// to max |Φ_xx|.
fn cylindrical_residual(rho: &[f64], phi: &[f64], h: f64, nu: f64, problem: &RadialProblem, energy: f64, c: &PhysicsConstants) -> f64 {
    let d2 = second_derivative(phi, h);
    let scale = d2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let g = log_grid_g(rho, nu, &problem.potential, energy, c);
    d2.iter().enumerate().map(|(k, v)| (v - g[k + 2] * phi[k + 2]).abs()).fold(0.0, f64::max) / scale
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappedField {
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
    /// Cylindrical-equation residual of Φ = √ρ·R with coefficient (l+½)².
    pub residual: f64,
    /// max |Φ/√ρ − R| relative to max |R|.
    pub round_trip_error: f64,
}

pub fn spherical_to_cylindrical_map(solution: &EigenSolution, problem: &RadialProblem, constants: &PhysicsConstants) -> Result<MappedField> {
    if problem.geometry != Geometry::Spherical {
        return domain("the map starts from a spherical solution");
    }
    let rho = solution.radii.clone();
    let phi: Vec<f64> = rho.iter().zip(&solution.radial_function).map(|(r, v)| r.sqrt() * v).collect();
    let nu = problem.l as f64 + 0.5;
    let residual = cylindrical_residual(&rho, &phi, solution.log_step, nu, problem, solution.energy, constants);
    let r_peak = solution.radial_function.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let back = rho.iter().zip(&phi).zip(&solution.radial_function).map(|((r, p), v)| (p / r.sqrt() - v).abs()).fold(0.0, f64::max);
    Ok(MappedField { rho, phi, residual, round_trip_error: if r_peak > 0.0 { back / r_peak } else { back } })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationReport {
    pub lambda: f64,
    pub k_z: f64,
    pub required_energy: f64,
    pub residual: f64,
}

const ANGLES: [f64; 2] = [0.3, 1.7];
const HEIGHTS: [f64; 2] = [0.0, 0.9];
const STENCIL: f64 = 1e-2;

/// Residual of the full cylindrical equation for Ψ = Φ(ρ)·e^{iλφ}·e^{ik_z z}
/// at the given total energy. All derivatives are taken by finite differences
/// (five-point in ln ρ, φ and z), multiplied through by 2mρ²/ħ² and scaled
/// by max |Φ_xx|.
pub fn separation_residual_at(
    phi: &EigenSolution,
    problem: &RadialProblem,
    lambda: f64,
    k_z: f64,
    total_energy: f64,
    constants: &PhysicsConstants,
) -> Result<f64> {
    if problem.geometry != Geometry::Cylindrical {
        return domain("separation check needs a cylindrical solution");
    }
    let h = phi.log_step;
    let f = &phi.radial_function;
    let d2 = second_derivative(f, h);
    let scale = d2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let factor = |a: f64, z: f64| Complex64::from_polar(1.0, lambda * a + k_z * z);
    let five = |g: &dyn Fn(f64) -> Complex64, s: f64| {
        (-g(s + 2.0 * STENCIL) + 16.0 * g(s + STENCIL) - 30.0 * g(s) + 16.0 * g(s - STENCIL) - g(s - 2.0 * STENCIL))
            / (12.0 * STENCIL * STENCIL)
    };
    let two_m = 2.0 * constants.mass() / constants.hbar().powi(2);
    let mut worst = 0.0f64;
    for &a in &ANGLES {
        for &z in &HEIGHTS {
            let w = factor(a, z);
            let w_aa = five(&|s| factor(s, z), a);
            let w_zz = five(&|s| factor(a, s), z);
            for (k, &phi_xx) in d2.iter().enumerate() {
                let i = k + 2;
                let rho = phi.radii[i];
                let psi_xx = phi_xx * w;
                let r = psi_xx + f[i] * w_aa + rho * rho * f[i] * w_zz
                    - two_m * rho * rho * (problem.potential.eval(rho) - total_energy) * f[i] * w;
                worst = worst.max(r.norm());
            }
        }
    }
    Ok(worst / scale)
}

pub fn separation_check(phi: &EigenSolution, problem: &RadialProblem, lambda: f64, k_z: f64, constants: &PhysicsConstants) -> Result<SeparationReport> {
    let required_energy = phi.energy + constants.hbar().powi(2) * k_z * k_z / (2.0 * constants.mass());
    let residual = separation_residual_at(phi, problem, lambda, k_z, required_energy, constants)?;
    Ok(SeparationReport { lambda, k_z, required_energy, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::eigen::numerov_eigensolve;
    use crate::PotentialSpec;

    fn c() -> PhysicsConstants {
        PhysicsConstants::natural()
    }

    #[test]
    fn hydrogen_maps_to_cylindrical_form() {
        let p = RadialProblem::new(Geometry::Spherical, 0, PotentialSpec::Coulomb { charge: 1.0 });
        let s = numerov_eigensolve(&p, 0, &c()).unwrap();
        let m = spherical_to_cylindrical_map(&s, &p, &c()).unwrap();
        assert!(m.residual < 1e-6, "{}", m.residual);
        assert!(m.round_trip_error < 1e-12);
    }

    #[test]
    fn excited_and_harmonic_maps() {
        for (pot, l, n) in [
            (PotentialSpec::Coulomb { charge: 1.0 }, 1, 1),
            (PotentialSpec::Harmonic { k: 1.0 }, 2, 1),
        ] {
            let p = RadialProblem::new(Geometry::Spherical, l, pot);
            let s = numerov_eigensolve(&p, n, &c()).unwrap();
            assert!(spherical_to_cylindrical_map(&s, &p, &c()).unwrap().residual < 1e-6);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = RadialProblem::new(Geometry::Spherical, 0, PotentialSpec::Harmonic { k: 1.0 });
        let mut s = numerov_eigensolve(&p, 0, &c()).unwrap();
        s.radial_function.iter_mut().for_each(|v| *v = 0.0);
        let m = spherical_to_cylindrical_map(&s, &p, &c()).unwrap();
        assert!(m.phi.iter().all(|v| *v == 0.0));
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn map_rejects_cylindrical_input() {
        let p = RadialProblem::new(Geometry::Cylindrical, 0, PotentialSpec::Harmonic { k: 1.0 });
        let s = numerov_eigensolve(&p, 0, &c()).unwrap();
        assert!(spherical_to_cylindrical_map(&s, &p, &c()).is_err());
    }

    #[test]
    fn separation_with_half_integer_index() {
        let p = RadialProblem::new(Geometry::Cylindrical, 0, PotentialSpec::Harmonic { k: 1.0 });
        let s = numerov_eigensolve(&p, 0, &c()).unwrap();
        let good = separation_check(&s, &p, 0.5, 0.0, &c()).unwrap();
        assert!(good.residual < 1e-6, "{}", good.residual);
        let bad = separation_check(&s, &p, 0.0, 0.0, &c()).unwrap();
        assert!(bad.residual > 100.0 * good.residual);
    }

    #[test]
    fn free_z_motion_shifts_energy() {
        let p = RadialProblem::new(Geometry::Cylindrical, 1, PotentialSpec::Harmonic { k: 1.0 });
        let s = numerov_eigensolve(&p, 0, &c()).unwrap();
        let r = separation_check(&s, &p, 1.5, 1.0, &c()).unwrap();
        assert_eq!(r.required_energy - s.energy, 0.5);
        assert!(r.residual < 1e-6, "{}", r.residual);
        let unshifted = separation_residual_at(&s, &p, 1.5, 1.0, s.energy, &c()).unwrap();
        assert!(unshifted > 100.0 * r.residual);
    }
}
