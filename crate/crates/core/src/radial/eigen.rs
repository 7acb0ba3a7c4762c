use serde::{Deserialize, Serialize};

use super::numerov::{count_sign_changes, numerov_residual, solve_bound_state, LeftStart};
use crate::error::{domain, Result};
use crate::potential::PotentialSpec;
use crate::PhysicsConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Spherical,
    Cylindrical,
}

/// Which index enters the cylindrical centrifugal term ν²/ρ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CylindricalIndex {
    /// ν = l + ½
    #[default]
    HalfInteger,
    /// ν = l, the planar-rotor convention
    Integer,
}

/// A radial problem solved on the logarithmic grid x = ln r, where
/// y = √r·R (spherical) or y = Φ (cylindrical) obeys
/// y'' = [ν² + (2m/ħ²) r² (U − E)] y.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProblem {
    pub geometry: Geometry,
    pub l: u32,
    pub potential: PotentialSpec,
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub cylindrical_index: CylindricalIndex,
}

impl RadialProblem {
    /// Grid defaults: log step 0.005 from 1e−7 (Coulomb) or 1e−5, out to
    /// r_max = 60 (Coulomb) or 10.
    pub fn new(geometry: Geometry, l: u32, potential: PotentialSpec) -> Self {
        let (r_min, r_max): (f64, f64) = match potential {
            PotentialSpec::Coulomb { .. } | PotentialSpec::CoulombRegularized { .. } => (1e-7, 60.0),
            _ => (1e-5, 10.0),
        };
        let n_points = ((r_max / r_min).ln() / 0.005).round() as usize + 1;
        Self { geometry, l, potential, r_min, r_max, n_points, cylindrical_index: CylindricalIndex::default() }
    }

    pub fn with_range(mut self, r_min: f64, r_max: f64, n_points: usize) -> Self {
        self.r_min = r_min;
        self.r_max = r_max;
        self.n_points = n_points;
        self
    }

    pub fn with_cylindrical_index(mut self, index: CylindricalIndex) -> Self {
        self.cylindrical_index = index;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return domain(format!("radial range ({}, {}) is invalid", self.r_min, self.r_max));
        }
        if self.n_points < 16 {
            return domain("radial grid needs at least 16 points");
        }
        Ok(())
    }

    /// ν in the log-grid equation.
    pub fn nu(&self) -> f64 {
        match (self.geometry, self.cylindrical_index) {
            (Geometry::Cylindrical, CylindricalIndex::Integer) => self.l as f64,
            _ => self.l as f64 + 0.5,
        }
    }

    /// l(l+1) for spherical, ν² for cylindrical.
    pub fn centrifugal_coefficient(&self) -> f64 {
        let l = self.l as f64;
        match self.geometry {
            Geometry::Spherical => l * (l + 1.0),
            Geometry::Cylindrical => self.nu().powi(2),
        }
    }

    pub fn log_step(&self) -> f64 {
        (self.r_max / self.r_min).ln() / (self.n_points - 1) as f64
    }

    pub fn radii(&self) -> Vec<f64> {
        let (x0, h) = (self.r_min.ln(), self.log_step());
        (0..self.n_points).map(|i| (x0 + i as f64 * h).exp()).collect()
    }

    /// g(x; E) of the log-grid equation at every node.
    pub fn g(&self, energy: f64, constants: &PhysicsConstants) -> Vec<f64> {
        log_grid_g(&self.radii(), self.nu(), &self.potential, energy, constants)
    }

    /// Energy window for bisection, raised where needed to the lowest energy
    /// at which the Numerov recurrence stays stable on this grid (h²g/12 ≤ ½).
    fn window(&self, constants: &PhysicsConstants) -> (f64, f64) {
        let radii = self.radii();
        let u = self.potential.sample(&radii);
        let u_min = u.iter().copied().fold(f64::INFINITY, f64::min);
        let (lo, hi) = if self.potential.is_confining() { (u_min, u_min + 50.0) } else { (1.0001 * u_min, -1e-300) };
        let scale = 2.0 * constants.mass() / constants.hbar().powi(2);
        let slack = 6.0 / self.log_step().powi(2) - self.nu().powi(2);
        let floor = radii.iter().zip(&u).map(|(r, u)| u - slack / (scale * r * r)).fold(f64::NEG_INFINITY, f64::max);
        (lo.max(floor), hi)
    }
}

pub(crate) fn log_grid_g(radii: &[f64], nu: f64, potential: &PotentialSpec, energy: f64, c: &PhysicsConstants) -> Vec<f64> {
    let scale = 2.0 * c.mass() / c.hbar().powi(2);
    radii.iter().map(|&r| nu * nu + scale * r * r * (potential.eval(r) - energy)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub energy: f64,
    pub radii: Vec<f64>,
    /// Log-grid unknown y, normalized so that ∫ r² y² dx = 1.
    pub y: Vec<f64>,
    /// R(r) for spherical, Φ(ρ) for cylindrical.
    pub radial_function: Vec<f64>,
    pub node_count: usize,
    /// Largest mismatch of the three-term relation, relative to max |y|.
    pub residual: f64,
    pub log_step: f64,
}

impl EigenSolution {
    /// |radial function| at the last interior node.
    pub fn boundary_value(&self) -> f64 {
        self.radial_function[self.radial_function.len() - 2].abs()
    }
}

pub fn numerov_eigensolve(problem: &RadialProblem, n_radial: usize, constants: &PhysicsConstants) -> Result<EigenSolution> {
    problem.validate()?;
    let radii = problem.radii();
    let h = problem.log_step();
    let nu = problem.nu();
    let x0 = problem.r_min.ln();
    // regular solution y ~ r^ν near the origin
    let start = LeftStart::Values((nu * x0).exp(), (nu * (x0 + h)).exp());
    let bs = solve_bound_state(|e| problem.g(e, constants), h, start, n_radial, problem.window(constants))?;

    let norm: f64 = trapezoid(&radii.iter().zip(&bs.y).map(|(r, y)| (r * y).powi(2)).collect::<Vec<_>>(), h).sqrt();
    let mut y: Vec<f64> = bs.y.iter().map(|v| v / norm).collect();
    if y.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0) {
        y.iter_mut().for_each(|v| *v = -*v);
    }
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = numerov_residual(&y, &bs.g, h).iter().fold(0.0f64, |m, r| m.max(r.abs())) * h * h / peak;
    let radial_function = match problem.geometry {
        Geometry::Spherical => y.iter().zip(&radii).map(|(v, r)| v / r.sqrt()).collect(),
        Geometry::Cylindrical => y.clone(),
    };
    Ok(EigenSolution {
        energy: bs.energy,
        node_count: count_sign_changes(&y[1..y.len() - 1]),
        radii,
        y,
        radial_function,
        residual,
        log_step: h,
    })
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// dy/dx by fourth-order central differences, second order at the ends.
pub(crate) fn log_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| match i {
            0 => (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h),
            _ if i == n - 1 => (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h),
            1 => (y[2] - y[0]) / (2.0 * h),
            _ if i == n - 2 => (y[n - 1] - y[n - 3]) / (2.0 * h),
            _ => (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h),
        })
        .collect()
}

/// Expectation values of a radial eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialMoments {
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub r_mean: f64,
    pub r2_mean: f64,
    pub delta_r_sq: f64,
    /// ⟨P_r²⟩ with P_r the Hermitian radial momentum (spherical only, else NaN).
    pub radial_momentum_sq: f64,
    /// E − ⟨T⟩ − ⟨U⟩
    pub residual: f64,
}

pub fn radial_moments(solution: &EigenSolution, problem: &RadialProblem, constants: &PhysicsConstants) -> RadialMoments {
    let h = solution.log_step;
    let (r, y) = (&solution.radii, &solution.y);
    let dy = log_derivative(y, h);
    let nu2 = problem.nu().powi(2);
    let weighted = |f: &dyn Fn(usize) -> f64| trapezoid(&(0..r.len()).map(f).collect::<Vec<_>>(), h);
    let t_scale = constants.hbar().powi(2) / (2.0 * constants.mass());
    let kinetic = t_scale * weighted(&|i| dy[i] * dy[i] + nu2 * y[i] * y[i]);
    let potential = weighted(&|i| (r[i] * y[i]).powi(2) * problem.potential.eval(r[i]));
    let r_mean = weighted(&|i| r[i] * (r[i] * y[i]).powi(2));
    let r2_mean = weighted(&|i| (r[i] * r[i] * y[i]).powi(2));
    let radial_momentum_sq = match problem.geometry {
        Geometry::Spherical => constants.hbar().powi(2) * weighted(&|i| (dy[i] + 0.5 * y[i]).powi(2)),
        Geometry::Cylindrical => f64::NAN,
    };
    RadialMoments {
        energy: solution.energy,
        kinetic,
        potential,
        r_mean,
        r2_mean,
        delta_r_sq: r2_mean - r_mean * r_mean,
        radial_momentum_sq,
        residual: solution.energy - kinetic - potential,
    }
}

/// Lower bound on ⟨ΔP_r²⟩ from ⟨Δr²⟩, plus the as-printed product form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumFloor {
    pub bound: f64,
    pub printed_product_form: f64,
}

pub fn radial_momentum_floor(delta_r_sq: f64, constants: &PhysicsConstants) -> Result<MomentumFloor> {
    if !(delta_r_sq > 0.0) || !delta_r_sq.is_finite() {
        return domain(format!("⟨Δr²⟩ must be positive, got {delta_r_sq}"));
    }
    let h2 = constants.hbar().powi(2);
    Ok(MomentumFloor { bound: h2 / (4.0 * delta_r_sq), printed_product_form: h2 * delta_r_sq / 4.0 })
}
