//! Short-time-slice evolution of a wavefunction: each step integrates the
//! free kernel over the displacement η with the potential factor evaluated
//! at the midpoint x + η/2.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicsConstants;
use crate::error::{domain, Error, Result};
use crate::grid::{Grid1D, WaveFunction};
use crate::kernels::free_step_weights;
use crate::potential::PotentialSpec;
use crate::spectral;

/// Largest ε·max|U|/ħ accepted in expanded mode.
pub const EXPANSION_LIMIT: f64 = 0.1;

/// Cumulative |‖ψ‖² − ‖ψ₀‖²| that aborts an evolution.
pub const NORM_DRIFT_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    /// 1 − iεU/ħ
    ExpandedFirstOrder,
    /// exp(−iεU/ħ)
    #[default]
    FullExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub epsilon: f64,
    pub n_steps: usize,
    pub mode: PotentialMode,
    /// Multiplies the step weights by exp(−δη²).
    pub damping: f64,
    pub renormalize: bool,
}

impl EvolutionConfig {
    pub fn new(epsilon: f64, n_steps: usize, mode: PotentialMode) -> Result<Self> {
        if !(epsilon > 0.0) {
            return domain("time step must be > 0");
        }
        Ok(Self { epsilon, n_steps, mode, damping: 0.0, renormalize: false })
    }

    pub fn total_time(&self) -> f64 {
        self.epsilon * self.n_steps as f64
    }

    /// A = √(2πiħε/m) on the same branch as the quantum kernel (conjugated
    /// for the minus convention).
    pub fn normalization(&self, constants: &PhysicsConstants) -> Complex64 {
        let modulus = (2.0 * std::f64::consts::PI * constants.hbar() * self.epsilon / constants.mass()).sqrt();
        Complex64::from_polar(modulus, constants.phase().sign() * std::f64::consts::FRAC_PI_4)
    }
}

/// Precomputed step operator for one grid, config and potential.
pub struct TimeSliceStepper {
    weights: Vec<Complex64>,
    factors: Vec<Complex64>,
    grid: Grid1D,
}

impl TimeSliceStepper {
    pub fn new(
        grid: &Grid1D,
        config: &EvolutionConfig,
        potential: &PotentialSpec,
        constants: &PhysicsConstants,
    ) -> Result<Self> {
        potential.validate()?;
        if config.damping < 0.0 {
            return domain("damping must be >= 0");
        }
        let n = grid.len();
        let half = 0.5 * grid.dx();
        let midpoint_u: Vec<f64> =
            (0..2 * n - 1).map(|s| potential.cell_value(grid.x_min() + s as f64 * half, half)).collect();
        let theta = config.epsilon / constants.hbar();
        if config.mode == PotentialMode::ExpandedFirstOrder {
            let u_max = midpoint_u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
            let ratio = u_max * theta;
            if ratio >= EXPANSION_LIMIT {
                return Err(Error::ExpansionInvalid {
                    ratio,
                    suggested_eps: 0.5 * EXPANSION_LIMIT * constants.hbar() / u_max,
                });
            }
        }
        let sign = constants.phase().sign();
        let factors = midpoint_u
            .iter()
            .map(|u| match config.mode {
                PotentialMode::FullExponential => Complex64::from_polar(1.0, -sign * theta * u),
                PotentialMode::ExpandedFirstOrder => Complex64::new(1.0, -sign * theta * u),
            })
            .collect();
        let weights = free_step_weights(grid.dx(), n, config.epsilon, config.damping, constants)?;
        Ok(Self { weights, factors, grid: *grid })
    }

    /// ψ'(x_i) = Σ_j W_{|i−j|} F((x_i + x_j)/2) ψ(x_j)
    pub fn step(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.grid.check_same(psi.grid())?;
        let v = psi.values();
        let n = v.len();
        let out = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.weights[i.abs_diff(j)] * self.factors[i + j] * v[j]).sum())
            .collect();
        WaveFunction::new(self.grid, out)
    }
}

pub fn short_time_step(
    psi: &WaveFunction,
    config: &EvolutionConfig,
    potential: &PotentialSpec,
    constants: &PhysicsConstants,
) -> Result<WaveFunction> {
    TimeSliceStepper::new(psi.grid(), config, potential, constants)?.step(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub snapshots: Vec<WaveFunction>,
    /// ‖ψ_k‖² − ‖ψ_{k−1}‖² for every step k (before any renormalization).
    pub norm_drift: Vec<f64>,
}

impl Evolution {
    pub fn last(&self) -> &WaveFunction {
        self.snapshots.last().expect("evolution always holds the initial state")
    }

    pub fn cumulative_drift(&self) -> f64 {
        self.norm_drift.iter().sum()
    }
}

/// Repeated short-time steps. Snapshots are kept every `snapshot_every`
/// steps and always at the end.
pub fn evolve(
    psi0: &WaveFunction,
    config: &EvolutionConfig,
    potential: &PotentialSpec,
    constants: &PhysicsConstants,
    snapshot_every: usize,
) -> Result<Evolution> {
    let mut evo = Evolution { times: vec![0.0], snapshots: vec![psi0.clone()], norm_drift: Vec::new() };
    if config.n_steps == 0 {
        return Ok(evo);
    }
    let stepper = TimeSliceStepper::new(psi0.grid(), config, potential, constants)?;
    let every = snapshot_every.max(1);
    let norm0 = psi0.norm_sqr();
    let mut psi = psi0.clone();
    let mut prev = norm0;
    for step in 1..=config.n_steps {
        psi = stepper.step(&psi)?;
        let norm = psi.norm_sqr();
        evo.norm_drift.push(norm - prev);
        if (norm - norm0).abs() > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { step, drift: norm - norm0, limit: NORM_DRIFT_LIMIT });
        }
        if config.renormalize {
            psi.normalize()?;
        }
        prev = psi.norm_sqr();
        if step % every == 0 || step == config.n_steps {
            evo.times.push(step as f64 * config.epsilon);
            evo.snapshots.push(psi.clone());
        }
    }
    Ok(evo)
}

/// max over interior points and times of
/// |iħ ∂ψ/∂t + (ħ²/2m) Δψ − Uψ| with central differences, for snapshots
/// spaced `dt` apart. The time derivative carries the phase-convention sign.
pub fn schrodinger_residual(
    snapshots: &[WaveFunction],
    dt: f64,
    potential: &PotentialSpec,
    constants: &PhysicsConstants,
) -> Result<f64> {
    if snapshots.len() < 3 {
        return domain("residual needs at least 3 snapshots");
    }
    let grid = *snapshots[0].grid();
    for s in snapshots {
        grid.check_same(s.grid())?;
    }
    let (h, m) = (constants.hbar(), constants.mass());
    let i_hbar = Complex64::new(0.0, constants.phase().sign() * h);
    let dx2 = grid.dx() * grid.dx();
    let u = potential.sample(&grid.points());
    let residual = snapshots
        .windows(3)
        .map(|w| {
            let (a, c, b) = (w[0].values(), w[1].values(), w[2].values());
            (1..c.len() - 1)
                .map(|i| {
                    let dt_psi = (b[i] - a[i]) / (2.0 * dt);
                    let lap = (c[i + 1] - 2.0 * c[i] + c[i - 1]) / dx2;
                    (i_hbar * dt_psi + h * h / (2.0 * m) * lap - u[i] * c[i]).norm()
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    Ok(residual)
}

/// Strang split-operator evolution on the grid treated as periodic.
/// Only meant as an independent reference.
pub fn spectral_reference_evolve(
    psi0: &WaveFunction,
    config: &EvolutionConfig,
    potential: &PotentialSpec,
    constants: &PhysicsConstants,
) -> Result<WaveFunction> {
    potential.validate()?;
    let grid = *psi0.grid();
    let (h, m) = (constants.hbar(), constants.mass());
    let sign = constants.phase().sign();
    let eps = config.epsilon;
    let dx = grid.dx();
    let half_potential: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|x| Complex64::from_polar(1.0, -sign * 0.5 * eps * potential.cell_value(*x, dx) / h))
        .collect();
    let kinetic: Vec<Complex64> = spectral::wavenumbers(grid.len(), grid.dx())
        .iter()
        .map(|k| Complex64::from_polar(1.0, -sign * h * k * k * eps / (2.0 * m)))
        .collect();
    let mut v = psi0.values().to_vec();
    for _ in 0..config.n_steps {
        v.iter_mut().zip(&half_potential).for_each(|(z, p)| *z *= p);
        spectral::forward(&mut v);
        v.iter_mut().zip(&kinetic).for_each(|(z, k)| *z *= k);
        spectral::inverse(&mut v);
        v.iter_mut().zip(&half_potential).for_each(|(z, p)| *z *= p);
    }
    WaveFunction::new(grid, v)
}

/// ∫_{x > x0} |ψ|² dx (trapezoid weights).
pub fn probability_beyond(psi: &WaveFunction, x0: f64) -> f64 {
    let grid = psi.grid();
    psi.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.x(*i) > x0)
        .map(|(i, z)| grid.weight(i) * z.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhaseConvention;
    use crate::kernels::propagate_wavefunction;
    use crate::stats::log_log_fit;

    fn natural() -> PhysicsConstants {
        PhysicsConstants::natural()
    }

    fn ground_state(grid: Grid1D) -> WaveFunction {
        let v: Vec<f64> = grid
            .points()
            .iter()
            .map(|x| (-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25))
            .collect();
        WaveFunction::from_real(grid, &v).unwrap()
    }

    #[test]
    fn normalization_constant() {
        let cfg = EvolutionConfig::new(0.5, 1, PotentialMode::FullExponential).unwrap();
        let a = cfg.normalization(&natural());
        let expect = Complex64::new(0.0, std::f64::consts::PI).sqrt();
        assert!((a - expect).norm() < 1e-14);
        assert_eq!(cfg.normalization(&natural().with_phase(PhaseConvention::Minus)), a.conj());
    }

    #[test]
    fn free_step_is_kernel_propagation() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 1.0).unwrap();
        let cfg = EvolutionConfig::new(0.05, 1, PotentialMode::FullExponential).unwrap();
        let a = short_time_step(&psi, &cfg, &PotentialSpec::Free, &natural()).unwrap();
        let b = propagate_wavefunction(&psi, 0.05, &natural(), 0.0).unwrap().field;
        assert!(a.max_abs_diff(&b).unwrap() < 1e-6);
    }

    #[test]
    fn zero_steps_is_identity() {
        let grid = Grid1D::symmetric(5.0, 0.1).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0).unwrap();
        let cfg = EvolutionConfig::new(0.01, 0, PotentialMode::FullExponential).unwrap();
        let evo = evolve(&psi, &cfg, &PotentialSpec::Harmonic { k: 1.0 }, &natural(), 1).unwrap();
        assert_eq!(evo.last(), &psi);
        let spec = spectral_reference_evolve(&psi, &cfg, &PotentialSpec::Harmonic { k: 1.0 }, &natural()).unwrap();
        assert_eq!(spec, psi);
    }

    #[test]
    fn expansion_precondition() {
        let grid = Grid1D::symmetric(20.0, 0.1).unwrap();
        let cfg = EvolutionConfig::new(0.01, 1, PotentialMode::ExpandedFirstOrder).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0).unwrap();
        match short_time_step(&psi, &cfg, &PotentialSpec::Harmonic { k: 1.0 }, &natural()) {
            Err(Error::ExpansionInvalid { suggested_eps, .. }) => assert!(suggested_eps * 200.0 < 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_packet_spreads() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0).unwrap();
        let cfg = EvolutionConfig::new(0.01, 100, PotentialMode::FullExponential).unwrap();
        let evo = evolve(&psi, &cfg, &PotentialSpec::Free, &natural(), 100).unwrap();
        let s2 = evo.last().position_variance();
        assert!((s2 - 1.25).abs() / 1.25 < 1e-3, "{s2}");
        assert!(evo.norm_drift.iter().all(|d| d.abs() < 1e-6));
    }

    #[test]
    fn spectral_free_packet() {
        let grid = Grid1D::symmetric(20.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0).unwrap();
        let cfg = EvolutionConfig::new(0.1, 10, PotentialMode::FullExponential).unwrap();
        let out = spectral_reference_evolve(&psi, &cfg, &PotentialSpec::Free, &natural()).unwrap();
        assert!((out.position_variance() - 1.25).abs() < 1e-6);
    }

    #[test]
    fn free_residual_small() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0).unwrap();
        let cfg = EvolutionConfig::new(0.01, 10, PotentialMode::FullExponential).unwrap();
        let evo = evolve(&psi, &cfg, &PotentialSpec::Free, &natural(), 1).unwrap();
        let r = schrodinger_residual(&evo.snapshots, 0.01, &PotentialSpec::Free, &natural()).unwrap();
        assert!(r < 1e-3, "{r}");
        let mut bad = evo.snapshots.clone();
        let mid = grid.len() / 2;
        bad[5].values_mut()[mid] *= 1.1;
        let rb = schrodinger_residual(&bad, 0.01, &PotentialSpec::Free, &natural()).unwrap();
        assert!(rb > 10.0 * r);
    }

    #[test]
    fn stationary_state_residual_is_second_order() {
        let pot = PotentialSpec::Harmonic { k: 1.0 };
        let dt = 1e-3;
        let dxs = [0.2, 0.1, 0.05];
        let res: Vec<f64> = dxs
            .iter()
            .map(|&dx| {
                let grid = Grid1D::symmetric(8.0, dx).unwrap();
                let g = ground_state(grid);
                let snaps: Vec<WaveFunction> = (0..3)
                    .map(|k| {
                        let phase = Complex64::from_polar(1.0, -0.5 * k as f64 * dt);
                        WaveFunction::new(grid, g.values().iter().map(|z| z * phase).collect()).unwrap()
                    })
                    .collect();
                schrodinger_residual(&snaps, dt, &pot, &natural()).unwrap()
            })
            .collect();
        let fit = log_log_fit(&dxs, &res).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.1, "{res:?} {fit:?}");
    }

    #[test]
    fn modes_differ_at_second_order() {
        let grid = Grid1D::symmetric(10.0, 0.05).unwrap();
        let pot = PotentialSpec::Barrier { height: 4.0, width: 0.525 };
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 2.0).unwrap();
        let eps = [0.02, 0.01, 0.005, 0.0025];
        let diffs: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let full = EvolutionConfig::new(e, 1, PotentialMode::FullExponential).unwrap();
                let exp = EvolutionConfig::new(e, 1, PotentialMode::ExpandedFirstOrder).unwrap();
                let a = short_time_step(&psi, &full, &pot, &natural()).unwrap();
                let b = short_time_step(&psi, &exp, &pot, &natural()).unwrap();
                let diff: Vec<Complex64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
                let l2 = WaveFunction::new(grid, diff).unwrap().norm();
                // the free part is a contraction in L², so the factor bound carries over
                let bound = (e * 4.0).powi(2) / 2.0 * psi.norm();
                assert!(l2 <= bound, "{l2} > {bound}");
                a.max_abs_diff(&b).unwrap()
            })
            .collect();
        assert!(log_log_fit(&eps, &diffs).unwrap().slope >= 1.9);
    }

    #[test]
    fn norm_drift_aborts() {
        let grid = Grid1D::symmetric(3.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 4.0).unwrap();
        let cfg = EvolutionConfig::new(0.05, 50, PotentialMode::FullExponential).unwrap();
        assert!(matches!(
            evolve(&psi, &cfg, &PotentialSpec::Free, &natural(), 1),
            Err(Error::NormDrift { .. })
        ));
    }

    #[test]
    fn beyond_counts_right_side() {
        let grid = Grid1D::symmetric(10.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0).unwrap();
        assert!((probability_beyond(&psi, 0.0) - 0.5).abs() < 0.02);
    }
}
