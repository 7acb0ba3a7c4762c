//! Heat and free quantum propagator kernels, their composition, and
//! kernel-driven propagation of densities and wavefunctions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{PhaseConvention, PhysicsConstants};
use crate::error::{domain, Error, Result};
use crate::grid::{DensityField, Grid1D, WaveFunction};
use crate::quadrature;
use crate::spectral;

/// Mass (or norm²) lost through the grid edges above this is flagged.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// End points x₂ (with x₁ = 0) at which composition residuals are measured.
pub const TEST_DISPLACEMENTS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Damping values used for δ → 0 extrapolation of oscillatory integrals.
pub const DEFAULT_DAMPINGS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Heat,
    Quantum,
}

/// (4πDτ)^(−1/2) exp(−x²/4Dτ)
pub fn heat_kernel(displacement: f64, tau: f64, diffusivity: f64) -> Result<f64> {
    if !(tau > 0.0) || !(diffusivity > 0.0) {
        return domain(format!("heat kernel needs tau > 0 and D > 0, got tau={tau}, D={diffusivity}"));
    }
    let s = 4.0 * diffusivity * tau;
    Ok((PI * s).sqrt().recip() * (-displacement * displacement / s).exp())
}

/// √(m/2πiħt) exp(i m x²/2ħt), with √(1/i) = e^(−iπ/4). The `Minus`
/// convention returns the complex conjugate.
pub fn quantum_kernel(displacement: f64, t: f64, constants: &PhysicsConstants) -> Result<Complex64> {
    if !(t > 0.0) {
        return domain(format!("quantum kernel needs t > 0, got {t}"));
    }
    let a = constants.mass() / (2.0 * constants.hbar() * t);
    let modulus = (a / PI).sqrt();
    let k = Complex64::from_polar(modulus, a * displacement * displacement - PI / 4.0);
    Ok(match constants.phase() {
        PhaseConvention::Plus => k,
        PhaseConvention::Minus => k.conj(),
    })
}

fn kernel_value(kind: KernelKind, x: f64, t: f64, constants: &PhysicsConstants) -> Result<Complex64> {
    match kind {
        KernelKind::Heat => heat_kernel(x, t, constants.diffusivity()).map(|v| Complex64::new(v, 0.0)),
        KernelKind::Quantum => quantum_kernel(x, t, constants),
    }
}

/// Symmetric grid for trapezoid quadrature of exp((iA − δ)x²)-type integrands:
/// the damping envelope is below e^(−35) at the edges and the aliased
/// spectrum at 2π/dx is below e^(−35) as well.
pub fn damped_quadrature_grid(chirp: f64, damping: f64) -> Result<Grid1D> {
    if !(damping > 0.0) {
        return Err(Error::UndampedOscillatoryQuadrature);
    }
    let half_width = (35.0 / damping).sqrt();
    let dx = 2.0 * PI / (chirp.abs().max(f64::MIN_POSITIVE) * (140.0 / damping).sqrt());
    Grid1D::symmetric(half_width, dx.min(half_width / 4.0))
}

/// Grid for the composition integral of two quantum legs of duration t₁, t₂,
/// each damped by e^(−δη²).
pub fn composition_grid(t1: f64, t2: f64, damping: f64, constants: &PhysicsConstants) -> Result<Grid1D> {
    let chirp = constants.mass() / (2.0 * constants.hbar()) * (1.0 / t1 + 1.0 / t2);
    damped_quadrature_grid(chirp, 2.0 * damping)
}

/// Grid for `multi_slice_kernel` with n damped slices of τ/n.
pub fn multi_slice_grid(tau_total: f64, n_slices: usize, damping: f64, constants: &PhysicsConstants) -> Result<Grid1D> {
    let t = tau_total / n_slices.max(1) as f64;
    composition_grid(t, t, damping, constants)
}

fn composed_values(
    kind: KernelKind,
    tau_total: f64,
    split: f64,
    grid: &Grid1D,
    damping: f64,
    constants: &PhysicsConstants,
) -> Result<Vec<Complex64>> {
    if !(tau_total > 0.0) {
        return domain("composition needs tau_total > 0");
    }
    if !(split > 0.0 && split < 1.0) {
        return domain(format!("split must lie in (0, 1), got {split}"));
    }
    if damping < 0.0 {
        return domain("damping must be >= 0");
    }
    let t1 = split * tau_total;
    let t2 = (1.0 - split) * tau_total;
    match kind {
        KernelKind::Quantum if damping == 0.0 => return Err(Error::UndampedOscillatoryQuadrature),
        KernelKind::Heat => {
            let sigma = (2.0 * constants.diffusivity() * t1.max(t2)).sqrt();
            let reach = TEST_DISPLACEMENTS.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 6.5 * sigma;
            if grid.x_min() > -reach || grid.x_max() < reach {
                return domain(format!("grid must cover ±{reach:.3} so the kernel mass outside is < 1e-10"));
            }
        }
        KernelKind::Quantum => {}
    }
    let points = grid.points();
    let leg1: Vec<Complex64> = points
        .par_iter()
        .map(|x3| Ok(kernel_value(kind, *x3, t1, constants)? * (-damping * x3 * x3).exp()))
        .collect::<Result<_>>()?;
    TEST_DISPLACEMENTS
        .iter()
        .map(|&x2| {
            let integrand: Vec<Complex64> = points
                .par_iter()
                .zip(&leg1)
                .map(|(x3, k1)| {
                    let eta = x2 - x3;
                    Ok(k1 * kernel_value(kind, eta, t2, constants)? * (-damping * eta * eta).exp())
                })
                .collect::<Result<_>>()?;
            Ok(grid.trapezoid_complex(&integrand))
        })
        .collect()
}

fn max_residual(values: &[Complex64], kind: KernelKind, tau: f64, constants: &PhysicsConstants) -> Result<f64> {
    values.iter().zip(TEST_DISPLACEMENTS).try_fold(0.0f64, |acc, (v, x2)| {
        Ok(acc.max((v - kernel_value(kind, x2, tau, constants)?).norm()))
    })
}

/// max over x₂ of |∫K(0→x₃, sτ)K(x₃→x₂, (1−s)τ)dx₃ − K(0→x₂, τ)|.
pub fn chapman_kolmogorov_residual(
    kind: KernelKind,
    tau_total: f64,
    split: f64,
    grid: &Grid1D,
    damping: f64,
    constants: &PhysicsConstants,
) -> Result<f64> {
    let values = composed_values(kind, tau_total, split, grid, damping, constants)?;
    max_residual(&values, kind, tau_total, constants)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingSweep {
    pub dampings: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual after polynomial extrapolation of the composed values to δ = 0.
    pub extrapolated_residual: f64,
}

impl DampingSweep {
    /// True when the residual shrinks at every step of the (decreasing) damping sequence.
    pub fn monotone(&self) -> bool {
        self.residuals.windows(2).all(|w| w[1] < w[0])
    }
}

/// Quantum composition residual for each damping, each on its own
/// `composition_grid`.
pub fn quantum_composition_sweep(
    tau_total: f64,
    split: f64,
    dampings: &[f64],
    constants: &PhysicsConstants,
) -> Result<DampingSweep> {
    let mut residuals = Vec::with_capacity(dampings.len());
    let mut per_point: Vec<Vec<Complex64>> = Vec::with_capacity(dampings.len());
    for &d in dampings {
        let grid = composition_grid(split * tau_total, (1.0 - split) * tau_total, d, constants)?;
        let values = composed_values(KernelKind::Quantum, tau_total, split, &grid, d, constants)?;
        residuals.push(max_residual(&values, KernelKind::Quantum, tau_total, constants)?);
        per_point.push(values);
    }
    let extrapolated: Vec<Complex64> = (0..TEST_DISPLACEMENTS.len())
        .map(|i| {
            let ys: Vec<Complex64> = per_point.iter().map(|v| v[i]).collect();
            quadrature::extrapolate_to_zero(dampings, &ys)
        })
        .collect::<Result<_>>()?;
    Ok(DampingSweep {
        dampings: dampings.to_vec(),
        residuals,
        extrapolated_residual: max_residual(&extrapolated, KernelKind::Quantum, tau_total, constants)?,
    })
}

/// ∫K(x, t)e^(−δx²)dx for each δ, plus the δ → 0 extrapolation.
pub fn damped_kernel_mass(
    t: f64,
    dampings: &[f64],
    constants: &PhysicsConstants,
) -> Result<(Vec<Complex64>, Complex64)> {
    let chirp = constants.mass() / (2.0 * constants.hbar() * t);
    let values: Vec<Complex64> = dampings
        .iter()
        .map(|&d| {
            let grid = damped_quadrature_grid(chirp, d)?;
            let f: Vec<Complex64> = grid
                .points()
                .iter()
                .map(|x| Ok(quantum_kernel(*x, t, constants)? * (-d * x * x).exp()))
                .collect::<Result<_>>()?;
            Ok(grid.trapezoid_complex(&f))
        })
        .collect::<Result<_>>()?;
    let limit = quadrature::extrapolate_to_zero(dampings, &values)?;
    Ok((values, limit))
}

/// Kernel sampled on a symmetric displacement grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub kind: KernelKind,
    pub tau: f64,
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

impl KernelTable {
    pub fn direct(kind: KernelKind, tau: f64, grid: Grid1D, constants: &PhysicsConstants) -> Result<Self> {
        let values = grid
            .points()
            .iter()
            .map(|x| kernel_value(kind, *x, tau, constants))
            .collect::<Result<_>>()?;
        Ok(Self { kind, tau, grid, values })
    }

    /// Rows (displacement, re, im).
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.grid.points().into_iter().zip(&self.values).map(|(x, v)| (x, v.re, v.im))
    }

    /// Largest |difference| at displacements with |x| ≤ window.
    pub fn max_deviation(&self, other: &KernelTable, window: f64) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .grid
            .points()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .filter(|(x, _)| x.abs() <= window)
            .map(|(_, (a, b))| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// n-fold composition of the kernel at τ/n over the intermediate points.
/// Intermediate slices carry the damping e^(−δη²) on their displacement; a
/// single slice is the undamped direct kernel.
pub fn multi_slice_kernel(
    kind: KernelKind,
    tau_total: f64,
    n_slices: usize,
    grid: &Grid1D,
    damping: f64,
    constants: &PhysicsConstants,
) -> Result<KernelTable> {
    if n_slices == 0 {
        return domain("n_slices must be >= 1");
    }
    let n = grid.len();
    let centre = n / 2;
    if n % 2 == 0 || grid.x(centre).abs() > 1e-12 * grid.dx() {
        return domain("multi-slice composition needs a symmetric grid with an odd point count");
    }
    if n_slices == 1 {
        return KernelTable::direct(kind, tau_total, *grid, constants);
    }
    if kind == KernelKind::Quantum && damping <= 0.0 {
        return Err(Error::UndampedOscillatoryQuadrature);
    }
    let slice_tau = tau_total / n_slices as f64;
    let slice: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|x| Ok(kernel_value(kind, *x, slice_tau, constants)? * (-damping * x * x).exp()))
        .collect::<Result<_>>()?;
    let dx = grid.dx();
    let mut composed = slice.clone();
    for _ in 1..n_slices {
        let full = spectral::linear_convolve(&composed, &slice);
        composed = full[centre..centre + n].iter().map(|z| z * dx).collect();
    }
    Ok(KernelTable { kind, tau: tau_total, grid: *grid, values: composed })
}

/// A propagated field together with the mass (or norm²) that left the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagated<T> {
    pub field: T,
    pub leakage: f64,
}

impl<T> Propagated<T> {
    pub fn leaked(&self) -> bool {
        self.leakage.abs() > LEAKAGE_LIMIT
    }
}

fn convolve_by_offset<T>(weights: &[T], input: &[T]) -> Vec<T>
where
    T: Copy + Send + Sync + std::ops::Mul<Output = T> + std::iter::Sum,
{
    let n = input.len();
    (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| weights[i.abs_diff(j)] * input[j]).sum())
        .collect()
}

/// Trapezoid convolution of a density with the heat kernel (zero outside the grid).
pub fn propagate_density(w0: &DensityField, tau: f64, diffusivity: f64) -> Result<Propagated<DensityField>> {
    let grid = *w0.grid();
    let dx = grid.dx();
    let kernel: Vec<f64> = (0..grid.len())
        .map(|m| heat_kernel(m as f64 * dx, tau, diffusivity))
        .collect::<Result<_>>()?;
    let weighted: Vec<f64> = w0.values().iter().enumerate().map(|(j, w)| w * grid.weight(j)).collect();
    let out = convolve_by_offset(&kernel, &weighted);
    let field = DensityField::new(grid, out)?;
    Ok(Propagated { leakage: w0.mass() - field.mass(), field })
}

/// Weights W_m of the free step over time t for grid functions that are
/// band-limited to |k| < π/dx:
/// W_m = (dx/π) ∫₀^{π/dx} cos(k m dx) exp(−i ħ t k² / 2m) dk,
/// optionally multiplied by exp(−δ (m dx)²).
pub fn free_step_weights(
    dx: f64,
    count: usize,
    t: f64,
    damping: f64,
    constants: &PhysicsConstants,
) -> Result<Vec<Complex64>> {
    if !(t > 0.0) || !(dx > 0.0) {
        return domain("free-step weights need t > 0 and dx > 0");
    }
    let b = constants.hbar() * t / (2.0 * constants.mass());
    let k_max = PI / dx;
    let sign = constants.phase().sign();
    let weights = (0..count)
        .into_par_iter()
        .map(|m| {
            let eta = m as f64 * dx;
            let panels = ((k_max * eta + b * k_max * k_max) / PI).ceil() as usize + 4;
            let w = quadrature::composite_complex(
                |k| Complex64::from_polar((k * eta).cos(), -sign * b * k * k),
                0.0,
                k_max,
                panels,
            );
            w * (dx / PI) * (-damping * eta * eta).exp()
        })
        .collect();
    Ok(weights)
}

/// Free evolution of ψ over time t by the quantum kernel (zero outside the grid).
pub fn propagate_wavefunction(
    psi0: &WaveFunction,
    t: f64,
    constants: &PhysicsConstants,
    damping: f64,
) -> Result<Propagated<WaveFunction>> {
    if damping < 0.0 {
        return domain("damping must be >= 0");
    }
    let grid = *psi0.grid();
    let weights = free_step_weights(grid.dx(), grid.len(), t, damping, constants)?;
    let field = WaveFunction::new(grid, convolve_by_offset(&weights, psi0.values()))?;
    Ok(Propagated { leakage: psi0.norm_sqr() - field.norm_sqr(), field })
}

/// Explicit finite-volume step of ∂W/∂t = −∂(vW)/∂x + D∂²W/∂x² with zero
/// flux through both walls. Edge cells are half-width, so the trapezoid mass
/// is conserved to rounding.
pub fn fokker_planck_step(w: &DensityField, drift: &[f64], diffusivity: f64, dt: f64) -> Result<DensityField> {
    let grid = *w.grid();
    if drift.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} drift values for {} points", drift.len(), grid.len())));
    }
    if !(diffusivity >= 0.0) || !(dt > 0.0) {
        return domain("Fokker-Planck step needs D >= 0 and dt > 0");
    }
    let dx = grid.dx();
    if diffusivity > 0.0 {
        let max_dt = dx * dx / (4.0 * diffusivity);
        if dt > max_dt {
            return Err(Error::StabilityViolation { dt, max_dt });
        }
    }
    let v = w.values();
    let n = v.len();
    let flux: Vec<f64> = (0..n - 1)
        .map(|i| {
            let v_face = 0.5 * (drift[i] + drift[i + 1]);
            let w_face = 0.5 * (v[i] + v[i + 1]);
            v_face * w_face - diffusivity * (v[i + 1] - v[i]) / dx
        })
        .collect();
    let out = (0..n)
        .map(|i| {
            let right = if i + 1 < n { flux[i] } else { 0.0 };
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            v[i] - dt / grid.weight(i) * (right - left)
        })
        .collect();
    DensityField::new(grid, out)
}

/// max over interior points of |(W⁺ − W⁻)/2dt − D Δ_h W|.
pub fn diffusion_residual(
    before: &DensityField,
    centre: &DensityField,
    after: &DensityField,
    dt: f64,
    diffusivity: f64,
) -> Result<f64> {
    let grid = centre.grid();
    grid.check_same(before.grid())?;
    grid.check_same(after.grid())?;
    let dx2 = grid.dx() * grid.dx();
    let (a, c, b) = (before.values(), centre.values(), after.values());
    Ok((1..c.len() - 1)
        .map(|i| {
            let dwdt = (b[i] - a[i]) / (2.0 * dt);
            let lap = (c[i + 1] - 2.0 * c[i] + c[i - 1]) / dx2;
            (dwdt - diffusivity * lap).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn natural() -> PhysicsConstants {
        PhysicsConstants::natural()
    }

    #[test]
    fn heat_kernel_peak() {
        assert_relative_eq!(heat_kernel(0.0, 1.0, 0.5).unwrap(), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-15);
        assert_eq!(heat_kernel(1.7, 0.3, 0.5).unwrap(), heat_kernel(-1.7, 0.3, 0.5).unwrap());
        assert!(heat_kernel(0.0, 0.0, 0.5).is_err());
        assert!(heat_kernel(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn heat_kernel_unit_mass() {
        let (tau, d) = (1.0f64, 0.5f64);
        let grid = Grid1D::symmetric(12.0 * (2.0 * d * tau).sqrt(), 0.05).unwrap();
        let v: Vec<f64> = grid.points().iter().map(|x| heat_kernel(*x, tau, d).unwrap()).collect();
        assert!((grid.trapezoid(&v) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn heat_kernel_scaling() {
        let c = 1.7;
        let (x, tau, d) = (0.4, 0.8, 0.3);
        let base = heat_kernel(x, tau, d).unwrap();
        let scaled = c * heat_kernel(c * x, tau, c * c * d).unwrap();
        assert_relative_eq!(base, scaled, max_relative = 1e-14);
    }

    #[test]
    fn quantum_kernel_values() {
        let c = natural();
        let k = quantum_kernel(0.0, 1.0, &c).unwrap();
        let v = (1.0f64 / (2.0 * PI)).sqrt() / 2f64.sqrt();
        assert!((k - Complex64::new(v, -v)).norm() < 1e-15);
        for x in [-3.0, 0.1, 5.0] {
            let m = quantum_kernel(x, 0.7, &c).unwrap().norm();
            assert_relative_eq!(m, (1.0 / (2.0 * PI * 0.7)).sqrt(), max_relative = 1e-14);
        }
        let minus = c.with_phase(PhaseConvention::Minus);
        assert_eq!(quantum_kernel(0.3, 1.0, &minus).unwrap(), quantum_kernel(0.3, 1.0, &c).unwrap().conj());
        assert!(quantum_kernel(0.0, -1.0, &c).is_err());
    }

    #[test]
    fn damped_fresnel_mass_extrapolates_to_one() {
        let (values, limit) = damped_kernel_mass(1.0, &DEFAULT_DAMPINGS, &natural()).unwrap();
        // closed form of the damped integral: √(a / (a + iδ)), a = m/2ħt
        for (v, d) in values.iter().zip(DEFAULT_DAMPINGS) {
            let exact = (Complex64::new(0.5, 0.0) / Complex64::new(0.5, d)).sqrt();
            assert!((v - exact).norm() < 1e-10, "{v} vs {exact}");
        }
        assert!((limit - 1.0).norm() < 1e-3);
    }

    #[test]
    fn heat_composition_residual() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let c = natural();
        let r = chapman_kolmogorov_residual(KernelKind::Heat, 1.0, 0.5, &grid, 0.0, &c).unwrap();
        assert!(r < 1e-8, "{r}");
        let r1 = chapman_kolmogorov_residual(KernelKind::Heat, 1.0, 0.3, &grid, 0.0, &c).unwrap();
        let r2 = chapman_kolmogorov_residual(KernelKind::Heat, 1.0, 0.7, &grid, 0.0, &c).unwrap();
        assert!((r1 - r2).abs() < 1e-12);
    }

    #[test]
    fn composition_rejects_bad_input() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let c = natural();
        assert_eq!(
            chapman_kolmogorov_residual(KernelKind::Quantum, 1.0, 0.5, &grid, 0.0, &c),
            Err(Error::UndampedOscillatoryQuadrature)
        );
        assert!(chapman_kolmogorov_residual(KernelKind::Heat, 1.0, 1.0, &grid, 0.0, &c).is_err());
        let narrow = Grid1D::symmetric(3.0, 0.05).unwrap();
        assert!(chapman_kolmogorov_residual(KernelKind::Heat, 1.0, 0.5, &narrow, 0.0, &c).is_err());
    }

    #[test]
    fn quantum_composition_improves_with_less_damping() {
        let sweep = quantum_composition_sweep(1.0, 0.5, &[1e-2, 1e-3], &natural()).unwrap();
        assert!(sweep.monotone(), "{:?}", sweep.residuals);
        assert!(sweep.residuals[1] < 1e-3, "{:?}", sweep.residuals);
    }

    #[test]
    fn single_slice_is_direct() {
        let grid = Grid1D::symmetric(5.0, 0.1).unwrap();
        let c = natural();
        for kind in [KernelKind::Heat, KernelKind::Quantum] {
            let t = multi_slice_kernel(kind, 1.0, 1, &grid, 1e-3, &c).unwrap();
            let d = KernelTable::direct(kind, 1.0, grid, &c).unwrap();
            assert_eq!(t, d);
        }
    }

    #[test]
    fn four_heat_slices() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let c = natural();
        let t = multi_slice_kernel(KernelKind::Heat, 1.0, 4, &grid, 0.0, &c).unwrap();
        let d = KernelTable::direct(KernelKind::Heat, 1.0, grid, &c).unwrap();
        assert!(t.max_deviation(&d, 10.0).unwrap() < 1e-7);
    }

    #[test]
    fn kernel_rows_increase() {
        let grid = Grid1D::symmetric(2.0, 0.5).unwrap();
        let t = KernelTable::direct(KernelKind::Heat, 1.0, grid, &natural()).unwrap();
        let xs: Vec<f64> = t.rows().map(|r| r.0).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        assert!(t.rows().all(|r| r.2 == 0.0));
    }

    #[test]
    fn density_spreads_like_gaussian() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let w0 = DensityField::gaussian(grid, 0.0, 1.0).unwrap();
        let out = propagate_density(&w0, 1.0, 0.5).unwrap();
        assert!(!out.leaked());
        assert!((out.field.mass() - 1.0).abs() < 1e-8);
        assert!((out.field.variance() - 2.0).abs() < 1e-8);
        let half = propagate_density(&w0, 0.5, 0.5).unwrap();
        let twice = propagate_density(&half.field, 0.5, 0.5).unwrap();
        let diff = twice
            .field
            .values()
            .iter()
            .zip(out.field.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn spike_becomes_kernel() {
        let grid = Grid1D::symmetric(10.0, 0.05).unwrap();
        let spike = DensityField::spike(grid, grid.len() / 2).unwrap();
        let out = propagate_density(&spike, 1.0, 0.5).unwrap().field;
        for (x, v) in grid.points().iter().zip(out.values()) {
            assert!((v - heat_kernel(*x, 1.0, 0.5).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn leakage_flagged() {
        let grid = Grid1D::symmetric(3.0, 0.05).unwrap();
        let w0 = DensityField::gaussian(grid, 0.0, 1.0).unwrap();
        assert!(propagate_density(&w0, 2.0, 0.5).unwrap().leaked());
    }

    #[test]
    fn free_packet_width() {
        let grid = Grid1D::symmetric(20.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.0, 1.0, 0.0).unwrap();
        let out = propagate_wavefunction(&psi, 1.0, &natural(), 0.0).unwrap();
        assert!((out.field.norm_sqr() - 1.0).abs() < 1e-6);
        assert!((out.field.position_variance() - 1.25).abs() < 1e-6);
        let minus = natural().with_phase(PhaseConvention::Minus);
        let out_m = propagate_wavefunction(&psi, 1.0, &minus, 0.0).unwrap();
        assert!((out_m.field.position_variance() - 1.25).abs() < 1e-6);
    }

    #[test]
    fn short_time_identity() {
        let grid = Grid1D::symmetric(10.0, 0.05).unwrap();
        let psi = WaveFunction::gaussian_packet(grid, 0.5, 1.0, 1.0).unwrap();
        let out = propagate_wavefunction(&psi, 1e-4, &natural(), 0.0).unwrap();
        assert!(out.field.max_abs_diff(&psi).unwrap() < 1e-4);
    }

    #[test]
    fn zero_drift_is_diffusion() {
        let grid = Grid1D::symmetric(12.0, 0.1).unwrap();
        let w0 = DensityField::gaussian(grid, 0.0, 1.0).unwrap();
        let dt = 1e-3;
        let stepped = fokker_planck_step(&w0, &vec![0.0; grid.len()], 0.5, dt).unwrap();
        // kernel width √(2Ddt) is below dx here, so compare with the closed form
        let exact = DensityField::gaussian(grid, 0.0, (1.0 + 2.0 * 0.5 * dt).sqrt()).unwrap();
        let diff = stepped.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-5, "{diff}");
    }

    #[test]
    fn constant_drift_moves_centroid() {
        let grid = Grid1D::symmetric(12.0, 0.05).unwrap();
        let w0 = DensityField::gaussian(grid, 0.0, 1.0).unwrap();
        let dt = 1e-3;
        let out = fokker_planck_step(&w0, &vec![0.7; grid.len()], 0.5, dt).unwrap();
        assert!((out.mean() - w0.mean() - 0.7 * dt).abs() < 1e-8);
        assert!((out.mass() - w0.mass()).abs() < 1e-10);
    }

    #[test]
    fn ornstein_uhlenbeck_relaxes() {
        let grid = Grid1D::symmetric(8.0, 0.1).unwrap();
        let (k, d) = (1.0, 0.5);
        let drift: Vec<f64> = grid.points().iter().map(|x| -k * x).collect();
        let mut w = DensityField::gaussian(grid, 1.0, 0.5).unwrap();
        let dt = 0.002;
        for _ in 0..5000 {
            w = fokker_planck_step(&w, &drift, d, dt).unwrap();
        }
        assert!((w.variance() - d / k).abs() < 5e-3, "{}", w.variance());
        assert!(w.mean().abs() < 1e-3);
    }

    #[test]
    fn unstable_step_rejected() {
        let grid = Grid1D::symmetric(1.0, 0.1).unwrap();
        let w = DensityField::gaussian(grid, 0.0, 0.3).unwrap();
        match fokker_planck_step(&w, &vec![0.0; grid.len()], 0.5, 0.1) {
            Err(Error::StabilityViolation { max_dt, .. }) => assert!((max_dt - 0.005).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn density_solves_diffusion_equation() {
        let grid = Grid1D::symmetric(15.0, 0.05).unwrap();
        let w0 = DensityField::gaussian(grid, 0.0, 1.0).unwrap();
        let dt = 0.01;
        let a = propagate_density(&w0, 1.0 - dt, 0.5).unwrap().field;
        let c = propagate_density(&w0, 1.0, 0.5).unwrap().field;
        let b = propagate_density(&w0, 1.0 + dt, 0.5).unwrap().field;
        assert!(diffusion_residual(&a, &c, &b, dt, 0.5).unwrap() < 1e-4);
    }
}
