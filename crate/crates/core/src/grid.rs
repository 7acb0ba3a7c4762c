//! Uniform 1D grids and the fields that live on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return domain(format!("grid needs at least 2 points, got {n_points}"));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return domain(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid on [−half_width, half_width] with an odd point count, so x = 0 is a node.
    /// The spacing is the largest value ≤ `max_dx` that fits.
    pub fn symmetric(half_width: f64, max_dx: f64) -> Result<Self> {
        if !(half_width > 0.0) || !(max_dx > 0.0) {
            return domain("symmetric grid needs positive half-width and spacing");
        }
        let half = (half_width / max_dx).ceil() as usize;
        Self::new(-half_width, half_width, 2 * half + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let inner = crate::stats::pairwise_sum(&values[1..n - 1]);
        self.dx() * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    pub fn trapezoid_complex(&self, values: &[Complex64]) -> Complex64 {
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = values.iter().map(|z| z.im).collect();
        Complex64::new(self.trapezoid(&re), self.trapezoid(&im))
    }

    /// Index of the node closest to `x` (clamped to the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let t = ((x - self.x_min) / self.dx()).round();
        t.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    pub(crate) fn check_same(&self, other: &Grid1D) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Probability density sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    grid: Grid1D,
    values: Vec<f64>,
}

/// Densities may carry quadrature noise down to this level below zero.
pub const NEGATIVE_FLOOR: f64 = -1e-12;

impl DensityField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < NEGATIVE_FLOOR) {
            return domain(format!("density values must be finite and non-negative, found {v}"));
        }
        Ok(Self { grid, values })
    }

    pub fn gaussian(grid: Grid1D, mean: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return domain("gaussian width must be positive");
        }
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let values = grid
            .points()
            .iter()
            .map(|x| norm * (-(x - mean).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        Self::new(grid, values)
    }

    /// Unit-mass spike on a single node (value 1/dx on an interior node).
    pub fn spike(grid: Grid1D, index: usize) -> Result<Self> {
        if index >= grid.len() {
            return domain("spike index outside grid");
        }
        let mut values = vec![0.0; grid.len()];
        values[index] = 1.0 / grid.weight(index);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.grid.trapezoid(&self.values)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0) {
            return domain("cannot normalize a density with zero mass");
        }
        self.values.iter_mut().for_each(|v| *v /= m);
        Ok(())
    }

    pub fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        let integrand: Vec<f64> = self
            .grid
            .points()
            .iter()
            .zip(&self.values)
            .map(|(x, w)| f(*x) * w)
            .collect();
        self.grid.trapezoid(&integrand)
    }

    pub fn mean(&self) -> f64 {
        self.moment(|x| x) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.moment(|x| (x - mu) * (x - mu)) / self.mass()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Complex wavefunction sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFunction {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid1D, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    /// Normalized packet (2πσ²)^(−1/4) exp(−(x−x0)²/4σ² + i k0 x); |ψ|² has variance σ².
    pub fn gaussian_packet(grid: Grid1D, x0: f64, sigma: f64, k0: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return domain("packet width must be positive");
        }
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let values = grid
            .points()
            .iter()
            .map(|x| {
                let env = norm * (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp();
                Complex64::from_polar(env, k0 * x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn probability(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Trapezoid L² norm squared.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.trapezoid(&self.probability())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) {
            return domain("cannot normalize a zero wavefunction");
        }
        self.values.iter_mut().for_each(|z| *z /= n);
        Ok(())
    }

    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let integrand: Vec<f64> = self
            .grid
            .points()
            .iter()
            .zip(&self.values)
            .map(|(x, z)| f(*x) * z.norm_sqr())
            .collect();
        self.grid.trapezoid(&integrand) / self.norm_sqr()
    }

    pub fn mean_position(&self) -> f64 {
        self.expectation(|x| x)
    }

    pub fn position_variance(&self) -> f64 {
        let mu = self.mean_position();
        self.expectation(|x| (x - mu) * (x - mu))
    }

    /// Largest pointwise |ψ − φ|.
    pub fn max_abs_diff(&self, other: &WaveFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest pointwise ||ψ| − |φ||.
    pub fn max_modulus_diff(&self, other: &WaveFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max))
    }
}
