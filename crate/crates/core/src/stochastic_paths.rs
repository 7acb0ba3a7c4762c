//! Discrete Wiener paths and the estimators built on them: diffusivity,
//! forward/backward velocities, the velocity gap, osmotic speed, kinetic
//! energy, and the position–momentum / energy–time uncertainty chains.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicsConstants;
use crate::error::{domain, Result};
use crate::grid::DensityField;
use crate::stats::{self, LinearFit, SampleStats};

/// Estimators that need many samples refuse to run below this count.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub epsilon: f64,
    pub positions: Vec<f64>,
    pub drift: f64,
    pub stream_id: u64,
}

impl Path {
    pub fn new(epsilon: f64, positions: Vec<f64>, drift: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return domain("path step must be > 0");
        }
        if positions.len() < 3 {
            return domain("a path needs at least 2 steps");
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return domain("path positions must be finite");
        }
        Ok(Self { epsilon, positions, drift, stream_id: 0 })
    }

    /// x_n = v·nε exactly (no noise).
    pub fn ballistic(epsilon: f64, n_steps: usize, velocity: f64) -> Result<Self> {
        Self::new(epsilon, (0..=n_steps).map(|n| velocity * n as f64 * epsilon).collect(), velocity)
    }

    pub fn n_steps(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.epsilon
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.positions.windows(2).map(|w| w[1] - w[0])
    }

    /// (v⁺, v⁻) at every interior index.
    pub fn velocity_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let e = self.epsilon;
        self.positions.windows(3).map(move |w| ((w[2] - w[1]) / e, (w[1] - w[0]) / e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_paths: usize,
    pub n_steps: usize,
    pub epsilon: f64,
    pub drift: f64,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn with_seed(self, master_seed: u64) -> Self {
        Self { master_seed, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub paths: Vec<Path>,
    pub constants: PhysicsConstants,
    pub master_seed: u64,
}

impl PathEnsemble {
    pub fn from_paths(paths: Vec<Path>, constants: PhysicsConstants, master_seed: u64) -> Result<Self> {
        let first = paths.first().ok_or_else(|| crate::Error::Domain("empty ensemble".into()))?;
        if paths.iter().any(|p| p.epsilon != first.epsilon || p.drift != first.drift) {
            return domain("all paths in an ensemble must share epsilon and drift");
        }
        Ok(Self { paths, constants, master_seed })
    }

    pub fn epsilon(&self) -> f64 {
        self.paths[0].epsilon
    }

    pub fn drift(&self) -> f64 {
        self.paths[0].drift
    }

    pub fn n_increments(&self) -> usize {
        self.paths.iter().map(Path::n_steps).sum()
    }

    pub fn n_interior(&self) -> usize {
        self.paths.iter().map(|p| p.n_steps() - 1).sum()
    }

    /// Rows (path_id, step, t, x).
    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.paths.iter().enumerate().flat_map(|(id, p)| {
            p.positions.iter().enumerate().map(move |(n, x)| (id, n, p.time(n), *x))
        })
    }

    fn per_path<F>(&self, f: F) -> Vec<Vec<f64>>
    where
        F: Fn(&Path) -> Vec<f64> + Sync + Send,
    {
        self.paths.par_iter().map(f).collect()
    }
}

/// The generator for one path: ChaCha8 keyed by the master seed, with the
/// path index as the stream number.
pub fn path_rng(master_seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Paths starting at 0 with i.i.d. increments N(drift·ε, 2Dε), D = ħ/2m.
pub fn sample_wiener_ensemble(spec: &EnsembleSpec, constants: &PhysicsConstants) -> Result<PathEnsemble> {
    if spec.n_paths == 0 || spec.n_steps < 2 || !(spec.epsilon > 0.0) || !spec.drift.is_finite() {
        return domain(format!("invalid ensemble parameters {spec:?}"));
    }
    let sigma = (2.0 * constants.diffusivity() * spec.epsilon).sqrt();
    let mean_step = spec.drift * spec.epsilon;
    let paths = (0..spec.n_paths as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = path_rng(spec.master_seed, id);
            let mut positions = Vec::with_capacity(spec.n_steps + 1);
            let mut x = 0.0;
            positions.push(x);
            for _ in 0..spec.n_steps {
                let z: f64 = rng.sample(StandardNormal);
                x += mean_step + sigma * z;
                positions.push(x);
            }
            Path { epsilon: spec.epsilon, positions, drift: spec.drift, stream_id: id }
        })
        .collect();
    Ok(PathEnsemble { paths, constants: *constants, master_seed: spec.master_seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    /// Reference value the estimate is compared with, when one exists.
    pub claim: Option<f64>,
    /// |estimate − claim| / stderr.
    pub discrepancy_sigma: Option<f64>,
}

impl EstimatorReport {
    pub fn new(name: impl Into<String>, stats: SampleStats) -> Self {
        Self {
            name: name.into(),
            estimate: stats.mean,
            stderr: stats.stderr,
            n_samples: stats.n,
            claim: None,
            discrepancy_sigma: None,
        }
    }

    pub fn with_claim(mut self, claim: f64) -> Self {
        self.claim = Some(claim);
        self.discrepancy_sigma = if self.stderr > 0.0 {
            Some((self.estimate - claim).abs() / self.stderr)
        } else if self.estimate == claim {
            Some(0.0)
        } else {
            None
        };
        self
    }

    pub fn within_sigma(&self, k: f64) -> bool {
        self.discrepancy_sigma.is_some_and(|d| d <= k)
    }
}

fn require_samples(n: usize, what: &str) -> Result<()> {
    if n < MIN_SAMPLES {
        return domain(format!("{what} needs at least {MIN_SAMPLES} samples, got {n}"));
    }
    Ok(())
}

/// Sample variance of the increments, compared with 2Dε.
pub fn increment_variance(ensemble: &PathEnsemble) -> EstimatorReport {
    let v = ensemble.drift() * ensemble.epsilon();
    let batches = ensemble.per_path(|p| p.increments().map(|d| (d - v) * (d - v)).collect());
    EstimatorReport::new("increment_variance", SampleStats::from_batches(&batches))
        .with_claim(2.0 * ensemble.constants.diffusivity() * ensemble.epsilon())
}

/// Mean of (Δx − drift·ε)² / 2ε over all increments, compared with D.
pub fn estimate_diffusion(ensemble: &PathEnsemble) -> Result<EstimatorReport> {
    require_samples(ensemble.n_increments(), "diffusion estimate")?;
    let eps = ensemble.epsilon();
    let v = ensemble.drift() * eps;
    let batches = ensemble.per_path(|p| p.increments().map(|d| (d - v) * (d - v) / (2.0 * eps)).collect());
    Ok(EstimatorReport::new("diffusivity", SampleStats::from_batches(&batches))
        .with_claim(ensemble.constants.diffusivity()))
}

/// D recovered from the second moment of a density that evolved for τ from a point.
pub fn diffusion_from_density(density: &DensityField, tau: f64) -> f64 {
    density.moment(|x| x * x) / density.mass() / (2.0 * tau)
}

/// v⁺ = (x_{n+1} − x_n)/ε, v⁻ = (x_n − x_{n−1})/ε.
pub fn forward_backward_velocity(path: &Path, n: usize) -> Result<(f64, f64)> {
    if n == 0 || n >= path.n_steps() {
        return domain(format!("velocity index {n} must satisfy 1 <= n <= {}", path.n_steps() - 1));
    }
    let x = &path.positions;
    Ok(((x[n + 1] - x[n]) / path.epsilon, (x[n] - x[n - 1]) / path.epsilon))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityGapStatistics {
    /// RMS of (v⁺ − v⁻)/2, compared with √(D/ε).
    pub half_gap_rms: EstimatorReport,
    /// Mean of (v⁺ − drift)(v⁻ − drift) / (2D/ε), compared with 0.
    pub correlation: EstimatorReport,
}

fn rms_report(name: &str, stats: SampleStats) -> EstimatorReport {
    let rms = stats.mean.sqrt();
    let stderr = if rms > 0.0 { stats.stderr / (2.0 * rms) } else { 0.0 };
    EstimatorReport::new(name, SampleStats { mean: rms, stderr, ..stats })
}

pub fn velocity_gap_statistics(ensemble: &PathEnsemble) -> Result<VelocityGapStatistics> {
    require_samples(ensemble.n_interior(), "velocity gap statistics")?;
    let d = ensemble.constants.diffusivity();
    let eps = ensemble.epsilon();
    let v0 = ensemble.drift();
    let half = ensemble.per_path(|p| p.velocity_pairs().map(|(a, b)| 0.25 * (a - b) * (a - b)).collect());
    let corr = ensemble.per_path(|p| {
        p.velocity_pairs().map(|(a, b)| (a - v0) * (b - v0) / (2.0 * d / eps)).collect()
    });
    Ok(VelocityGapStatistics {
        half_gap_rms: rms_report("half_velocity_gap_rms", SampleStats::from_batches(&half))
            .with_claim((d / eps).sqrt()),
        correlation: EstimatorReport::new("velocity_correlation", SampleStats::from_batches(&corr)).with_claim(0.0),
    })
}

/// RMS of v⁺ − v⁻ over all interior points, compared with √(4D/ε).
pub fn nondifferentiability_gap(ensemble: &PathEnsemble) -> Result<EstimatorReport> {
    require_samples(ensemble.n_interior(), "velocity gap")?;
    let batches = ensemble.per_path(|p| p.velocity_pairs().map(|(a, b)| (a - b) * (a - b)).collect());
    Ok(rms_report("velocity_gap_rms", SampleStats::from_batches(&batches))
        .with_claim((4.0 * ensemble.constants.diffusivity() / ensemble.epsilon()).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSweep {
    pub epsilons: Vec<f64>,
    pub reports: Vec<EstimatorReport>,
    /// ln RMS gap against ln ε.
    pub fit: LinearFit,
}

/// Seed for the i-th ensemble of a sweep.
pub fn sweep_seed(master_seed: u64, index: usize) -> u64 {
    stats::splitmix64(master_seed, index as u64)
}

pub fn gap_sweep(epsilons: &[f64], spec: &EnsembleSpec, constants: &PhysicsConstants) -> Result<GapSweep> {
    let reports = epsilons
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let s = spec.with_epsilon(e).with_seed(sweep_seed(spec.master_seed, i));
            nondifferentiability_gap(&sample_wiener_ensemble(&s, constants)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let rms: Vec<f64> = reports.iter().map(|r| r.estimate).collect();
    let fit = stats::log_log_fit(epsilons, &rms)?;
    Ok(GapSweep { epsilons: epsilons.to_vec(), reports, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsmoticReport {
    /// u² estimate with the reference 2D/ε.
    pub diffusion_form: EstimatorReport,
    /// Same estimate with the reference ħ/(2mε).
    pub action_form: EstimatorReport,
}

/// u² as the mean of (Δx)²/ε² over all increments.
pub fn osmotic_speed(ensemble: &PathEnsemble) -> Result<OsmoticReport> {
    require_samples(ensemble.n_increments(), "osmotic speed")?;
    let eps = ensemble.epsilon();
    let c = &ensemble.constants;
    let batches = ensemble.per_path(|p| p.increments().map(|d| d * d / (eps * eps)).collect());
    let stats = SampleStats::from_batches(&batches);
    Ok(OsmoticReport {
        diffusion_form: EstimatorReport::new("osmotic_u2", stats).with_claim(2.0 * c.diffusivity() / eps),
        action_form: EstimatorReport::new("osmotic_u2", stats).with_claim(c.hbar() / (2.0 * c.mass() * eps)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticEstimates {
    /// (m/4)[(v⁺)² + (v⁻)²]; diverges like mD/ε.
    pub naive: EstimatorReport,
    /// (m/2) v⁺v⁻; compared with m·drift²/2.
    pub symmetric: EstimatorReport,
}

pub fn kinetic_energy_estimators(ensemble: &PathEnsemble) -> Result<KineticEstimates> {
    require_samples(ensemble.n_interior(), "kinetic energy estimators")?;
    let m = ensemble.constants.mass();
    let naive = ensemble.per_path(|p| p.velocity_pairs().map(|(a, b)| 0.25 * m * (a * a + b * b)).collect());
    let symm = ensemble.per_path(|p| p.velocity_pairs().map(|(a, b)| 0.5 * m * a * b).collect());
    let v0 = ensemble.drift();
    Ok(KineticEstimates {
        naive: EstimatorReport::new("naive_kinetic", SampleStats::from_batches(&naive)),
        symmetric: EstimatorReport::new("symmetric_kinetic", SampleStats::from_batches(&symm))
            .with_claim(0.5 * m * v0 * v0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticSweep {
    pub epsilons: Vec<f64>,
    pub estimates: Vec<KineticEstimates>,
    /// Naive estimate against 1/ε; the slope should approach mD.
    pub naive_fit: LinearFit,
    /// Symmetric estimate against 1/ε; the slope should vanish.
    pub symmetric_fit: LinearFit,
}

impl KineticSweep {
    /// Rows (eps, naive_ke, naive_stderr, symm_ke, symm_stderr).
    pub fn rows(&self) -> impl Iterator<Item = [f64; 5]> + '_ {
        self.epsilons.iter().zip(&self.estimates).map(|(e, k)| {
            [*e, k.naive.estimate, k.naive.stderr, k.symmetric.estimate, k.symmetric.stderr]
        })
    }
}

pub fn kinetic_sweep(epsilons: &[f64], spec: &EnsembleSpec, constants: &PhysicsConstants) -> Result<KineticSweep> {
    let estimates = epsilons
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let s = spec.with_epsilon(e).with_seed(sweep_seed(spec.master_seed, i));
            kinetic_energy_estimators(&sample_wiener_ensemble(&s, constants)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let inv: Vec<f64> = epsilons.iter().map(|e| 1.0 / e).collect();
    let naive: Vec<f64> = estimates.iter().map(|k| k.naive.estimate).collect();
    let symm: Vec<f64> = estimates.iter().map(|k| k.symmetric.estimate).collect();
    Ok(KineticSweep {
        epsilons: epsilons.to_vec(),
        naive_fit: stats::linear_fit(&inv, &naive)?,
        symmetric_fit: stats::linear_fit(&inv, &symm)?,
        estimates,
    })
}

/// Largest relative deviation of (v⁺)² + (v⁻)² − 2v⁺v⁻ from (v⁺ − v⁻)² over
/// every interior point, scaled by max((v⁺)² + (v⁻)², 1).
pub fn velocity_identity_residual(ensemble: &PathEnsemble) -> f64 {
    ensemble
        .paths
        .par_iter()
        .map(|p| {
            p.velocity_pairs()
                .map(|(a, b)| {
                    let lhs = a * a + b * b - 2.0 * a * b;
                    let rhs = (a - b) * (a - b);
                    (lhs - rhs).abs() / (a * a + b * b).max(1.0)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// (m/2)(v + iu)(v − iu).
pub fn complex_velocity_energy(mass: f64, v: f64, u: f64) -> Complex64 {
    0.5 * mass * (Complex64::new(v, u) * Complex64::new(v, -u))
}

/// The position–momentum and energy–time chains at step ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyChain {
    pub epsilon: f64,
    /// Δx² = ħε/m
    pub step_variance: f64,
    /// ⟨(Δx)²⟩ = Δx²/2
    pub mean_dx2: f64,
    /// ⟨(Δp)²⟩ = mħ/2ε
    pub mean_dp2: f64,
    pub xp_product: f64,
    /// (ħ/2)²
    pub xp_claim: f64,
    /// u² = ħ/2mε
    pub u2: f64,
    /// ΔE = mu²/2
    pub delta_e: f64,
    pub delta_t: f64,
    /// (ΔE·Δt)²
    pub et_product: f64,
    /// (ħ/2)²
    pub et_claim: f64,
    /// et_claim / et_product
    pub et_discrepancy_factor: f64,
}

pub fn uncertainty_products(epsilon: f64, constants: &PhysicsConstants) -> Result<UncertaintyChain> {
    if !(epsilon > 0.0) {
        return domain("epsilon must be > 0");
    }
    let (h, m) = (constants.hbar(), constants.mass());
    let step_variance = h * epsilon / m;
    let mean_dx2 = step_variance / 2.0;
    let mean_dp2 = m * h / (2.0 * epsilon);
    let u2 = h / (2.0 * m * epsilon);
    let delta_e = 0.5 * m * u2;
    let et_product = (delta_e * epsilon).powi(2);
    let et_claim = (h / 2.0).powi(2);
    Ok(UncertaintyChain {
        epsilon,
        step_variance,
        mean_dx2,
        mean_dp2,
        xp_product: mean_dp2 * mean_dx2,
        xp_claim: (h / 2.0).powi(2),
        u2,
        delta_e,
        delta_t: epsilon,
        et_product,
        et_claim,
        et_discrepancy_factor: et_claim / et_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::kernels::heat_kernel;
    use proptest::prelude::*;

    fn spec(n_paths: usize, n_steps: usize, epsilon: f64, drift: f64) -> EnsembleSpec {
        EnsembleSpec { n_paths, n_steps, epsilon, drift, master_seed: 42 }
    }

    fn natural() -> PhysicsConstants {
        PhysicsConstants::natural()
    }

    #[test]
    fn increments_have_stated_variance() {
        let e = sample_wiener_ensemble(&spec(200, 500, 0.01, 0.0), &natural()).unwrap();
        assert_eq!(e.n_increments(), 100_000);
        let r = increment_variance(&e);
        assert!(r.within_sigma(3.0), "{r:?}");
        let finals: Vec<f64> = e.paths.iter().map(|p| *p.positions.last().unwrap()).collect();
        let s = SampleStats::from_iid(&finals);
        assert!(s.mean.abs() < 3.0 * s.stderr);
    }

    #[test]
    fn same_seed_same_paths() {
        let s = spec(8, 50, 0.01, 0.3);
        let a = sample_wiener_ensemble(&s, &natural()).unwrap();
        let b = sample_wiener_ensemble(&s, &natural()).unwrap();
        assert_eq!(a, b);
        let c = sample_wiener_ensemble(&s.with_seed(43), &natural()).unwrap();
        assert_ne!(a.paths[0].positions, c.paths[0].positions);
        assert_ne!(a.paths[0].positions, a.paths[1].positions);
    }

    #[test]
    fn diffusion_recovered() {
        let e = sample_wiener_ensemble(&spec(200, 500, 0.01, 0.0), &natural()).unwrap();
        let r = estimate_diffusion(&e).unwrap();
        assert!(r.within_sigma(3.0), "{r:?}");
    }

    #[test]
    fn diffusion_subtracts_drift() {
        let e = sample_wiener_ensemble(&spec(50, 200, 0.01, 3.0), &natural()).unwrap();
        assert!(estimate_diffusion(&e).unwrap().within_sigma(4.0));
    }

    #[test]
    fn zero_path_zero_diffusion() {
        let p = Path::new(0.01, vec![0.0; 1001], 0.0).unwrap();
        let e = PathEnsemble::from_paths(vec![p], natural(), 0).unwrap();
        assert_eq!(estimate_diffusion(&e).unwrap().estimate, 0.0);
    }

    #[test]
    fn diffusion_scales_and_translates() {
        let e = sample_wiener_ensemble(&spec(4, 400, 0.01, 0.0), &natural()).unwrap();
        let base = estimate_diffusion(&e).unwrap().estimate;
        let mut scaled = e.clone();
        scaled.paths.iter_mut().for_each(|p| p.positions.iter_mut().for_each(|x| *x *= 2.0));
        assert_eq!(estimate_diffusion(&scaled).unwrap().estimate, 4.0 * base);
        let mut shifted = e.clone();
        shifted.paths.iter_mut().for_each(|p| p.positions.iter_mut().for_each(|x| *x += 3.25));
        let moved = estimate_diffusion(&shifted).unwrap().estimate;
        assert!((moved - base).abs() < 1e-12 * base);
    }

    #[test]
    fn too_few_increments_rejected() {
        let e = sample_wiener_ensemble(&spec(1, 10, 0.01, 0.0), &natural()).unwrap();
        assert!(estimate_diffusion(&e).is_err());
    }

    #[test]
    fn heat_kernel_second_moment_gives_d() {
        let grid = Grid1D::symmetric(15.0, 0.02).unwrap();
        let v = grid.points().iter().map(|x| heat_kernel(*x, 1.0, 0.5).unwrap()).collect();
        let d = DensityField::new(grid, v).unwrap();
        assert!((diffusion_from_density(&d, 1.0) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn ballistic_velocities_agree() {
        let p = Path::ballistic(0.25, 8, 2.0).unwrap();
        for n in 1..8 {
            assert_eq!(forward_backward_velocity(&p, n).unwrap(), (2.0, 2.0));
        }
        assert!(forward_backward_velocity(&p, 0).is_err());
        assert!(forward_backward_velocity(&p, 8).is_err());
    }

    #[test]
    fn wiener_velocity_gap() {
        let e = sample_wiener_ensemble(&spec(200, 500, 0.01, 0.0), &natural()).unwrap();
        let g = velocity_gap_statistics(&e).unwrap();
        assert!(g.half_gap_rms.within_sigma(3.0), "{g:?}");
        assert!(g.correlation.within_sigma(3.0), "{g:?}");
        let gap = nondifferentiability_gap(&e).unwrap();
        assert!(gap.within_sigma(3.0), "{gap:?}");
        assert!((gap.claim.unwrap() - 200f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn smooth_path_has_no_gap() {
        let p = Path::ballistic(0.01, 2000, 1.5).unwrap();
        let e = PathEnsemble::from_paths(vec![p], natural(), 0).unwrap();
        assert!(nondifferentiability_gap(&e).unwrap().estimate < 1e-12);
    }

    #[test]
    fn gap_scales_as_inverse_sqrt_eps() {
        let sweep = gap_sweep(&[0.04, 0.02, 0.01, 0.005], &spec(200, 500, 0.01, 0.0), &natural()).unwrap();
        assert!((sweep.fit.slope + 0.5).abs() < 0.05, "{:?}", sweep.fit);
    }

    #[test]
    fn osmotic_speed_forms() {
        let e = sample_wiener_ensemble(&spec(200, 500, 0.01, 0.0), &natural()).unwrap();
        let o = osmotic_speed(&e).unwrap();
        assert!(o.diffusion_form.within_sigma(3.0), "{o:?}");
        assert_eq!(o.action_form.claim, Some(50.0));
        let e2 = sample_wiener_ensemble(&spec(200, 500, 0.02, 0.0).with_seed(7), &natural()).unwrap();
        let o2 = osmotic_speed(&e2).unwrap();
        let ratio_err = (o.diffusion_form.estimate - 2.0 * o2.diffusion_form.estimate).abs();
        let se = (o.diffusion_form.stderr.powi(2) + 4.0 * o2.diffusion_form.stderr.powi(2)).sqrt();
        assert!(ratio_err < 3.0 * se);
    }

    #[test]
    fn ballistic_kinetic_estimators_agree() {
        let p = Path::ballistic(0.5, 2000, 1.0).unwrap();
        let e = PathEnsemble::from_paths(vec![p], natural(), 0).unwrap();
        let k = kinetic_energy_estimators(&e).unwrap();
        assert_eq!(k.naive.estimate, 0.5);
        assert_eq!(k.symmetric.estimate, 0.5);
    }

    #[test]
    fn kinetic_sweep_separates_estimators() {
        let s = spec(200, 500, 0.01, 1.0);
        let sweep = kinetic_sweep(&[0.04, 0.02, 0.01, 0.005], &s, &natural()).unwrap();
        let md = 0.5;
        assert!((sweep.naive_fit.slope - md).abs() < 0.1 * md, "{:?}", sweep.naive_fit);
        assert!(sweep.symmetric_fit.slope.abs() < 0.05 * md, "{:?}", sweep.symmetric_fit);
        for k in &sweep.estimates {
            assert!(k.symmetric.within_sigma(3.0), "{k:?}");
        }
        assert_eq!(sweep.rows().count(), 4);
    }

    #[test]
    fn identity_holds_per_sample() {
        let e = sample_wiener_ensemble(&spec(20, 500, 0.01, 1.0), &natural()).unwrap();
        assert!(velocity_identity_residual(&e) < 1e-12);
    }

    #[test]
    fn uncertainty_chain_values() {
        let c = uncertainty_products(0.1, &natural()).unwrap();
        assert!((c.mean_dp2 - 5.0).abs() < 1e-12);
        assert!((c.mean_dx2 - 0.05).abs() < 1e-12);
        assert!((c.xp_product - 0.25).abs() < 1e-12);
        assert!((c.et_product - 1.0 / 16.0).abs() < 1e-12);
        assert!((c.et_discrepancy_factor - 4.0).abs() < 1e-12);
        let c2 = uncertainty_products(0.01, &natural()).unwrap();
        assert!((c2.xp_product - 0.25).abs() < 1e-12);
        assert!(uncertainty_products(0.0, &natural()).is_err());
    }

    #[test]
    fn unbiased_increment_variance() {
        let estimates: Vec<f64> = (0..100)
            .map(|i| {
                let s = spec(10, 1000, 0.01, 0.0).with_seed(sweep_seed(9, i));
                increment_variance(&sample_wiener_ensemble(&s, &natural()).unwrap()).estimate
            })
            .collect();
        let s = SampleStats::from_iid(&estimates);
        assert!((s.mean - 0.01).abs() < 0.5 * s.spread, "{s:?}");
    }

    proptest! {
        #[test]
        fn complex_velocity_product_is_real(v in -1e3f64..1e3, u in -1e3f64..1e3, m in 0.1f64..10.0) {
            let z = complex_velocity_energy(m, v, u);
            prop_assert_eq!(z.im, 0.0);
            prop_assert_eq!(z.re, 0.5 * m * (v * v + u * u));
        }

        #[test]
        fn xp_product_is_eps_independent(eps in 1e-4f64..1e-1, h in 0.1f64..3.0, m in 0.1f64..3.0) {
            let c = uncertainty_products(eps, &PhysicsConstants::new(h, m).unwrap()).unwrap();
            prop_assert!((c.xp_product - h * h / 4.0).abs() <= 1e-12 * h * h);
        }
    }
}
