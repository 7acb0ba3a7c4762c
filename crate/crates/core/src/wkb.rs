//! Quasiclassical wavefunctions: local momentum, action integrals, the
//! oscillating and decaying branches, and an energy decomposition check on
//! numerically exact eigenstates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{Grid1D, WaveFunction};
use crate::potential::PotentialSpec;
use crate::quadrature::sqrt_endpoint;
use crate::spectral;
use crate::PhysicsConstants;

const ACTION_PANELS: usize = 8;
pub const DEFAULT_GUARD_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Allowed,
    /// p is imaginary here; `value` holds |p|.
    Forbidden,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMomentum {
    pub value: f64,
    pub regime: Regime,
}

/// U == E counts as allowed with p = 0.
pub fn local_momentum(energy: f64, potential: &PotentialSpec, x: f64, c: &PhysicsConstants) -> LocalMomentum {
    let gap = energy - potential.eval(x);
    let value = (2.0 * c.mass() * gap.abs()).sqrt();
    let regime = if gap >= 0.0 { Regime::Allowed } else { Regime::Forbidden };
    LocalMomentum { value, regime }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurningPoints {
    pub energy: f64,
    pub points: Vec<f64>,
}

fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of U − E between consecutive grid nodes, refined by bisection.
pub fn turning_points(energy: f64, potential: &PotentialSpec, grid: &Grid1D) -> TurningPoints {
    let f = |x: f64| potential.eval(x) - energy;
    let mut points = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid.x(i), grid.x(i + 1));
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            points.push(a);
        } else if fa * fb < 0.0 {
            points.push(bisect_root(f, a, b));
        }
    }
    if f(grid.x_max()) == 0.0 {
        points.push(grid.x_max());
    }
    TurningPoints { energy, points }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionIntegral {
    pub regime: Regime,
    /// ∫|p| dx over the interval
    pub s_real: f64,
    pub points: Vec<f64>,
    /// ½·ln|p| at `points`
    pub amplitude_log: Vec<f64>,
}

/// ∫|p|dx over [a, b], which must lie in a single regime.
pub fn action_integrals(
    energy: f64,
    potential: &PotentialSpec,
    interval: (f64, f64),
    n_quad: usize,
    c: &PhysicsConstants,
) -> Result<ActionIntegral> {
    let (a, b) = interval;
    if !(a <= b) || n_quad == 0 {
        return domain(format!("invalid action interval [{a}, {b}] with {n_quad} panels"));
    }
    let f = |x: f64| potential.eval(x) - energy;
    let probes = 64 * n_quad;
    let mut sign = 0.0f64;
    for k in 1..probes {
        let x = a + (b - a) * k as f64 / probes as f64;
        let s = f(x).signum();
        if f(x) != 0.0 {
            if sign != 0.0 && s != sign {
                let prev = a + (b - a) * (k - 1) as f64 / probes as f64;
                return Err(Error::StraddlesTurningPoint { a, b, turning_point: bisect_root(f, prev, x) });
            }
            sign = s;
        }
    }
    let regime = if sign > 0.0 { Regime::Forbidden } else { Regime::Allowed };
    let p = |x: f64| local_momentum(energy, potential, x, c).value;
    let s_real = sqrt_endpoint(p, a, b, n_quad);
    let points: Vec<f64> =
        if n_quad == 1 || a == b { vec![a] } else { (0..=n_quad).map(|k| a + (b - a) * k as f64 / n_quad as f64).collect() };
    let amplitude_log = points.iter().map(|&x| 0.5 * p(x).ln()).collect();
    Ok(ActionIntegral { regime, s_real, points, amplitude_log })
}

/// exp(−½·ln p), the amplitude built from the logarithmic form.
pub fn amplitude_factor(amplitude_log: f64) -> f64 {
    (-amplitude_log).exp()
}

/// Stretch of x between turning points (or grid ends) in a single regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WkbRegion {
    pub regime: Regime,
    pub start: f64,
    pub end: f64,
    /// where the action is measured from
    pub reference: f64,
    pub bounded_left: bool,
    pub bounded_right: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WkbBranch {
    pub c1: Complex64,
    pub c2: Complex64,
}

fn regions(energy: f64, potential: &PotentialSpec, grid: &Grid1D, tps: &TurningPoints) -> Vec<WkbRegion> {
    let mut edges = vec![grid.x_min()];
    edges.extend(tps.points.iter().copied().filter(|&t| t > grid.x_min() && t < grid.x_max()));
    edges.push(grid.x_max());
    let n = edges.len() - 1;
    (0..n)
        .map(|k| {
            let (start, end) = (edges[k], edges[k + 1]);
            let regime = if potential.eval(0.5 * (start + end)) > energy { Regime::Forbidden } else { Regime::Allowed };
            let (bounded_left, bounded_right) = (k > 0, k + 1 < n);
            // decaying branches run away from the neighbouring allowed region
            let reference = match regime {
                Regime::Forbidden if !bounded_left && bounded_right => end,
                _ => start,
            };
            WkbRegion { regime, start, end, reference, bounded_left, bounded_right }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WkbSolution {
    pub energy: f64,
    pub turning_points: TurningPoints,
    pub regions: Vec<WkbRegion>,
    pub region_of: Vec<usize>,
    /// |S|/ħ from the region's reference point
    pub phase: Vec<f64>,
    pub momentum: Vec<f64>,
    /// true where the point is usable (outside every guard band)
    pub mask: Vec<bool>,
    pub values: Vec<Complex64>,
}

impl WkbSolution {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }
}

fn guard_width(regions: &[WkbRegion], fraction: f64) -> f64 {
    regions
        .iter()
        .filter(|r| r.regime == Regime::Allowed && r.bounded_left && r.bounded_right)
        .map(|r| fraction * 0.5 * (r.end - r.start))
        .fold(0.0, f64::max)
}

/// Local WKB data on the grid before amplitudes are applied.
fn wkb_basis(energy: f64, potential: &PotentialSpec, grid: &Grid1D, guard_fraction: f64, c: &PhysicsConstants) -> WkbSolution {
    let tps = turning_points(energy, potential, grid);
    let regions = regions(energy, potential, grid, &tps);
    let delta = guard_width(&regions, guard_fraction);
    let hbar = c.hbar();
    let xs = grid.points();
    let region_of: Vec<usize> = xs.iter().map(|&x| regions.iter().position(|r| x <= r.end).unwrap_or(regions.len() - 1)).collect();
    let phase: Vec<f64> = xs
        .par_iter()
        .zip(&region_of)
        .map(|(&x, &k)| {
            let r = &regions[k];
            let p = |y: f64| local_momentum(energy, potential, y, c).value;
            let (a, b) = if x < r.reference { (x, r.reference) } else { (r.reference, x) };
            sqrt_endpoint(p, a, b, ACTION_PANELS) / hbar
        })
        .collect();
    let momentum: Vec<f64> = xs.iter().map(|&x| local_momentum(energy, potential, x, c).value).collect();
    let mask = xs
        .iter()
        .zip(&momentum)
        .map(|(&x, &p)| p > 0.0 && tps.points.iter().all(|t| (x - t).abs() > delta))
        .collect();
    let values = vec![Complex64::new(0.0, 0.0); xs.len()];
    WkbSolution { energy, turning_points: tps, regions, region_of, phase, momentum, mask, values }
}

fn assemble(mut sol: WkbSolution, branches: &[WkbBranch]) -> Result<WkbSolution> {
    if branches.len() != sol.regions.len() {
        return domain(format!("{} amplitude pairs for {} regions", branches.len(), sol.regions.len()));
    }
    for i in 0..sol.values.len() {
        let k = sol.region_of[i];
        let (s, p) = (sol.phase[i], sol.momentum[i]);
        let amp = p.powf(-0.5);
        sol.values[i] = if !sol.mask[i] {
            Complex64::new(0.0, 0.0)
        } else {
            match sol.regions[k].regime {
                Regime::Allowed => {
                    let e = Complex64::from_polar(1.0, s);
                    (branches[k].c1 * e + branches[k].c2 * e.conj()) * amp
                }
                Regime::Forbidden => branches[k].c1 * (-s).exp() * amp,
            }
        };
    }
    Ok(sol)
}

/// Unnormalized WKB wavefunction with one amplitude pair per region (in
/// order of increasing x). Forbidden regions use only c1. Points within the
/// guard band (a fraction of the half-width of the bounded allowed region)
/// around any turning point are masked to zero.
pub fn wkb_wavefunction(
    energy: f64,
    potential: &PotentialSpec,
    grid: &Grid1D,
    branches: &[WkbBranch],
    guard_fraction: f64,
    c: &PhysicsConstants,
) -> Result<WkbSolution> {
    potential.validate()?;
    assemble(wkb_basis(energy, potential, grid, guard_fraction, c), branches)
}

/// Least-squares amplitudes matching `target` on the unmasked points of
/// each region, returned together with the assembled solution.
pub fn fit_wkb(
    energy: f64,
    potential: &PotentialSpec,
    target: &WaveFunction,
    guard_fraction: f64,
    c: &PhysicsConstants,
) -> Result<(Vec<WkbBranch>, WkbSolution)> {
    potential.validate()?;
    let grid = *target.grid();
    let basis = wkb_basis(energy, potential, &grid, guard_fraction, c);
    let t = target.values();
    let branches = (0..basis.regions.len())
        .map(|k| {
            let idx: Vec<usize> = (0..t.len()).filter(|&i| basis.region_of[i] == k && basis.mask[i]).collect();
            let amp = |i: usize| basis.momentum[i].powf(-0.5);
            match basis.regions[k].regime {
                Regime::Allowed => {
                    let (mut cc, mut ss, mut cs) = (0.0, 0.0, 0.0);
                    let (mut tc, mut ts) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                    for &i in &idx {
                        let (c_i, s_i) = (basis.phase[i].cos() * amp(i), basis.phase[i].sin() * amp(i));
                        cc += c_i * c_i;
                        ss += s_i * s_i;
                        cs += c_i * s_i;
                        tc += t[i] * c_i;
                        ts += t[i] * s_i;
                    }
                    let det = cc * ss - cs * cs;
                    if det.abs() < 1e-300 {
                        return WkbBranch { c1: 0.0.into(), c2: 0.0.into() };
                    }
                    let a = (tc * ss - ts * cs) / det;
                    let b = (ts * cc - tc * cs) / det;
                    let i = Complex64::i();
                    WkbBranch { c1: (a - i * b) * 0.5, c2: (a + i * b) * 0.5 }
                }
                Regime::Forbidden => {
                    let (mut ee, mut te) = (0.0, Complex64::new(0.0, 0.0));
                    for &i in &idx {
                        let e_i = (-basis.phase[i]).exp() * amp(i);
                        ee += e_i * e_i;
                        te += t[i] * e_i;
                    }
                    let c1 = if ee > 0.0 { te / ee } else { 0.0.into() };
                    WkbBranch { c1, c2: 0.0.into() }
                }
            }
        })
        .collect::<Vec<_>>();
    let sol = assemble(basis, &branches)?;
    Ok((branches, sol))
}

/// ‖ψ_wkb − ψ‖ / ‖ψ‖ over unmasked points.
pub fn masked_relative_error(sol: &WkbSolution, target: &WaveFunction) -> Result<f64> {
    if sol.values.len() != target.values().len() {
        return Err(Error::GridMismatch("WKB and reference lengths differ".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for ((w, t), m) in sol.values.iter().zip(target.values()).zip(&sol.mask) {
        if *m {
            num += (w - t).norm_sqr();
            den += t.norm_sqr();
        }
    }
    if den == 0.0 {
        return domain("reference vanishes on the unmasked region");
    }
    Ok((num / den).sqrt())
}

/// d ln ψ/dx of the decaying branch to the right of a turning point:
/// −|p|/ħ − |p|′/(2|p|).
pub fn forbidden_log_derivative(energy: f64, potential: &PotentialSpec, x: f64, c: &PhysicsConstants) -> Result<f64> {
    let p = local_momentum(energy, potential, x, c);
    if p.regime != Regime::Forbidden || p.value == 0.0 {
        return domain(format!("x = {x} is not strictly forbidden"));
    }
    let dp = c.mass() * potential.derivative(x) / p.value;
    Ok(-p.value / c.hbar() - dp / (2.0 * p.value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDecomposition {
    pub energy: f64,
    pub p_mean: f64,
    pub p2_mean: f64,
    pub dp2: f64,
    /// ⟨|p|⟩, reported but not asserted on
    pub p_abs_mean: f64,
    pub u_mean: f64,
    pub kinetic: f64,
    /// E − p̄²/2m − ⟨(δp)²⟩/2m − ⟨U⟩
    pub residual: f64,
}

/// Momentum moments from the discrete Fourier transform, ⟨U⟩ by quadrature.
pub fn energy_decomposition_check(
    eigenstate: &WaveFunction,
    energy: f64,
    potential: &PotentialSpec,
    c: &PhysicsConstants,
) -> EnergyDecomposition {
    let grid = eigenstate.grid();
    let mut buf = eigenstate.values().to_vec();
    spectral::forward(&mut buf);
    let k = spectral::wavenumbers(buf.len(), grid.dx());
    let hbar = c.hbar();
    let weights: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    let moment = |f: &dyn Fn(f64) -> f64| k.iter().zip(&weights).map(|(k, w)| f(hbar * k) * w).sum::<f64>() / total;
    let p_mean = moment(&|p| p);
    let p2_mean = moment(&|p| p * p);
    let p_abs_mean = moment(&|p| p.abs());
    let u_mean = eigenstate.expectation(|x| potential.eval(x)) / eigenstate.norm_sqr();
    let dp2 = p2_mean - p_mean * p_mean;
    let kinetic = (p_mean * p_mean + dp2) / (2.0 * c.mass());
    EnergyDecomposition { energy, p_mean, p2_mean, dp2, p_abs_mean, u_mean, kinetic, residual: energy - kinetic - u_mean }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::numerov_1d_eigenstate;
    use std::f64::consts::PI;

    fn c() -> PhysicsConstants {
        PhysicsConstants::natural()
    }

    const HARMONIC: PotentialSpec = PotentialSpec::Harmonic { k: 1.0 };

    #[test]
    fn momentum_values() {
        let p = local_momentum(0.5, &HARMONIC, 0.0, &c());
        assert_eq!((p.value, p.regime), (1.0, Regime::Allowed));
        assert_eq!(local_momentum(0.5, &HARMONIC, 1.0, &c()).value, 0.0);
        let f = local_momentum(0.5, &HARMONIC, 2.0, &c());
        assert!((f.value - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.regime, Regime::Forbidden);
    }

    #[test]
    fn oscillator_action() {
        let a = action_integrals(0.5, &HARMONIC, (-1.0, 1.0), 8, &c()).unwrap();
        assert!((a.s_real - PI / 2.0).abs() < 1e-12);
        assert_eq!(a.regime, Regime::Allowed);
        assert_eq!(action_integrals(0.5, &HARMONIC, (0.3, 0.3), 8, &c()).unwrap().s_real, 0.0);
    }

    #[test]
    fn forbidden_tail_grows() {
        let tails: Vec<f64> =
            [1.5, 2.0, 2.5, 3.0].iter().map(|&b| action_integrals(0.5, &HARMONIC, (1.0, b), 8, &c()).unwrap().s_real).collect();
        assert!(tails[0] > 0.0 && tails.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn straddling_rejected() {
        match action_integrals(0.5, &HARMONIC, (0.0, 2.0), 8, &c()) {
            Err(Error::StraddlesTurningPoint { turning_point, .. }) => assert!((turning_point - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn amplitude_identity() {
        let a = action_integrals(0.5, &HARMONIC, (-0.99, 0.99), 50, &c()).unwrap();
        for (x, l) in a.points.iter().zip(&a.amplitude_log) {
            let p = local_momentum(0.5, &HARMONIC, *x, &c()).value;
            assert!((amplitude_factor(*l) - p.powf(-0.5)).abs() <= 1e-12 * p.powf(-0.5));
        }
    }

    #[test]
    fn plane_wave_limit() {
        let grid = Grid1D::new(-5.0, 5.0, 201).unwrap();
        let e = 2.0;
        let branch = WkbBranch { c1: 1.0.into(), c2: 0.0.into() };
        let sol = wkb_wavefunction(e, &PotentialSpec::Free, &grid, &[branch], 0.1, &c()).unwrap();
        let p = 2.0f64;
        assert_eq!(sol.masked_count(), 0);
        for (i, z) in sol.values.iter().enumerate() {
            let exact = Complex64::from_polar(p.powf(-0.5), p * (grid.x(i) + 5.0));
            assert!((z - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn decaying_branch_log_derivative() {
        let grid = Grid1D::new(-4.0, 4.0, 8001).unwrap();
        let branches = vec![
            WkbBranch { c1: 1.0.into(), c2: 0.0.into() },
            WkbBranch { c1: 1.0.into(), c2: 0.0.into() },
            WkbBranch { c1: 1.0.into(), c2: 0.0.into() },
        ];
        let sol = wkb_wavefunction(0.5, &HARMONIC, &grid, &branches, 0.1, &c()).unwrap();
        for x in [2.0, 2.5, 3.0] {
            let i = grid.nearest(x);
            let numeric = (sol.values[i + 1].re.ln() - sol.values[i - 1].re.ln()) / (2.0 * grid.dx());
            let analytic = forbidden_log_derivative(0.5, &HARMONIC, grid.x(i), &c()).unwrap();
            assert!((numeric - analytic).abs() < 1e-6, "{numeric} {analytic}");
        }
        assert!(forbidden_log_derivative(0.5, &HARMONIC, 0.0, &c()).is_err());
    }

    fn wkb_error(n: usize) -> f64 {
        let s = numerov_1d_eigenstate(&HARMONIC, n, 12.0, 0.005, &c()).unwrap();
        let (branches, sol) = fit_wkb(s.energy, &HARMONIC, &s.state, DEFAULT_GUARD_FRACTION, &c()).unwrap();
        assert!(branches.iter().zip(&sol.regions).all(|(b, r)| r.regime == Regime::Allowed || b.c2 == 0.0.into()));
        masked_relative_error(&sol, &s.state).unwrap()
    }

    #[test]
    fn harmonic_n10_within_two_percent() {
        let e = wkb_error(10);
        assert!(e < 0.02, "{e}");
    }

    #[test]
    fn error_falls_with_quantum_number() {
        assert!(wkb_error(20) < wkb_error(5));
    }

    #[test]
    fn density_follows_classical() {
        let n = 20;
        let s = numerov_1d_eigenstate(&HARMONIC, n, 12.0, 0.005, &c()).unwrap();
        let (_, sol) = fit_wkb(s.energy, &HARMONIC, &s.state, DEFAULT_GUARD_FRACTION, &c()).unwrap();
        let grid = s.state.grid();
        let amp2 = 2.0 * s.energy;
        for x0 in [0.0, 2.0, -3.0] {
            let p0 = local_momentum(s.energy, &HARMONIC, x0, &c()).value;
            let half = PI / p0;
            let (lo, hi) = (grid.nearest(x0 - half), grid.nearest(x0 + half));
            let avg = (lo..=hi).map(|i| sol.values[i].norm_sqr()).sum::<f64>() / (hi - lo + 1) as f64;
            let classical = 1.0 / (PI * (amp2 - x0 * x0).sqrt());
            assert!((avg / classical - 1.0).abs() < 0.05, "{x0}: {avg} {classical}");
        }
    }

    #[test]
    fn ground_state_decomposition() {
        let s = numerov_1d_eigenstate(&HARMONIC, 0, 12.0, 0.005, &c()).unwrap();
        let d = energy_decomposition_check(&s.state, s.energy, &HARMONIC, &c());
        assert!(d.p_mean.abs() < 1e-10);
        assert!((d.dp2 / 2.0 - 0.25).abs() < 1e-8);
        assert!((d.u_mean - 0.25).abs() < 1e-8);
        assert!((d.energy - 0.5).abs() < 1e-8);
        assert!(d.residual.abs() < 1e-8, "{}", d.residual);
    }

    #[test]
    fn excited_decompositions() {
        for n in [1, 4, 10] {
            let s = numerov_1d_eigenstate(&HARMONIC, n, 12.0, 0.005, &c()).unwrap();
            let d = energy_decomposition_check(&s.state, s.energy, &HARMONIC, &c());
            assert!(d.residual.abs() < 1e-8, "{n}: {}", d.residual);
            assert!(d.p_abs_mean > 0.0);
        }
    }
}
