//! Numerov integration of y'' = g(x)·y on a uniform grid, node counting,
//! and bisection on the node count for bound states.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveFunction};
use crate::potential::PotentialSpec;
use crate::PhysicsConstants;

const RESCALE_ABOVE: f64 = 1e150;

/// Outward Numerov sweep from (y0, y1). Values are rescaled on the fly to
/// avoid overflow, so only shape and signs are meaningful.
pub fn numerov_sweep(g: &[f64], h: f64, y0: f64, y1: f64) -> Vec<f64> {
    let c = h * h / 12.0;
    let mut y = Vec::with_capacity(g.len());
    y.push(y0);
    y.push(y1);
    for n in 1..g.len() - 1 {
        let next = (2.0 * (1.0 + 5.0 * c * g[n]) * y[n] - (1.0 - c * g[n - 1]) * y[n - 1]) / (1.0 - c * g[n + 1]);
        y.push(next);
        if next.abs() > RESCALE_ABOVE {
            y.iter_mut().for_each(|v| *v /= RESCALE_ABOVE);
        }
    }
    y
}

pub fn count_sign_changes(y: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in y {
        if v != 0.0 {
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// Discrete residual of the Numerov relation divided by h², at interior
/// points 1..n−1 (an O(h⁴) approximation of y'' − g·y).
pub fn numerov_residual(y: &[f64], g: &[f64], h: f64) -> Vec<f64> {
    let c = h * h / 12.0;
    (1..y.len() - 1)
        .map(|n| {
            ((1.0 - c * g[n + 1]) * y[n + 1] - 2.0 * (1.0 + 5.0 * c * g[n]) * y[n] + (1.0 - c * g[n - 1]) * y[n - 1])
                / (h * h)
        })
        .collect()
}

/// How the outward sweep starts at the left end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftStart {
    /// y(x₀) = 0
    Dirichlet,
    /// Prescribed regular behaviour (y₀, y₁).
    Values(f64, f64),
}

impl LeftStart {
    fn values(self) -> (f64, f64) {
        match self {
            LeftStart::Dirichlet => (0.0, 1e-10),
            LeftStart::Values(a, b) => (a, b),
        }
    }
}

/// Bound state of y'' = g(x; E)·y with y = 0 at the right end and `start` at
/// the left, having exactly `nodes` interior sign changes.
pub struct BoundState {
    pub energy: f64,
    pub y: Vec<f64>,
    pub g: Vec<f64>,
}

pub fn solve_bound_state(
    g_of: impl Fn(f64) -> Vec<f64>,
    h: f64,
    start: LeftStart,
    nodes: usize,
    window: (f64, f64),
) -> Result<BoundState> {
    let (y0, y1) = start.values();
    let count = |e: f64| {
        let y = numerov_sweep(&g_of(e), h, y0, y1);
        count_sign_changes(&y[1..])
    };
    let (mut lo, mut hi) = window;
    let (n_lo, n_hi) = (count(lo), count(hi));
    if n_lo > nodes || n_hi <= nodes {
        return Err(Error::NoBracket {
            nodes,
            lo,
            hi,
            detail: format!("node counts at the window ends are {n_lo} and {n_hi}"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-14 * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        if count(mid) > nodes {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let energy = 0.5 * (lo + hi);
    let g = g_of(energy);
    let y = stitch(&g, h, y0, y1);
    Ok(BoundState { energy, y, g })
}

/// Outward sweep to the outermost classical turning point, inward sweep from
/// the right end, joined continuously there.
fn stitch(g: &[f64], h: f64, y0: f64, y1: f64) -> Vec<f64> {
    let n = g.len();
    let turning = (1..n - 1).rev().find(|&i| g[i] <= 0.0).unwrap_or(n / 2).clamp(2, n - 3);
    let out = numerov_sweep(&g[..=turning + 1], h, y0, y1);
    let rev_g: Vec<f64> = g[turning - 1..].iter().rev().copied().collect();
    let inward: Vec<f64> = numerov_sweep(&rev_g, h, 0.0, 1e-10).into_iter().rev().collect();
    let scale = out[turning] / inward[1];
    let mut y = out[..turning].to_vec();
    y.extend(inward[1..].iter().map(|v| v * scale));
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    y.iter_mut().for_each(|v| *v /= peak);
    y
}

/// A normalized 1D eigenstate on a uniform grid with Dirichlet ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenstate1D {
    pub energy: f64,
    pub nodes: usize,
    pub state: WaveFunction,
}

/// n-th bound state of −(ħ²/2m)ψ'' + Uψ = Eψ on [−half_width, half_width].
/// The sign is fixed so that the leftmost lobe is positive.
pub fn numerov_1d_eigenstate(
    potential: &PotentialSpec,
    n: usize,
    half_width: f64,
    h: f64,
    constants: &PhysicsConstants,
) -> Result<Eigenstate1D> {
    potential.validate()?;
    let grid = Grid1D::symmetric(half_width, h)?;
    let xs = grid.points();
    let u = potential.sample(&xs);
    let scale = 2.0 * constants.mass() / constants.hbar().powi(2);
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u[0].min(u[u.len() - 1]);
    let bs = solve_bound_state(
        |e| u.iter().map(|v| scale * (v - e)).collect(),
        grid.dx(),
        LeftStart::Dirichlet,
        n,
        (lo, hi),
    )?;
    let mut psi = WaveFunction::from_real(grid, &bs.y)?;
    psi.normalize()?;
    let peak = bs.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if bs.y.iter().find(|v| v.abs() > 1e-6 * peak).is_some_and(|v| *v < 0.0) {
        psi.values_mut().iter_mut().for_each(|z| *z = -*z);
    }
    Ok(Eigenstate1D { energy: bs.energy, nodes: count_sign_changes(&bs.y[1..bs.y.len() - 1]), state: psi })
}
