use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::PhysicsConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Cylindrical,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dispersions {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Dispersions {
    pub fn sum(&self) -> f64 {
        self.x + self.y + self.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularClaims {
    pub dispersions: Dispersions,
    pub l2_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMomentumReport {
    pub l: u32,
    pub m: Option<i32>,
    pub dispersions: Dispersions,
    pub lz_mean: f64,
    pub l2_total: f64,
    pub claims: AngularClaims,
    /// claimed ⟨L²⟩ minus the computed one
    pub l2_gap: f64,
    /// ⟨ΔLx²⟩⟨ΔLy²⟩ − (ħ²/4)⟨Lz⟩²
    pub w2_margin: f64,
}

/// Dispersions of the minimal state with ⟨Lz⟩ = lħ: the transverse pair
/// saturates ⟨ΔLx²⟩⟨ΔLy²⟩ = (ħ²/4)⟨Lz⟩², the axial one equals ħ²/4.
fn cylindrical_claims(l: u32, hbar: f64) -> AngularClaims {
    let (lf, h2) = (l as f64, hbar * hbar);
    let dispersions = Dispersions { x: lf * h2 / 2.0, y: lf * h2 / 2.0, z: h2 / 4.0 };
    AngularClaims { dispersions, l2_total: (lf * hbar + hbar / 2.0).powi(2) }
}

pub fn minimal_dispersion_solver(lz_mean: f64, symmetry: Symmetry, constants: &PhysicsConstants) -> Result<AngularMomentumReport> {
    let hbar = constants.hbar();
    let ratio = lz_mean / hbar;
    if !ratio.is_finite() || (ratio - ratio.round()).abs() > 1e-12 {
        return domain(format!("⟨Lz⟩/ħ = {ratio} is not an integer"));
    }
    let l = ratio.round().abs() as u32;
    let claims = match symmetry {
        Symmetry::Cylindrical => cylindrical_claims(l, hbar),
        Symmetry::Spherical => {
            if l != 0 {
                return domain("the spherical minimal state has ⟨Lz⟩ = 0");
            }
            let q = hbar * hbar / 4.0;
            AngularClaims { dispersions: Dispersions { x: q, y: q, z: q }, l2_total: 3.0 * q }
        }
    };
    let d = claims.dispersions;
    let l2_total = lz_mean * lz_mean + d.sum();
    Ok(AngularMomentumReport {
        l,
        m: None,
        dispersions: d,
        lz_mean,
        l2_total,
        claims,
        l2_gap: claims.l2_total - l2_total,
        w2_margin: d.x * d.y - hbar * hbar / 4.0 * lz_mean * lz_mean,
    })
}

/// Lx, Ly, Lz in the |l, m⟩ basis ordered m = l, l−1, …, −l.
pub fn angular_matrices(l: u32, hbar: f64) -> [DMatrix<Complex64>; 3] {
    let dim = 2 * l as usize + 1;
    let lf = l as f64;
    let m_of = |i: usize| lf - i as f64;
    let mut raise = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 1..dim {
        let m = m_of(i);
        raise[(i - 1, i)] = Complex64::from(hbar * (lf * (lf + 1.0) - m * (m + 1.0)).sqrt());
    }
    let lower = raise.adjoint();
    let lx = (&raise + &lower) * Complex64::from(0.5);
    let ly = (&raise - &lower) * Complex64::new(0.0, -0.5);
    let lz = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| Complex64::from(hbar * m_of(i))));
    [lx, ly, lz]
}

pub fn angular_momentum_oracle(l: u32, m: i32, constants: &PhysicsConstants) -> Result<AngularMomentumReport> {
    if m.unsigned_abs() > l {
        return domain(format!("|m| = {} exceeds l = {l}", m.unsigned_abs()));
    }
    let hbar = constants.hbar();
    let [lx, ly, lz] = angular_matrices(l, hbar);
    let dim = 2 * l as usize + 1;
    let mut state = DVector::<Complex64>::zeros(dim);
    state[(l as i32 - m) as usize] = Complex64::from(1.0);
    let expect = |op: &DMatrix<Complex64>| state.dotc(&(op * &state)).re;
    let dispersion = |op: &DMatrix<Complex64>| expect(&(op * op)) - expect(op).powi(2);
    let dispersions = Dispersions { x: dispersion(&lx), y: dispersion(&ly), z: dispersion(&lz) };
    let l2 = &lx * &lx + &ly * &ly + &lz * &lz;
    let lz_mean = expect(&lz);
    let l2_total = expect(&l2);
    let claims = cylindrical_claims(l, hbar);
    Ok(AngularMomentumReport {
        l,
        m: Some(m),
        dispersions,
        lz_mean,
        l2_total,
        claims,
        l2_gap: claims.l2_total - l2_total,
        w2_margin: dispersions.x * dispersions.y - hbar * hbar / 4.0 * lz_mean * lz_mean,
    })
}
