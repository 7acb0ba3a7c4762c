//! External potentials U(x) (or U(r) for radial problems).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Free,
    /// k x² / 2
    Harmonic { k: f64 },
    /// `height` on |x| < width/2, zero elsewhere.
    Barrier { height: f64, width: f64 },
    /// −charge / √(x² + softening²)
    CoulombRegularized { charge: f64, softening: f64 },
    /// −charge / |r|, for radial problems where r > 0.
    Coulomb { charge: f64 },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Harmonic { k } if !(k > 0.0) => domain(format!("harmonic k must be > 0, got {k}")),
            Self::Barrier { width, height } if !(width > 0.0) || !height.is_finite() => {
                domain(format!("barrier needs width > 0 and finite height, got {width}, {height}"))
            }
            Self::CoulombRegularized { softening, .. } if !(softening > 0.0) => {
                domain(format!("softening must be > 0, got {softening}"))
            }
            Self::CoulombRegularized { charge, .. } | Self::Coulomb { charge } if !charge.is_finite() => {
                domain("charge must be finite")
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Free => 0.0,
            Self::Harmonic { k } => 0.5 * k * x * x,
            Self::Barrier { height, width } => {
                if x.abs() < 0.5 * width {
                    height
                } else {
                    0.0
                }
            }
            Self::CoulombRegularized { charge, softening } => -charge / (x * x + softening * softening).sqrt(),
            Self::Coulomb { charge } => -charge / x.abs(),
        }
    }

    /// Average of U over the cell [x − h/2, x + h/2] for the barrier (so a
    /// grid sees its true width), point value for the continuous potentials.
    pub fn cell_value(&self, x: f64, h: f64) -> f64 {
        match *self {
            Self::Barrier { height, width } if h > 0.0 => {
                let lo = (x - 0.5 * h).max(-0.5 * width);
                let hi = (x + 0.5 * h).min(0.5 * width);
                height * (hi - lo).max(0.0) / h
            }
            _ => self.eval(x),
        }
    }

    /// Derivative dU/dx where it exists (zero on the flat parts of a barrier).
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Self::Free | Self::Barrier { .. } => 0.0,
            Self::Harmonic { k } => k * x,
            Self::CoulombRegularized { charge, softening } => {
                charge * x / (x * x + softening * softening).powf(1.5)
            }
            Self::Coulomb { charge } => charge * x.signum() / (x * x),
        }
    }

    /// Whether U grows without bound at large |x|.
    pub fn is_confining(&self) -> bool {
        matches!(self, Self::Harmonic { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Free => "free",
            Self::Harmonic { .. } => "harmonic",
            Self::Barrier { .. } => "barrier",
            Self::CoulombRegularized { .. } => "coulomb_regularized",
            Self::Coulomb { .. } => "coulomb",
        }
    }

    pub fn sample(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|x| self.eval(*x)).collect()
    }
}
