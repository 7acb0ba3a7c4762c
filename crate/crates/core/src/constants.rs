//! Physical constants shared by every module.
//!
//! Natural units (ħ = m = 1) are the default. The diffusivity is always
//! derived as ħ/(2m); it is never stored.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Sign of the phase in the free propagator exp(±i m x² / 2ħt).
///
/// `Plus` makes kernel propagation solve iħ∂ψ/∂t = −(ħ²/2m)Δψ. `Minus` is the
/// complex conjugate convention (time-reversed evolution).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseConvention {
    #[default]
    Plus,
    Minus,
}

impl PhaseConvention {
    pub fn sign(self) -> f64 {
        match self {
            PhaseConvention::Plus => 1.0,
            PhaseConvention::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for PhaseConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "plus" | "+" => Ok(PhaseConvention::Plus),
            "minus" | "-" => Ok(PhaseConvention::Minus),
            other => Err(format!("unknown phase convention '{other}' (expected plus|minus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConstants {
    hbar: f64,
    mass: f64,
    #[serde(default)]
    phase: PhaseConvention,
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, phase: PhaseConvention::Plus }
    }
}

impl PhysicsConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return domain(format!("hbar must be positive and finite, got {hbar}"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return domain(format!("mass must be positive and finite, got {mass}"));
        }
        Ok(Self { hbar, mass, phase: PhaseConvention::Plus })
    }

    pub fn natural() -> Self {
        Self::default()
    }

    pub fn with_phase(mut self, phase: PhaseConvention) -> Self {
        self.phase = phase;
        self
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn phase(&self) -> PhaseConvention {
        self.phase
    }

    /// D = ħ/(2m).
    pub fn diffusivity(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }

    /// Constants whose diffusivity equals `d` at the given mass.
    pub fn with_diffusivity(d: f64, mass: f64) -> Result<Self> {
        if !(d > 0.0) {
            return domain(format!("diffusivity must be positive, got {d}"));
        }
        Self::new(2.0 * mass * d, mass)
    }
}
