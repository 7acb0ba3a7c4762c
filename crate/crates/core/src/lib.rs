//! Numerical laboratory comparing classical diffusion with quantum
//! propagation: kernels and their composition, stochastic path estimators,
//! time-slice evolution, quasiclassical wavefunctions and radial solvers.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod potential;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod spectral;
pub mod stats;
pub mod stochastic_paths;
pub mod timeslice;
pub mod wkb;

pub use num_complex;
pub use constants::{PhaseConvention, PhysicsConstants};
pub use error::{Error, Result};
pub use grid::{DensityField, Grid1D, WaveFunction};
pub use potential::PotentialSpec;
pub use report::{ExperimentReport, Gate};
