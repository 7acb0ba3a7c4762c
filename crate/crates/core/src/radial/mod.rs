//! Radial eigenproblems in spherical and cylindrical geometry, the map
//! between them, and angular-momentum dispersion algebra.

pub mod angular;
pub mod eigen;
pub mod mapping;
pub mod numerov;

pub use angular::{angular_momentum_oracle, minimal_dispersion_solver, AngularMomentumReport, Symmetry};
pub use eigen::{
    numerov_eigensolve, radial_moments, radial_momentum_floor, CylindricalIndex, EigenSolution, Geometry,
    MomentumFloor, RadialMoments, RadialProblem,
};
pub use mapping::{separation_check, separation_residual_at, spherical_to_cylindrical_map, MappedField, SeparationReport};
pub use numerov::{numerov_1d_eigenstate, Eigenstate1D};
