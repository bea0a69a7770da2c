//! Blaschke–Minkowski homomorphisms via zonal spherical convolution.
//!
//! The crate computes projection, sine-transform, intersection and centroid
//! bodies of polytopes and star bodies in ℝ³, their mixed and polar
//! versions, (dual) mixed volumes and quermassintegrals, reconstructs
//! polytopes from surface area measures, and checks the volume
//! inequalities satisfied by these operators on random inputs.

pub mod bodies;
pub mod cli;
pub mod error;
pub mod hull;
pub mod inequalities;
pub mod measures;
pub mod minkowski_solver;
pub mod operators;
pub mod sphere;
pub mod vec3;
pub mod volumes;

pub use bodies::{Polytope, StarBody, SupportBody};
pub use error::{GeomError, Result};
pub use measures::AtomicMeasure;
pub use operators::{BMHomomorphism, RadialBMHomomorphism};
pub use sphere::{build_grid, SphericalGrid, ZonalKernel};
