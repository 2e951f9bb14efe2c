//! Exterior magnetic scattering toolkit in two dimensions.
//!
//! The crate builds admissible vector potentials outside an obstacle
//! (cohomology basis, Coulomb, cone and transversal gauges), synthesizes the
//! high-velocity limits of the associated scattering operator, validates them
//! against a grid propagator, and runs the inverse pipelines that recover the
//! magnetic field, the electric potential, the obstacle fluxes modulo 2π and
//! the long-range part of the potential from that data.
//!
//! Layout follows the problem structure:
//! - [`geometry`]: obstacle, lines, convex cylinder sets and the direction
//!   obstruction set.
//! - [`fields`]: scalar field library (magnetic field B, electric potential V),
//!   fluxes and decay profiles.
//! - [`gauges`]: vector-potential constructors, gauge functions, long-range
//!   parts and class-membership checks.
//! - [`transforms`]: line phases, X-ray transforms, sinograms and the
//!   support-constrained SIRT inversion.
//! - [`scattering`]: wave packets, first/second-order forward data and the
//!   Crank–Nicolson grid propagator.
//! - [`inverse`]: reconstruction pipelines.
//! - [`scenario`]: config-file model shared by the CLI and the tests.

pub mod error;
pub mod exec;
pub mod fields;
pub mod gauges;
pub mod geometry;
pub mod inverse;
pub mod quad;
pub mod raster;
pub mod scattering;
pub mod scenario;
pub mod spectral;
pub mod transforms;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
