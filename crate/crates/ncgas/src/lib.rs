//! Numerical model of the degenerate electron gas with noncommutative
//! coordinates.
//!
//! The crate evaluates the 9-dimensional Fermi-constrained exchange
//! integrals of second-order perturbation theory with a deterministic,
//! parallel importance-sampling Monte Carlo engine, and assembles the
//! per-electron ground-state energy in Rydberg units together with its
//! deformation-dependent exchange term, small-deformation expansion and
//! deformation derivative.
//!
//! Layout:
//! - [`kernel`]: the integration domain and the integrand kernels.
//! - [`mc`]: the seeded, worker-count-independent estimator plus a
//!   brute-force cross-check oracle.
//! - [`energy`]: closed-form coefficients and energy assembly.
//! - [`report`]: config parsing, sweep runner, CSV/SVG/manifest output.
//! - [`verify`]: the built-in acceptance checks run by `ncgas verify`.

pub mod energy;
pub mod kernel;
pub mod mc;
pub mod report;
pub mod vec3;
pub mod verify;

pub use kernel::{PhasePoint, ThetaVector};
pub use mc::{IntegralEstimate, SamplerConfig};
pub use vec3::Vec3;
