//! Radial harmonic analysis on rank-one model geometries.
//!
//! The crate evaluates the radial eigenfunctions of the Laplacian on
//! hyperbolic and Damek-Ricci model spaces, extracts the spectral
//! (Plancherel) density from their asymptotics, and builds the spherical
//! Fourier transform, its inverse, radial convolution, the Abel/Radon
//! transform, and heat / Schrodinger propagators on top. A verification
//! layer re-checks the analytic identities and inequalities these objects
//! satisfy and emits structured reports; the `radharm` binary exposes the
//! whole pipeline on the command line.

pub mod eigen;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod ode;
pub mod oracles;
pub mod quad;
pub mod space;
pub mod spectral;
pub mod spline;
pub mod transform;

pub use error::{Error, Result};
pub use space::{ModelSpace, SpaceKind};
