//! Spectral Galerkin laboratory for the two-dimensional stochastic power-law
//! fluid on the periodic torus.
//!
//! * [`spectral`]: divergence-free Fourier basis, grid transforms, norms, `I_p`.
//! * [`fluid`]: stress law, the drift operators `A_p`, `B`, `A`, and the
//!   operator verification report.
//! * [`sde`]: tamed Euler integration of the Galerkin SDE and synchronous coupling.
//! * [`kolmogorov`]: Kolmogorov operator on cylinder functions, invariant
//!   measure estimation and the moment, invariance and gradient experiments.
//! * [`cli`]: TOML-configured experiment runner behind the `plaw` binary.

pub mod cli;
pub mod error;
pub mod fluid;
pub mod io;
pub mod kolmogorov;
pub mod rng;
pub mod sde;
pub mod spectral;
pub mod stats;

pub use error::{LabError, Result};

/// Version string embedded in every output file.
pub const VERSION: &str = concat!("powerlaw-lab ", env!("CARGO_PKG_VERSION"));
