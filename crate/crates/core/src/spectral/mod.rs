//! Divergence-free, mean-zero Fourier fields on the torus `(0, 2 pi)^2`.
//!
//! States are coefficient vectors over the real eigenfunctions `e_k` of the
//! Stokes operator. Grid work (synthesis, projection, derivatives) goes
//! through FFTs on a uniform periodic grid; all integrals use the rectangle
//! rule, which is exact for trigonometric polynomials of per-axis degree `< M`.

mod basis;
mod grid;
mod norms;
mod state;

pub use basis::{basis_eval, ModeSet, WaveIndex, BASIS_NORM};
pub use grid::{
    analyze, spectral_divergence, spectral_laplacian, sym_gradient, synthesize, GridSpec, PhysicalField, SymTensorField,
};
pub use norms::{dissipation_ip, sobolev_norm};
pub use state::SpectralState;

pub(crate) use grid::Spectrum;
pub(crate) use norms::{derivative_magnitude, ip_from_fields, lp_norm, strain_fields, strain_spectra};
