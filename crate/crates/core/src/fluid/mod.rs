//! The nonlinear drift of the power-law fluid and its verification suite.
//!
//! The pressure never appears: every operator is followed by the Galerkin
//! projection onto the divergence-free basis, which removes gradients.

mod operators;
pub mod verify;

pub use operators::{apply_ap, apply_b, apply_stokes, drift, stress_tensor, FluidParams};
pub use verify::{
    fit_constants, holder_exponents, random_corpus, verify_corpus, verify_identities, CheckEntry, CorpusVerification,
    OperatorConstants, Status, VerificationReport,
};
