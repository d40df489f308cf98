//! The Kolmogorov operator on cylinder functions and the Monte Carlo
//! experiments built on the Galerkin invariant measure: infinitesimal
//! invariance, the moment recursion, exponential moments, the coupling
//! gradient probe, and the exponent schedule of the gradient estimate.

mod constants;
mod cylinder;
mod gradient;
mod measure;

pub use constants::{
    analysis_constants, condition_holds, eps_star, estimate_cp, estimate_kp, exponents, p_star, threshold_cubic,
    AnalysisConstants, Exponents, SearchConfig,
};
pub use cylinder::{standard_suite, CylinderFunction, Expr, Jet};
pub use gradient::{
    gradient_ratio_experiment, growth_rate_scan, random_direction, GradientReport, GrowthScan, SeparationResult,
};
pub use measure::{
    apply_k, estimate_invariant_measure, exponential_moment, exponential_moment_from, invariance_residual,
    invariance_residuals, mean_ip, moment_inequality_report, moment_report_from, sample_observables, sim_fingerprint,
    EmpiricalMeasure, ExpMoment, MeasureMetadata, MomentEntry, MomentReport, SampleObservables,
};
