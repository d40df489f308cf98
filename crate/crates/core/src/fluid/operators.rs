use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{strain_spectra, GridSpec, SpectralState, Spectrum};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Power-law exponent and reference viscosity of `nu(x) = nu0 (1 + x^2)^{(p-2)/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub p: f64,
    pub nu0: f64,
}

impl FluidParams {
    /// Shear-thinning parameters, `1 < p < 2`.
    pub fn new(p: f64, nu0: f64) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(LabError::Domain(format!(
                "power-law exponent p = {p} outside (1, 2); use FluidParams::diagnostic for p >= 2"
            )));
        }
        Self::diagnostic(p, nu0)
    }

    /// Any `p > 1`; values `p >= 2` are flagged by [`Self::is_diagnostic`].
    pub fn diagnostic(p: f64, nu0: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(LabError::Domain(format!("power-law exponent must exceed 1, got {p}")));
        }
        if !(nu0 > 0.0 && nu0.is_finite()) {
            return Err(LabError::Domain(format!("reference viscosity must be positive, got {nu0}")));
        }
        Ok(Self { p, nu0 })
    }

    pub fn is_diagnostic(&self) -> bool {
        self.p >= 2.0
    }

    /// Viscosity `nu(|E|)` as a function of `|E|^2`.
    pub fn viscosity(&self, frob_sq: f64) -> f64 {
        self.nu0 * (1.0 + frob_sq).powf(0.5 * (self.p - 2.0))
    }
}

/// Extra stress `S(E) = nu(|E|) E` of a symmetric matrix stored as `[e11, e12, e22]`.
pub fn stress_tensor(e: [f64; 3], params: &FluidParams) -> [f64; 3] {
    let frob_sq = e[0] * e[0] + 2.0 * e[1] * e[1] + e[2] * e[2];
    let nu = params.viscosity(frob_sq);
    [nu * e[0], nu * e[1], nu * e[2]]
}

/// Stress components `(S11, S12)` on the grid from strain samples; `S22 = -S11`.
fn stress_samples(e11: &[f64], e12: &[f64], params: &FluidParams) -> (Vec<f64>, Vec<f64>) {
    let expo = 0.5 * (params.p - 2.0);
    let mut s11 = Vec::with_capacity(e11.len());
    let mut s12 = Vec::with_capacity(e11.len());
    for (a, b) in e11.iter().zip(e12) {
        let nu = params.nu0 * (1.0 + 2.0 * (a * a + b * b)).powf(expo);
        s11.push(nu * a);
        s12.push(nu * b);
    }
    (s11, s12)
}

/// Fourier coefficients of `Div S` from those of `S11`, `S12` (with `S22 = -S11`).
fn stress_divergence(grid: &GridSpec, s11: &[Complex64], s12: &[Complex64]) -> (Spectrum, Spectrum) {
    let modes = grid.modes().modes();
    let mut f1 = Vec::with_capacity(modes.len());
    let mut f2 = Vec::with_capacity(modes.len());
    for ((q, a), b) in modes.iter().zip(s11).zip(s12) {
        let (q1, q2) = (f64::from(q.k1), f64::from(q.k2));
        f1.push(I * (a * q1 + b * q2));
        f2.push(I * (b * q1 - a * q2));
    }
    (f1, f2)
}

/// Galerkin stress operator `pi_n P Div S(Eu)`.
///
/// Evaluated in weak form: the coefficient at `k` equals the rectangle-rule
/// value of `-int S(Eu) : E e_k`.
pub fn apply_ap(state: &SpectralState, grid: &GridSpec, params: &FluidParams) -> Result<SpectralState> {
    grid.check_state(state)?;
    let (e11, e12) = strain_spectra(grid, state);
    let f = grid.synth(&[&e11, &e12]);
    let (s11, s12) = stress_samples(&f[0], &f[1], params);
    let t = grid.transform(&[&s11, &s12]);
    let (d1, d2) = stress_divergence(grid, &t[0], &t[1]);
    grid.project(&d1, &d2)
}

fn convection_samples(grid: &GridSpec, u: &SpectralState, v: &SpectralState) -> [Vec<f64>; 2] {
    let [u1, u2] = grid.velocity_spectrum(u);
    let [v1, v2] = grid.velocity_spectrum(v);
    let f = grid.synth(&[
        &u1,
        &u2,
        &grid.derivative(&v1, 0),
        &grid.derivative(&v1, 1),
        &grid.derivative(&v2, 0),
        &grid.derivative(&v2, 1),
    ]);
    let mut c1 = Vec::with_capacity(grid.len());
    let mut c2 = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (a, b) = (f[0][i], f[1][i]);
        c1.push(-(a * f[2][i] + b * f[3][i]));
        c2.push(-(a * f[4][i] + b * f[5][i]));
    }
    [c1, c2]
}

/// Galerkin convection `B(u, v) = -pi_n P (u . grad) v`, exact for `M >= 3n + 1`.
pub fn apply_b(u: &SpectralState, v: &SpectralState, grid: &GridSpec) -> Result<SpectralState> {
    grid.check_state(u)?;
    grid.check_state(v)?;
    grid.require_cubic("convection")?;
    let [c1, c2] = convection_samples(grid, u, v);
    let t = grid.transform(&[&c1, &c2]);
    grid.project(&t[0], &t[1])
}

/// Stokes operator: `a_k -> -|k|^2 a_k`.
pub fn apply_stokes(state: &SpectralState) -> SpectralState {
    let mut out = state.clone();
    for (k, a) in state.modes().modes().iter().zip(out.coeffs_mut()) {
        *a *= -(k.norm_sq() as f64);
    }
    out
}

/// Galerkin drift `A_{p,n}(u) + B_n(u)` with shared grid work.
pub fn drift(state: &SpectralState, grid: &GridSpec, params: &FluidParams) -> Result<SpectralState> {
    grid.check_state(state)?;
    grid.require_cubic("drift")?;
    let [u1, u2] = grid.velocity_spectrum(state);
    let d11 = grid.derivative(&u1, 0);
    let d12 = grid.derivative(&u1, 1);
    let d21 = grid.derivative(&u2, 0);
    let f = grid.synth(&[&u1, &u2, &d11, &d12, &d21]);
    let n = grid.len();
    let e12: Vec<f64> = (0..n).map(|i| 0.5 * (f[3][i] + f[4][i])).collect();
    let (s11, s12) = stress_samples(&f[2], &e12, params);
    let mut c1 = Vec::with_capacity(n);
    let mut c2 = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (f[0][i], f[1][i]);
        // d2 u2 = -d1 u1
        c1.push(-(a * f[2][i] + b * f[3][i]));
        c2.push(-(a * f[4][i] - b * f[2][i]));
    }
    let t = grid.transform(&[&s11, &s12, &c1, &c2]);
    let (mut d1, mut d2) = stress_divergence(grid, &t[0], &t[1]);
    for i in 0..d1.len() {
        d1[i] += t[2][i];
        d2[i] += t[3][i];
    }
    grid.project(&d1, &d2)
}
