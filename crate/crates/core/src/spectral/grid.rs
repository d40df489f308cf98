use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::basis::{ModeSet, BASIS_NORM};
use super::state::SpectralState;
use crate::error::{LabError, Result};

/// Complex amplitudes indexed by position in a [`ModeSet`].
pub(crate) type Spectrum = Vec<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Uniform periodic grid `xi_ij = (2 pi i / M, 2 pi j / M)` tied to a cutoff `n`,
/// together with the FFT plans that move states on and off it.
///
/// Requires `M >= 2n + 1`, which makes the rectangle rule exact for products of
/// two basis functions. Quadratic nonlinearities need `M >= 3n + 1`.
#[derive(Clone)]
pub struct GridSpec {
    m: usize,
    modes: Arc<ModeSet>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    slot: Vec<usize>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec").field("m", &self.m).field("cutoff", &self.cutoff()).finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.cutoff() == other.cutoff()
    }
}

impl GridSpec {
    pub fn new(cutoff: usize, m: usize) -> Result<Self> {
        let modes = ModeSet::shared(cutoff)?;
        if m < 2 * cutoff + 1 {
            return Err(LabError::Config(format!(
                "grid of {m} points per axis is too coarse for cutoff {cutoff} (need M >= {})",
                2 * cutoff + 1
            )));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let wrap = |k: i32| (k.rem_euclid(m as i32)) as usize;
        let slot = modes.modes().iter().map(|k| wrap(k.k1) * m + wrap(k.k2)).collect();
        Ok(Self { m, modes, fwd, inv, slot })
    }

    /// The default grid `M = 4n` used for the non-polynomial stress.
    pub fn for_cutoff(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, 4 * cutoff.max(1))
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn cutoff(&self) -> usize {
        self.modes.cutoff()
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn dealias_factor(&self) -> f64 {
        self.m as f64 / self.cutoff() as f64
    }

    /// Whether products of three band-limited factors integrate exactly.
    pub fn exact_for_cubic(&self) -> bool {
        self.m > 3 * self.cutoff()
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Rectangle-rule weight `(2 pi / M)^2`.
    pub fn cell_area(&self) -> f64 {
        let h = 2.0 * PI / self.m as f64;
        h * h
    }

    pub fn point(&self, flat: usize) -> [f64; 2] {
        let h = 2.0 * PI / self.m as f64;
        [(flat / self.m) as f64 * h, (flat % self.m) as f64 * h]
    }

    /// Rectangle-rule integral of grid samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        crate::stats::pairwise_sum(values) * self.cell_area()
    }

    pub(crate) fn check_state(&self, state: &SpectralState) -> Result<()> {
        if state.cutoff() != self.cutoff() {
            return Err(LabError::Config(format!(
                "state cutoff {} does not match grid cutoff {}",
                state.cutoff(),
                self.cutoff()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_cubic(&self, what: &str) -> Result<()> {
        if !self.exact_for_cubic() {
            return Err(LabError::Config(format!(
                "{what} needs M >= 3n+1 = {}, grid has M = {}",
                3 * self.cutoff() + 1,
                self.m
            )));
        }
        Ok(())
    }

    fn fft2(&self, buf: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inv } else { &self.fwd };
        plan.process(buf);
        transpose(buf, self.m);
        plan.process(buf);
        transpose(buf, self.m);
    }

    /// Complex velocity amplitudes: the field is `sum_q u_hat(q) exp(i q.xi)`.
    pub(crate) fn velocity_spectrum(&self, state: &SpectralState) -> [Spectrum; 2] {
        let modes = state.modes();
        let a = state.coeffs();
        let mut u1 = vec![Complex64::default(); modes.len()];
        let mut u2 = vec![Complex64::default(); modes.len()];
        for i in 0..modes.len() {
            let q = modes.get(i);
            let j = modes.neg_index(i);
            // Scalar amplitude along q^perp/|q|.
            let w = if q.is_sine_branch() {
                Complex64::new(-a[j], -a[i]) * (0.5 * BASIS_NORM)
            } else {
                Complex64::new(a[i], -a[j]) * (0.5 * BASIS_NORM)
            };
            let d = q.unit_perp();
            u1[i] = w * d[0];
            u2[i] = w * d[1];
        }
        [u1, u2]
    }

    /// Multiplies a spectrum by `i q_j`.
    pub(crate) fn derivative(&self, spec: &[Complex64], axis: usize) -> Spectrum {
        self.modes
            .modes()
            .iter()
            .zip(spec)
            .map(|(q, s)| {
                let qj = if axis == 0 { q.k1 } else { q.k2 };
                I * f64::from(qj) * s
            })
            .collect()
    }

    /// Evaluates real fields with the given (Hermitian) spectra on the grid.
    pub(crate) fn synth(&self, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(spectra.len());
        let mut buf = vec![Complex64::default(); self.len()];
        for pair in spectra.chunks(2) {
            buf.iter_mut().for_each(|z| *z = Complex64::default());
            for (i, &s) in self.slot.iter().enumerate() {
                let y = pair.get(1).map_or(Complex64::default(), |g| I * g[i]);
                buf[s] = pair[0][i] + y;
            }
            self.fft2(&mut buf, true);
            out.push(buf.iter().map(|z| z.re).collect());
            if pair.len() == 2 {
                out.push(buf.iter().map(|z| z.im).collect());
            }
        }
        out
    }

    /// Discrete Fourier coefficients `(1/M^2) sum f exp(-i q.xi)` at the modes.
    pub(crate) fn transform(&self, fields: &[&[f64]]) -> Vec<Spectrum> {
        let scale = 1.0 / self.len() as f64;
        let mut out = Vec::with_capacity(fields.len());
        let mut buf = vec![Complex64::default(); self.len()];
        for pair in fields.chunks(2) {
            for (k, z) in buf.iter_mut().enumerate() {
                *z = Complex64::new(pair[0][k], pair.get(1).map_or(0.0, |g| g[k]));
            }
            self.fft2(&mut buf, false);
            let mut f = Vec::with_capacity(self.slot.len());
            let mut g = Vec::with_capacity(self.slot.len());
            for i in 0..self.slot.len() {
                let z = buf[self.slot[i]];
                let zc = buf[self.slot[self.modes.neg_index(i)]].conj();
                f.push((z + zc) * (0.5 * scale));
                g.push((z - zc) * Complex64::new(0.0, -0.5 * scale));
            }
            out.push(f);
            if pair.len() == 2 {
                out.push(g);
            }
        }
        out
    }

    /// Galerkin coefficients `<f, e_k>` of a vector field given its Fourier
    /// coefficients at the modes. Gradient parts are annihilated.
    pub(crate) fn project(&self, f1: &[Complex64], f2: &[Complex64]) -> Result<SpectralState> {
        let scale = 4.0 * PI * PI * BASIS_NORM;
        let mut coeffs = vec![0.0; self.modes.len()];
        for i in 0..self.modes.len() {
            let q = self.modes.get(i);
            if !q.is_sine_branch() {
                continue;
            }
            let d = q.unit_perp();
            let p = f1[i] * d[0] + f2[i] * d[1];
            coeffs[i] = -scale * p.im;
            coeffs[self.modes.neg_index(i)] = -scale * p.re;
        }
        SpectralState::from_coeffs(self.cutoff(), coeffs)
    }

    /// Applies a Fourier multiplier to a real grid field using the full DFT.
    fn full_multiplier(&self, values: &[f64], mult: impl Fn(i64, i64) -> Complex64) -> Vec<f64> {
        let m = self.m as i64;
        let signed = |k: i64| if 2 * k > m { k - m } else { k };
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut buf, false);
        for (idx, z) in buf.iter_mut().enumerate() {
            let q1 = signed(idx as i64 / m);
            let q2 = signed(idx as i64 % m);
            *z *= mult(q1, q2) / (m * m) as f64;
        }
        self.fft2(&mut buf, true);
        buf.iter().map(|z| z.re).collect()
    }
}

fn transpose(buf: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// Velocity samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    m: usize,
    values: Vec<[f64; 2]>,
}

impl PhysicalField {
    pub fn new(m: usize, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != m * m {
            return Err(LabError::Config(format!("expected {} samples, got {}", m * m, values.len())));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(LabError::Domain("non-finite field sample".into()));
        }
        Ok(Self { m, values })
    }

    /// Samples a closure at the grid points.
    pub fn from_fn(grid: &GridSpec, f: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Self> {
        Self::new(grid.m, (0..grid.len()).map(|i| f(grid.point(i))).collect())
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    fn from_components(m: usize, a: &[f64], b: &[f64]) -> Self {
        Self { m, values: a.iter().zip(b).map(|(x, y)| [*x, *y]).collect() }
    }
}

/// Symmetric 2x2 tensor samples stored as `[t11, t12, t22]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    m: usize,
    values: Vec<[f64; 3]>,
}

impl SymTensorField {
    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    /// Pointwise squared Frobenius norm.
    pub fn frobenius_sq(&self) -> Vec<f64> {
        self.values.iter().map(|t| t[0] * t[0] + 2.0 * t[1] * t[1] + t[2] * t[2]).collect()
    }

    pub fn trace(&self) -> Vec<f64> {
        self.values.iter().map(|t| t[0] + t[2]).collect()
    }
}

/// Evaluates `sum_k a_k e_k` on the grid.
pub fn synthesize(state: &SpectralState, grid: &GridSpec) -> Result<PhysicalField> {
    grid.check_state(state)?;
    let [u1, u2] = grid.velocity_spectrum(state);
    let f = grid.synth(&[&u1, &u2]);
    Ok(PhysicalField::from_components(grid.m, &f[0], &f[1]))
}

/// Galerkin projection `a_k = <field, e_k>` by rectangle-rule quadrature.
pub fn analyze(field: &PhysicalField, grid: &GridSpec) -> Result<SpectralState> {
    if field.m != grid.m {
        return Err(LabError::Config(format!("field has {} points per axis, grid has {}", field.m, grid.m)));
    }
    let (f1, f2) = (field.component(0), field.component(1));
    let t = grid.transform(&[&f1, &f2]);
    grid.project(&t[0], &t[1])
}

/// Symmetric gradient `Eu = (grad u + grad u^T) / 2` on the grid.
pub fn sym_gradient(state: &SpectralState, grid: &GridSpec) -> Result<SymTensorField> {
    grid.check_state(state)?;
    let [u1, u2] = grid.velocity_spectrum(state);
    let d11 = grid.derivative(&u1, 0);
    let d12 = grid.derivative(&u1, 1);
    let d21 = grid.derivative(&u2, 0);
    let d22 = grid.derivative(&u2, 1);
    let e12: Spectrum = d12.iter().zip(&d21).map(|(a, b)| (a + b) * 0.5).collect();
    let f = grid.synth(&[&d11, &e12, &d22]);
    let values = (0..grid.len()).map(|i| [f[0][i], f[1][i], f[2][i]]).collect();
    Ok(SymTensorField { m: grid.m, values })
}

/// Divergence of a grid field by spectral differentiation (Nyquist modes dropped).
pub fn spectral_divergence(field: &PhysicalField, grid: &GridSpec) -> Result<Vec<f64>> {
    if field.m != grid.m {
        return Err(LabError::Config("grid mismatch".into()));
    }
    let m = grid.m as i64;
    let nyq = |k: i64| m % 2 == 0 && k.abs() * 2 == m;
    let d1 =
        grid.full_multiplier(&field.component(0), |q1, _| if nyq(q1) { Complex64::default() } else { I * q1 as f64 });
    let d2 =
        grid.full_multiplier(&field.component(1), |_, q2| if nyq(q2) { Complex64::default() } else { I * q2 as f64 });
    Ok(d1.iter().zip(&d2).map(|(a, b)| a + b).collect())
}

/// Componentwise spectral Laplacian of a grid field.
pub fn spectral_laplacian(field: &PhysicalField, grid: &GridSpec) -> Result<PhysicalField> {
    if field.m != grid.m {
        return Err(LabError::Config("grid mismatch".into()));
    }
    let lap = |q1: i64, q2: i64| Complex64::new(-((q1 * q1 + q2 * q2) as f64), 0.0);
    let a = grid.full_multiplier(&field.component(0), lap);
    let b = grid.full_multiplier(&field.component(1), lap);
    Ok(PhysicalField::from_components(grid.m, &a, &b))
}
