use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::basis::{ModeSet, WaveIndex};
use crate::error::{LabError, Result};

/// Coefficients of a Galerkin state in the basis `{e_k : 0 < |k| <= n}`.
///
/// The coefficient at position `i` belongs to `modes().get(i)`.
#[derive(Clone, Debug)]
pub struct SpectralState {
    modes: Arc<ModeSet>,
    coeffs: Vec<f64>,
}

impl PartialEq for SpectralState {
    fn eq(&self, other: &Self) -> bool {
        self.cutoff() == other.cutoff() && self.coeffs == other.coeffs
    }
}

impl SpectralState {
    pub fn zeros(cutoff: usize) -> Result<Self> {
        let modes = ModeSet::shared(cutoff)?;
        let coeffs = vec![0.0; modes.len()];
        Ok(Self { modes, coeffs })
    }

    pub fn from_coeffs(cutoff: usize, coeffs: Vec<f64>) -> Result<Self> {
        let modes = ModeSet::shared(cutoff)?;
        if coeffs.len() != modes.len() {
            return Err(LabError::Config(format!(
                "cutoff {cutoff} needs {} coefficients, got {}",
                modes.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LabError::Domain("non-finite coefficient".into()));
        }
        Ok(Self { modes, coeffs })
    }

    /// The single basis element `e_k` at cutoff `n`.
    pub fn unit(cutoff: usize, k: WaveIndex) -> Result<Self> {
        let mut s = Self::zeros(cutoff)?;
        let i =
            s.modes.index_of(k).ok_or_else(|| LabError::Config(format!("mode {k} lies outside cutoff {cutoff}")))?;
        s.coeffs[i] = 1.0;
        Ok(s)
    }

    /// Independent Gaussian coefficients `N(0,1) * |k|^{-decay}`.
    pub fn random<R: Rng + ?Sized>(cutoff: usize, decay: f64, rng: &mut R) -> Result<Self> {
        let mut s = Self::zeros(cutoff)?;
        for (i, c) in s.coeffs.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *c = z * s.modes.get(i).norm().powf(-decay);
        }
        Ok(s)
    }

    pub fn cutoff(&self) -> usize {
        self.modes.cutoff()
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: WaveIndex) -> Option<f64> {
        self.modes.index_of(k).map(|i| self.coeffs[i])
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.cutoff() != other.cutoff() {
            return Err(LabError::Config(format!("cutoff mismatch: {} vs {}", self.cutoff(), other.cutoff())));
        }
        Ok(())
    }

    /// Coefficient inner product, equal to the `L^2` pairing of the fields.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    /// `V` pairing `sum |k|^2 a_k b_k`.
    pub fn dot_v(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .modes
            .modes()
            .iter()
            .zip(self.coeffs.iter().zip(&other.coeffs))
            .map(|(k, (a, b))| k.norm_sq() as f64 * a * b)
            .sum())
    }

    pub fn norm_h(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// `||u||_V` from Parseval, `(sum |k|^2 a_k^2)^{1/2}`.
    pub fn norm_v(&self) -> f64 {
        self.modes.modes().iter().zip(&self.coeffs).map(|(k, a)| k.norm_sq() as f64 * a * a).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { modes: Arc::clone(&self.modes), coeffs: self.coeffs.iter().map(|a| a * factor).collect() }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + factor * b).collect();
        Ok(Self { modes: Arc::clone(&self.modes), coeffs })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction_checks_dimension() {
        assert!(SpectralState::from_coeffs(2, vec![0.0; 11]).is_err());
        assert!(SpectralState::from_coeffs(2, vec![f64::NAN; 12]).is_err());
        assert_eq!(SpectralState::zeros(3).unwrap().dim(), 28);
    }

    #[test]
    fn parseval_norms_of_unit_modes() {
        let k = WaveIndex::new(1, 2).unwrap();
        let e = SpectralState::unit(3, k).unwrap();
        assert_eq!(e.norm_h(), 1.0);
        assert!((e.norm_v() - 5f64.sqrt()).abs() < 1e-15);
        assert!(SpectralState::unit(1, k).is_err());
    }

    #[test]
    fn random_is_seed_deterministic() {
        let a = SpectralState::random(4, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = SpectralState::random(4, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_cutoffs_error() {
        let a = SpectralState::zeros(2).unwrap();
        let b = SpectralState::zeros(3).unwrap();
        assert!(a.dot(&b).is_err());
        assert!(a.add(&b).is_err());
    }
}
