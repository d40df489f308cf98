use serde::Serialize;

use crate::error::{LabError, Result};
use crate::spectral::ModeSet;

/// Diagonal covariance `Q e_k = sigma_k^2 e_k` with `sigma_k = sigma0 |k|^{-gamma}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub cutoff: usize,
    pub sigma0: f64,
    pub gamma: f64,
    /// `sigma_k` in mode storage order.
    #[serde(skip)]
    pub sigma: Vec<f64>,
    /// `tr Q = sum sigma_k^2`.
    pub tr_q: f64,
    /// `tr (-A) Q = sum sigma_k^2 |k|^2`.
    pub tr_aq: f64,
    /// `||Q||_{L(V)} = sup sigma_k^2`.
    pub op_qv: f64,
    /// `sup sigma_k^2 |k|^2`, the bound of `sqrt(Q)` from `V*` to `H` squared.
    pub op_qvstar_h: f64,
}

impl NoiseSpec {
    pub const DEFAULT_GAMMA: f64 = 2.5;

    pub fn new(cutoff: usize, sigma0: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 2.0) {
            return Err(LabError::Config(format!(
                "gamma must exceed 2: Assumption on Q requires tr(-A)Q < inf (got gamma = {gamma})"
            )));
        }
        if !(sigma0 >= 0.0 && sigma0.is_finite()) {
            return Err(LabError::Config(format!("sigma0 must be finite and non-negative, got {sigma0}")));
        }
        let modes = ModeSet::shared(cutoff)?;
        let sigma: Vec<f64> = modes.modes().iter().map(|k| sigma0 * k.norm().powf(-gamma)).collect();
        let mut tr_q = 0.0;
        let mut tr_aq = 0.0;
        let mut op_qv: f64 = 0.0;
        let mut op_qvstar_h: f64 = 0.0;
        for (k, s) in modes.modes().iter().zip(&sigma) {
            let s2 = s * s;
            let k2 = k.norm_sq() as f64;
            tr_q += s2;
            tr_aq += s2 * k2;
            op_qv = op_qv.max(s2);
            op_qvstar_h = op_qvstar_h.max(s2 * k2);
        }
        Ok(Self { cutoff, sigma0, gamma, sigma, tr_q, tr_aq, op_qv, op_qvstar_h })
    }

    pub fn silent(cutoff: usize) -> Result<Self> {
        Self::new(cutoff, 0.0, Self::DEFAULT_GAMMA)
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.sigma[i] * self.sigma[i]
    }
}
