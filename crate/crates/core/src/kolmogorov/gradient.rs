use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::cylinder::CylinderFunction;
use crate::error::{LabError, Result};
use crate::rng::{generator, Stream};
use crate::sde::{run_coupled, SimConfig};
use crate::spectral::SpectralState;
use crate::stats::{iid_estimate, linear_fit, spearman};

/// Results at one separation `h`.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationResult {
    pub h: f64,
    /// `E ||z_t||_H / h` at each record time.
    pub ratio: Vec<f64>,
    pub ratio_std_error: Vec<f64>,
    /// `|P_t phi(x + h e) - P_t phi(x)| / h` at each record time.
    pub phi_ratio: Vec<f64>,
    /// Smallest rate with `ratio(t) <= e^{rate t}` at every record time.
    pub envelope_rate: f64,
    /// Least-squares line `log ratio = intercept + rate t`.
    pub ls_rate: f64,
    pub ls_intercept: f64,
    /// `e^{envelope_rate t} - ratio(t)`.
    pub residual: Vec<f64>,
    /// Least-squares slope of the residual against `t`.
    pub residual_trend: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientReport {
    pub times: Vec<f64>,
    pub direction_seed: u64,
    pub replicas: usize,
    pub initial_norm_v: f64,
    pub separations: Vec<SeparationResult>,
    /// `max / min` of the ratio across separations, worst over record times.
    pub stability_factor: f64,
}

impl GradientReport {
    pub fn all_finite(&self) -> bool {
        self.separations.iter().all(|s| s.ratio.iter().chain(&s.phi_ratio).all(|v| v.is_finite()))
    }

    pub fn residuals_nonnegative(&self) -> bool {
        self.separations.iter().all(|s| s.residual.iter().all(|r| *r >= -1e-12))
    }
}

/// A seeded unit vector in `H_n`.
pub fn random_direction(cutoff: usize, seed: u64) -> Result<SpectralState> {
    let mut rng = generator(seed, Stream::Direction, 0);
    let mut e = SpectralState::zeros(cutoff)?;
    for a in e.coeffs_mut() {
        *a = rng.sample(StandardNormal);
    }
    let n = e.norm_h();
    Ok(e.scaled(1.0 / n))
}

/// Single-exponential envelope `e^{rate t}` of a series with `ratio(0) = 1`.
///
/// `rate` is the smallest value with `ratio(t) <= e^{rate t}` at every record
/// time. The unconstrained least-squares line through `log ratio` is kept
/// for comparison.
struct Envelope {
    rate: f64,
    ls_rate: f64,
    ls_intercept: f64,
    residual: Vec<f64>,
    trend: f64,
}

fn envelope_fit(times: &[f64], ratio: &[f64]) -> Envelope {
    let logs: Vec<f64> = ratio.iter().map(|r| r.ln()).collect();
    let (ls_intercept, ls_rate) = linear_fit(times, &logs);
    let rate = times.iter().zip(&logs).filter(|(t, _)| **t > 0.0).map(|(t, l)| l / t).fold(f64::NEG_INFINITY, f64::max);
    let residual: Vec<f64> = times.iter().zip(ratio).map(|(t, r)| (rate * t).exp() - r).collect();
    let (_, trend) = linear_fit(times, &residual);
    Envelope { rate, ls_rate, ls_intercept, residual, trend }
}

/// Finite-difference probe of the flow map and of the semigroup gradient.
///
/// For each `h`, `replicas` coupled pairs start at `x + h e` and `x` with a
/// common random unit direction `e` and share their noise path replica by
/// replica, so every separation sees the same noise realizations.
pub fn gradient_ratio_experiment(
    config: &SimConfig,
    x: &SpectralState,
    separations: &[f64],
    phi: &CylinderFunction,
    replicas: usize,
) -> Result<GradientReport> {
    if separations.is_empty() || separations.iter().any(|h| !(*h > 0.0)) {
        return Err(LabError::Config("separations must be positive".into()));
    }
    if separations.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::Config("separations must be strictly decreasing".into()));
    }
    if replicas < 2 {
        return Err(LabError::Config("at least 2 replicas are needed".into()));
    }
    phi.check_cutoff(x.cutoff())?;
    let e = random_direction(x.cutoff(), config.seed)?;
    let mut times = Vec::new();
    let mut results = Vec::new();
    for &h in separations {
        let start = x.axpy(h, &e)?;
        let runs: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                let mut t = Vec::new();
                let mut z = Vec::new();
                let mut dphi = Vec::new();
                let mut err = None;
                run_coupled(config, &start, x, r, |time, u, v| {
                    t.push(time);
                    z.push(u.sub(v).expect("same cutoff").norm_h() / h);
                    match (phi.value(u), phi.value(v)) {
                        (Ok(a), Ok(b)) => dphi.push((a - b) / h),
                        (Err(e), _) | (_, Err(e)) => err = Some(e),
                    }
                })?;
                if let Some(e) = err {
                    return Err(e);
                }
                Ok((t, z, dphi))
            })
            .collect::<Result<_>>()?;
        times = runs[0].0.clone();
        let col = |j: usize, pick: fn(&(Vec<f64>, Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
            runs.iter().map(|r| pick(r)[j]).collect()
        };
        let mut ratio = Vec::new();
        let mut ratio_se = Vec::new();
        let mut phi_ratio = Vec::new();
        for j in 0..times.len() {
            let est = iid_estimate(&col(j, |r| &r.1));
            ratio.push(est.estimate);
            ratio_se.push(est.std_error);
            phi_ratio.push(iid_estimate(&col(j, |r| &r.2)).estimate.abs());
        }
        let env = envelope_fit(&times, &ratio);
        results.push(SeparationResult {
            h,
            ratio,
            ratio_std_error: ratio_se,
            phi_ratio,
            envelope_rate: env.rate,
            ls_rate: env.ls_rate,
            ls_intercept: env.ls_intercept,
            residual: env.residual,
            residual_trend: env.trend,
        });
    }
    let stability_factor = (0..times.len())
        .map(|j| {
            let vals: Vec<f64> = results.iter().map(|s| s.ratio[j]).collect();
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            hi / lo
        })
        .fold(1.0, f64::max);
    Ok(GradientReport {
        times,
        direction_seed: config.seed,
        replicas,
        initial_norm_v: x.norm_v(),
        separations: results,
        stability_factor,
    })
}

/// Envelope growth rate against `||x||_V^p` over initial states of increasing size.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthScan {
    pub norm_v_p: Vec<f64>,
    pub rates: Vec<f64>,
    pub rank_correlation: f64,
}

pub fn growth_rate_scan(
    config: &SimConfig,
    shape: &SpectralState,
    norms: &[f64],
    h: f64,
    phi: &CylinderFunction,
    replicas: usize,
) -> Result<GrowthScan> {
    let p = config.params.p;
    let mut norm_v_p = Vec::new();
    let mut rates = Vec::new();
    for &n in norms {
        let x = shape.scaled(n / shape.norm_v());
        let rep = gradient_ratio_experiment(config, &x, &[h], phi, replicas)?;
        norm_v_p.push(x.norm_v().powf(p));
        rates.push(rep.separations[0].envelope_rate);
    }
    let rank_correlation = spearman(&norm_v_p, &rates);
    Ok(GrowthScan { norm_v_p, rates, rank_correlation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::FluidParams;
    use crate::kolmogorov::standard_suite;
    use crate::sde::{random_initial, NoiseSpec};
    use crate::spectral::GridSpec;

    fn config() -> SimConfig {
        SimConfig::new(
            FluidParams::new(1.7, 1.0).unwrap(),
            NoiseSpec::new(3, 0.2, 2.5).unwrap(),
            GridSpec::for_cutoff(3).unwrap(),
            0.01,
            0.2,
            3,
        )
        .unwrap()
        .with_stride(5)
        .unwrap()
    }

    #[test]
    fn unit_direction() {
        let e = random_direction(4, 1).unwrap();
        assert!((e.norm_h() - 1.0).abs() < 1e-14);
        assert_eq!(e, random_direction(4, 1).unwrap());
    }

    #[test]
    fn rejects_bad_separations() {
        let c = config();
        let x = SpectralState::zeros(3).unwrap();
        let phi = &standard_suite()[0];
        assert!(gradient_ratio_experiment(&c, &x, &[], phi, 4).is_err());
        assert!(gradient_ratio_experiment(&c, &x, &[1e-3, 1e-2], phi, 4).is_err());
        assert!(gradient_ratio_experiment(&c, &x, &[1e-2, -1.0], phi, 4).is_err());
        assert!(gradient_ratio_experiment(&c, &x, &[1e-2], phi, 1).is_err());
    }

    #[test]
    fn ratio_starts_at_one_and_stays_finite() {
        let c = config();
        let x = random_initial(3, 1.0, 4).unwrap();
        let r = gradient_ratio_experiment(&c, &x, &[1e-2, 1e-3], &standard_suite()[0], 4).unwrap();
        assert_eq!(r.times.len(), 5);
        for s in &r.separations {
            assert!((s.ratio[0] - 1.0).abs() < 1e-12);
            assert_eq!(s.ratio_std_error[0], 0.0);
        }
        assert!(r.all_finite());
        assert!(r.residuals_nonnegative());
        assert!(r.stability_factor < 1.1);
    }

    #[test]
    fn envelope_dominates() {
        let t = [0.0, 0.5, 1.0];
        let r = [1.0, 0.5, 0.4];
        let env = envelope_fit(&t, &r);
        assert!((env.rate - 0.4f64.ln()).abs() < 1e-15);
        assert!(env.residual.iter().all(|v| *v >= -1e-15));
        let exact = envelope_fit(&t, &[1.0, 0.5f64.exp(), 1f64.exp()]);
        assert!((exact.rate - 1.0).abs() < 1e-12 && exact.ls_intercept.abs() < 1e-12);
        assert!(exact.residual.iter().all(|v| v.abs() < 1e-12));
    }
}
