use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fluid::FluidParams;
use crate::rng::{generator, Stream};
use crate::sde::NoiseSpec;
use crate::spectral::{derivative_magnitude, dissipation_ip, lp_norm, sym_gradient, GridSpec, SpectralState};

/// Exponents of the coupling estimate and the derived constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConstants {
    pub p: f64,
    pub r: f64,
    pub q: f64,
    pub q_star: f64,
    pub theta: f64,
    pub beta: f64,
    pub p_star: f64,
    pub eps_star: f64,
    pub c_p_estimate: f64,
    pub k_p_estimate: f64,
    pub condition_ok: bool,
    /// Cutoff at which `C_p` and `K_p` were searched.
    pub cutoff: usize,
    pub op_qv: f64,
}

/// The closed-form exponents `(r, q, q*, theta, beta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub r: f64,
    pub q: f64,
    pub q_star: f64,
    pub theta: f64,
    pub beta: f64,
}

pub fn exponents(p: f64) -> Exponents {
    let s = (2.0 - p) * (2.0 - p);
    Exponents {
        r: 1.0 + s / (2.0 * p),
        q: 4.0 * p / (3.0 * p - 2.0),
        q_star: 4.0 * p / s,
        theta: (3.0 * p - 2.0 - s) / (2.0 * p - s),
        beta: 2.0 * p / (3.0 * p - 2.0 - s),
    }
}

/// `p^3 - 8 p^2 + 14 p - 6`.
pub fn threshold_cubic(p: f64) -> f64 {
    ((p - 8.0) * p + 14.0) * p - 6.0
}

/// Root of the threshold cubic in `(1, 2)` by bisection to `1e-12`.
pub fn p_star() -> f64 {
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if threshold_cubic(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `2p - 2 > beta`, the growth condition of the gradient estimate.
pub fn condition_holds(p: f64) -> bool {
    2.0 * p - 2.0 > exponents(p).beta
}

/// Budget of the randomized search for `C_p` and `K_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { starts: 32, iterations: 150, seed: 0 }
    }
}

fn korn_ratio(u: &SpectralState, grid: &GridSpec, p: f64) -> Result<f64> {
    let grad = derivative_magnitude(grid, u, 1)?;
    let sym: Vec<f64> = sym_gradient(u, grid)?
        .values()
        .iter()
        .map(|t| (t[0] * t[0] + 2.0 * t[1] * t[1] + t[2] * t[2]).sqrt())
        .collect();
    Ok(lp_norm(grid, &grad, p) / lp_norm(grid, &sym, p))
}

/// `||u||_V^p / I_p(u)` on the unit sphere of `V`.
///
/// Along rays `t u` with `t >= 1` the ratio is non-increasing, so its maximum
/// over `{||u||_V >= 1}` is attained on the sphere. Near `u = 0` the ratio
/// behaves like `||u||_V^{p-2}` and is unbounded, so only the region
/// `||u||_V >= 1` admits a finite constant.
fn cp_ratio(u: &SpectralState, grid: &GridSpec, p: f64) -> Result<f64> {
    let unit = u.scaled(1.0 / u.norm_v());
    Ok(1.0 / dissipation_ip(&unit, grid, p)?)
}

/// Random-restart hill climbing of `f` over directions in coefficient space.
fn maximize(
    cutoff: usize,
    search: &SearchConfig,
    salt: u64,
    f: impl Fn(&SpectralState) -> Result<f64> + Sync,
) -> Result<f64> {
    let best: Vec<f64> = (0..search.starts as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = generator(search.seed, Stream::Search, salt * 1_000_003 + s);
            let decay = rng.random_range(0.0..2.0);
            let mut u = SpectralState::random(cutoff, decay, &mut rng)?;
            let mut val = f(&u)?;
            let mut step = 0.5;
            for _ in 0..search.iterations {
                let mut trial = u.clone();
                let scale = step * u.norm_h() / (trial.dim() as f64).sqrt();
                for a in trial.coeffs_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *a += scale * z;
                }
                if trial.norm_h() == 0.0 {
                    continue;
                }
                let v = f(&trial)?;
                if v > val {
                    u = trial;
                    val = v;
                    step = (step * 1.5).min(2.0);
                } else {
                    step *= 0.8;
                }
            }
            Ok(val)
        })
        .collect::<Result<_>>()?;
    Ok(best.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Empirical `C_p = sup_{||u||_V >= 1} ||u||_V^p / I_p(u)` at the grid's cutoff.
pub fn estimate_cp(grid: &GridSpec, p: f64, search: &SearchConfig) -> Result<f64> {
    maximize(grid.cutoff(), search, 1, |u| cp_ratio(u, grid, p))
}

/// Empirical Korn constant `K_p = sup ||grad u||_{0,p} / ||Eu||_{0,p}`.
pub fn estimate_kp(grid: &GridSpec, p: f64, search: &SearchConfig) -> Result<f64> {
    maximize(grid.cutoff(), search, 2, |u| korn_ratio(u, grid, p))
}

/// `eps* = 2 nu0 (p-1) / (p C_p ||Q||_{L(V)})`; infinite without noise.
pub fn eps_star(params: &FluidParams, c_p: f64, op_qv: f64) -> f64 {
    2.0 * params.nu0 * (params.p - 1.0) / (params.p * c_p * op_qv)
}

pub fn analysis_constants(
    params: &FluidParams,
    noise: &NoiseSpec,
    grid: &GridSpec,
    search: &SearchConfig,
) -> Result<AnalysisConstants> {
    let p = params.p;
    if !(p > 1.0 && p < 2.0) {
        return Err(LabError::Domain(format!("analysis constants need 1 < p < 2, got {p}")));
    }
    let e = exponents(p);
    let c_p = estimate_cp(grid, p, search)?;
    let k_p = estimate_kp(grid, p, search)?;
    Ok(AnalysisConstants {
        p,
        r: e.r,
        q: e.q,
        q_star: e.q_star,
        theta: e.theta,
        beta: e.beta,
        p_star: p_star(),
        eps_star: eps_star(params, c_p, noise.op_qv),
        c_p_estimate: c_p,
        k_p_estimate: k_p,
        condition_ok: condition_holds(p),
        cutoff: grid.cutoff(),
        op_qv: noise.op_qv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn closed_forms_at_1_8() {
        let e = exponents(1.8);
        assert_relative_eq!(e.r, 1.0 + 0.04 / 3.6, epsilon = 1e-15);
        assert_relative_eq!(e.q, 7.2 / 3.4, epsilon = 1e-15);
        assert_relative_eq!(e.q_star, 180.0, epsilon = 1e-11);
        assert_relative_eq!(e.theta, 3.36 / 3.56, epsilon = 1e-15);
        assert_relative_eq!(e.beta, 3.6 / 3.36, epsilon = 1e-15);
        assert!(condition_holds(1.8));
    }

    #[test]
    fn threshold_root() {
        let ps = p_star();
        assert!((ps - 1.60407).abs() < 1e-4, "{ps}");
        assert!(threshold_cubic(ps).abs() < 1e-11);
        assert!((2.0 * ps - 2.0 - exponents(ps).beta).abs() < 1e-9);
        assert!(!condition_holds(1.5));
    }

    #[test]
    fn search_finds_sensible_constants() {
        let grid = GridSpec::for_cutoff(3).unwrap();
        let s = SearchConfig { starts: 4, iterations: 30, seed: 1 };
        let kp = estimate_kp(&grid, 1.5, &s).unwrap();
        assert!(kp >= 1.0 && kp < 3.0, "{kp}");
        let cp = estimate_cp(&grid, 1.5, &s).unwrap();
        assert!(cp.is_finite() && cp > 0.0);
        let params = FluidParams::new(1.5, 1.0).unwrap();
        assert!(analysis_constants(
            &FluidParams::diagnostic(2.0, 1.0).unwrap(),
            &NoiseSpec::silent(3).unwrap(),
            &grid,
            &s
        )
        .is_err());
        let c = analysis_constants(&params, &NoiseSpec::new(3, 1.0, 2.5).unwrap(), &grid, &s).unwrap();
        assert_relative_eq!(c.eps_star, 2.0 * 0.5 / (1.5 * c.c_p_estimate * 1.0));
    }
}
