use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cylinder::CylinderFunction;
use crate::error::{LabError, Result};
use crate::fluid::{self, FluidParams};
use crate::io::{sha256_hex, to_json_string, write_atomic, CsvTable};
use crate::rng::{generator, Stream};
use crate::sde::{draw_increments, tamed_step, NoiseSpec, SimConfig};
use crate::spectral::{dissipation_ip, GridSpec, SpectralState};
use crate::stats::{batch_means, pairwise_sum, Estimate, DEFAULT_BATCHES};

/// Provenance of an empirical measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureMetadata {
    pub cutoff: usize,
    pub burn_in: f64,
    /// Steps between retained samples.
    pub thin: usize,
    pub dt: f64,
    pub total_time: f64,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

/// Equal-weight time-average sample of one long trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub samples: Vec<SpectralState>,
    pub metadata: MeasureMetadata,
}

/// SHA-256 of the parameters that determine a simulation.
pub fn sim_fingerprint(config: &SimConfig) -> String {
    let v = serde_json::json!({
        "p": config.params.p,
        "nu0": config.params.nu0,
        "cutoff": config.cutoff(),
        "sigma0": config.noise.sigma0,
        "gamma": config.noise.gamma,
        "grid": config.grid.points_per_axis(),
        "dt": config.dt,
        "horizon": config.horizon,
        "scheme": config.scheme,
        "seed": config.seed,
    });
    sha256_hex(to_json_string(&v).expect("plain json").as_bytes())
}

impl EmpiricalMeasure {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.samples.len() as f64
    }

    pub fn cutoff(&self) -> usize {
        self.metadata.cutoff
    }

    /// Batch-means estimate of `int f dmu` with `f` evaluated per sample in parallel.
    pub fn expectation(&self, f: impl Fn(&SpectralState) -> Result<f64> + Sync) -> Result<Estimate> {
        let values: Vec<f64> = self.samples.par_iter().map(&f).collect::<Result<_>>()?;
        Ok(batch_means(&values, DEFAULT_BATCHES))
    }

    /// Mean of every coordinate `<x, e_k>` with its standard error, in mode order.
    pub fn coordinate_means(&self) -> Vec<Estimate> {
        let dim = self.samples[0].dim();
        (0..dim)
            .map(|i| {
                let col: Vec<f64> = self.samples.iter().map(|s| s.coeffs()[i]).collect();
                batch_means(&col, DEFAULT_BATCHES)
            })
            .collect()
    }

    pub fn to_csv(&self) -> CsvTable {
        let header = self.samples[0].modes().modes().iter().map(|k| format!("a_{}_{}", k.k1, k.k2)).collect();
        CsvTable { header, rows: self.samples.iter().map(|s| s.coeffs().to_vec()).collect() }
    }

    /// Writes `<stem>.csv` and the metadata sidecar `<stem>.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        write_atomic(&dir.join(format!("{stem}.csv")), self.to_csv().render().as_bytes())?;
        write_atomic(&dir.join(format!("{stem}.json")), to_json_string(&self.metadata)?.as_bytes())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let meta_text = std::fs::read_to_string(dir.join(format!("{stem}.json")))?;
        let metadata: MeasureMetadata = serde_json::from_str(&meta_text)
            .map_err(|e| LabError::Config(format!("measure metadata {stem}.json: {e}")))?;
        let table = CsvTable::parse(&std::fs::read_to_string(dir.join(format!("{stem}.csv")))?)?;
        let samples = table
            .rows
            .into_iter()
            .map(|row| SpectralState::from_coeffs(metadata.cutoff, row))
            .collect::<Result<Vec<_>>>()?;
        if samples.len() < 2 {
            return Err(LabError::Samples(format!("measure {stem} holds {} samples", samples.len())));
        }
        Ok(Self { samples, metadata })
    }
}

/// Ergodic-average estimate of the invariant measure of the Galerkin system.
///
/// Runs one trajectory over `[0, config.horizon]` from `initial` and keeps
/// every `thin`-th state with `t >= burn_in`.
pub fn estimate_invariant_measure(
    config: &SimConfig,
    initial: &SpectralState,
    burn_in: f64,
    thin: usize,
) -> Result<EmpiricalMeasure> {
    config.validate()?;
    config.grid.check_state(initial)?;
    if !(burn_in >= 0.0 && burn_in < config.horizon) {
        return Err(LabError::Config(format!("burn_in {burn_in} must lie in [0, T = {})", config.horizon)));
    }
    if thin == 0 {
        return Err(LabError::Config("thin must be at least 1".into()));
    }
    let steps = config.steps();
    let first = (burn_in / config.dt).ceil() as usize;
    let mut rng = generator(config.seed, Stream::Noise, 0);
    let mut inc = vec![0.0; initial.dim()];
    let mut u = initial.clone();
    let mut samples = Vec::new();
    for j in 0..=steps {
        if j >= first && (j - first) % thin == 0 {
            samples.push(u.clone());
        }
        if j == steps {
            break;
        }
        draw_increments(&mut rng, config.dt, &mut inc);
        u = tamed_step(&u, config.dt, &inc, config).map_err(|e| match e {
            LabError::Blowup { detail, .. } => LabError::Blowup {
                time: (j + 1) as f64 * config.dt,
                detail: format!("{detail} while sampling the measure"),
            },
            other => other,
        })?;
    }
    if samples.len() < 2 {
        return Err(LabError::Samples(format!(
            "only {} samples after burn-in {burn_in} with thinning {thin}; need at least 2",
            samples.len()
        )));
    }
    Ok(EmpiricalMeasure {
        samples,
        metadata: MeasureMetadata {
            cutoff: config.cutoff(),
            burn_in,
            thin,
            dt: config.dt,
            total_time: config.horizon,
            seed: config.seed,
            config_hash: sim_fingerprint(config),
            version: crate::VERSION.to_string(),
        },
    })
}

/// `(K phi)(x) = 1/2 tr Q D^2 phi(x) + <A_p(x) + B(x), D phi(x)>_H`.
pub fn apply_k(
    phi: &CylinderFunction,
    x: &SpectralState,
    grid: &GridSpec,
    params: &FluidParams,
    noise: &NoiseSpec,
) -> Result<f64> {
    phi.check_cutoff(x.cutoff())?;
    let drift = fluid::drift(x, grid, params)?;
    phi.generator_with_drift(x, &drift, noise)
}

/// Mean of `K phi` over the measure with its batch-means standard error.
pub fn invariance_residual(
    measure: &EmpiricalMeasure,
    phi: &CylinderFunction,
    grid: &GridSpec,
    params: &FluidParams,
    noise: &NoiseSpec,
) -> Result<Estimate> {
    Ok(invariance_residuals(measure, std::slice::from_ref(phi), grid, params, noise)?.remove(0))
}

/// [`invariance_residual`] for several functions, evaluating the drift once per sample.
pub fn invariance_residuals(
    measure: &EmpiricalMeasure,
    phis: &[CylinderFunction],
    grid: &GridSpec,
    params: &FluidParams,
    noise: &NoiseSpec,
) -> Result<Vec<Estimate>> {
    for phi in phis {
        if !phi.is_bounded() {
            return Err(LabError::Config(format!(
                "cylinder function {} is not in C_b^2; invariance is only tested on bounded functions",
                phi.name
            )));
        }
        phi.check_cutoff(measure.cutoff())?;
    }
    let per_sample: Vec<Vec<f64>> = measure
        .samples
        .par_iter()
        .map(|x| {
            let drift = fluid::drift(x, grid, params)?;
            phis.iter().map(|phi| phi.generator_with_drift(x, &drift, noise)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..phis.len())
        .map(|j| {
            let col: Vec<f64> = per_sample.iter().map(|row| row[j]).collect();
            batch_means(&col, DEFAULT_BATCHES)
        })
        .collect())
}

/// `I_p(x)` and `||x||_V` for every sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleObservables {
    pub ip: Vec<f64>,
    pub norm_v: Vec<f64>,
}

pub fn sample_observables(
    measure: &EmpiricalMeasure,
    grid: &GridSpec,
    params: &FluidParams,
) -> Result<SampleObservables> {
    let pairs: Vec<(f64, f64)> = measure
        .samples
        .par_iter()
        .map(|x| Ok((dissipation_ip(x, grid, params.p)?, x.norm_v())))
        .collect::<Result<_>>()?;
    Ok(SampleObservables { ip: pairs.iter().map(|p| p.0).collect(), norm_v: pairs.iter().map(|p| p.1).collect() })
}

/// One-sided 95% normal quantile.
const Z95: f64 = 1.6448536269514722;

/// Both sides of the moment recursion for one `k`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentEntry {
    pub k: u32,
    /// `2 nu0 (p-1) int I_p (1 + ||x||_V^2)^{pk/2}`.
    pub lhs: Estimate,
    /// `(tr(-A)Q + pk ||Q||_{L(V)}) int (1 + ||x||_V^2)^{pk/2}`.
    pub rhs: Estimate,
    /// Paired difference `lhs - rhs`.
    pub difference: Estimate,
    /// One-sided 95% upper confidence bound of the difference.
    pub upper_95: f64,
    /// Not contradicted at 95%: `difference - 1.645 se <= 0`.
    pub pass: bool,
    /// Confirmed at 95%: `upper_95 <= 0`.
    pub confirmed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub entries: Vec<MomentEntry>,
    pub samples: usize,
}

impl MomentReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn all_confirmed(&self) -> bool {
        self.entries.iter().all(|e| e.confirmed)
    }
}

pub fn moment_inequality_report(
    measure: &EmpiricalMeasure,
    k_max: u32,
    grid: &GridSpec,
    params: &FluidParams,
    noise: &NoiseSpec,
) -> Result<MomentReport> {
    let obs = sample_observables(measure, grid, params)?;
    Ok(moment_report_from(&obs, k_max, params, noise))
}

pub fn moment_report_from(
    obs: &SampleObservables,
    k_max: u32,
    params: &FluidParams,
    noise: &NoiseSpec,
) -> MomentReport {
    let p = params.p;
    let a = 2.0 * params.nu0 * (p - 1.0);
    let entries = (0..=k_max)
        .map(|k| {
            let c = noise.tr_aq + p * k as f64 * noise.op_qv;
            let w: Vec<f64> = obs.norm_v.iter().map(|v| (1.0 + v * v).powf(0.5 * p * k as f64)).collect();
            let lhs: Vec<f64> = obs.ip.iter().zip(&w).map(|(i, w)| a * i * w).collect();
            let diff: Vec<f64> = lhs.iter().zip(&w).map(|(l, w)| l - c * w).collect();
            let wm = batch_means(&w, DEFAULT_BATCHES);
            let difference = batch_means(&diff, DEFAULT_BATCHES);
            let se = if difference.std_error.is_finite() { difference.std_error } else { 0.0 };
            let upper_95 = difference.estimate + Z95 * se;
            MomentEntry {
                k,
                lhs: batch_means(&lhs, DEFAULT_BATCHES),
                rhs: Estimate { estimate: c * wm.estimate, std_error: c * wm.std_error },
                difference,
                upper_95,
                pass: difference.estimate - Z95 * se <= 0.0,
                confirmed: upper_95 <= 0.0,
            }
        })
        .collect();
    MomentReport { entries, samples: obs.ip.len() }
}

/// Monte Carlo estimate of `int I_p e^{eps ||x||_V^p} dmu`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpMoment {
    pub eps: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub eps_star: f64,
}

pub fn exponential_moment(
    measure: &EmpiricalMeasure,
    eps: f64,
    eps_star: f64,
    grid: &GridSpec,
    params: &FluidParams,
) -> Result<ExpMoment> {
    let obs = sample_observables(measure, grid, params)?;
    exponential_moment_from(&obs, eps, eps_star, params)
}

/// Overflowing exponentials give an infinite estimate.
pub fn exponential_moment_from(
    obs: &SampleObservables,
    eps: f64,
    eps_star: f64,
    params: &FluidParams,
) -> Result<ExpMoment> {
    if !(eps > 0.0) {
        return Err(LabError::Domain(format!("eps must be positive, got {eps}")));
    }
    let vals: Vec<f64> = obs.ip.iter().zip(&obs.norm_v).map(|(i, v)| i * (eps * v.powf(params.p)).exp()).collect();
    let est = batch_means(&vals, DEFAULT_BATCHES);
    let (estimate, std_error) =
        if est.estimate.is_finite() { (est.estimate, est.std_error) } else { (f64::INFINITY, f64::INFINITY) };
    Ok(ExpMoment { eps, estimate, std_error, eps_star })
}

/// Plain mean of `I_p` over the samples, the `eps -> 0` limit.
pub fn mean_ip(obs: &SampleObservables) -> f64 {
    pairwise_sum(&obs.ip) / obs.ip.len() as f64
}
