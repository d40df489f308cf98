use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::noise::NoiseSpec;
use crate::error::{LabError, Result};
use crate::fluid::{self, FluidParams};
use crate::io::CsvTable;
use crate::rng::{generator, Stream};
use crate::spectral::{dissipation_ip, sobolev_norm, GridSpec, SpectralState};

/// Time-stepping scheme. Only the tamed explicit Euler scheme is provided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TamedEuler,
}

/// Everything needed to reproduce one Galerkin trajectory.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub params: FluidParams,
    pub noise: NoiseSpec,
    pub grid: GridSpec,
    pub dt: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub record_stride: usize,
    /// Keep full coefficient snapshots at record times.
    pub snapshots: bool,
}

impl SimConfig {
    pub fn new(
        params: FluidParams,
        noise: NoiseSpec,
        grid: GridSpec,
        dt: f64,
        horizon: f64,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            params,
            noise,
            grid,
            dt,
            horizon,
            scheme: Scheme::TamedEuler,
            seed,
            record_stride: 1,
            snapshots: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.record_stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_snapshots(mut self, on: bool) -> Self {
        self.snapshots = on;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        self.horizon = horizon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(LabError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt) {
            return Err(LabError::Config(format!("horizon T = {} must be at least dt = {}", self.horizon, self.dt)));
        }
        if self.record_stride == 0 {
            return Err(LabError::Config("record_stride must be at least 1".into()));
        }
        if self.noise.cutoff != self.grid.cutoff() {
            return Err(LabError::Config(format!(
                "noise cutoff {} does not match grid cutoff {}",
                self.noise.cutoff,
                self.grid.cutoff()
            )));
        }
        self.grid.require_cubic("the Galerkin drift")
    }

    pub fn cutoff(&self) -> usize {
        self.grid.cutoff()
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Galerkin drift `A_{p,n}(u) + B_n(u)`.
pub fn drift(state: &SpectralState, grid: &GridSpec, params: &FluidParams) -> Result<SpectralState> {
    fluid::drift(state, grid, params)
}

/// One tamed Euler step
/// `u+ = u + dt F(u) / (1 + dt ||F(u)||_H) + sum_k sigma_k dW_k e_k`.
///
/// `increments[i]` is the Brownian increment (variance `dt`) of the mode at
/// storage position `i`; it is scaled by `sigma_k` here.
pub fn tamed_step(state: &SpectralState, dt: f64, increments: &[f64], config: &SimConfig) -> Result<SpectralState> {
    if increments.len() != state.dim() {
        return Err(LabError::Config(format!("expected {} noise increments, got {}", state.dim(), increments.len())));
    }
    let f = drift(state, &config.grid, &config.params).map_err(|e| match e {
        LabError::Domain(detail) => LabError::Blowup { time: f64::NAN, detail: format!("drift overflow: {detail}") },
        other => other,
    })?;
    let tame = dt / (1.0 + dt * f.norm_h());
    let mut next = state.clone();
    for (i, a) in next.coeffs_mut().iter_mut().enumerate() {
        *a += tame * f.coeffs()[i] + config.noise.sigma[i] * increments[i];
    }
    if !next.is_finite() {
        return Err(LabError::Blowup { time: f64::NAN, detail: format!("non-finite coefficient (dt = {dt})") });
    }
    Ok(next)
}

/// Draws the per-mode Brownian increments of one step, in storage order.
pub(crate) fn draw_increments<R: Rng>(rng: &mut R, dt: f64, out: &mut [f64]) {
    let sd = dt.sqrt();
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x = sd * z;
    }
}

fn with_time(err: LabError, time: f64, config: &SimConfig, last: Option<String>) -> LabError {
    match err {
        LabError::Blowup { detail, .. } => LabError::Blowup {
            time,
            detail: format!(
                "{detail}; n = {}, dt = {}, last finite observables: {}",
                config.cutoff(),
                config.dt,
                last.unwrap_or_else(|| "none".into())
            ),
        },
        other => other,
    }
}

/// Observables recorded along a trajectory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub norm_h: Vec<f64>,
    pub norm_v: Vec<f64>,
    pub norm_1p: Vec<f64>,
    pub ip: Vec<f64>,
    /// Left-point Riemann sum of `I_p(u_s)` over the steps taken so far.
    pub int_ip: Vec<f64>,
    pub snapshots: Option<Vec<SpectralState>>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut header: Vec<String> =
            ["t", "normH", "normV", "norm1p", "Ip", "intIp"].iter().map(|s| s.to_string()).collect();
        if let Some(first) = self.snapshots.as_ref().and_then(|s| s.first()) {
            header.extend(first.modes().modes().iter().map(|k| format!("a_{}_{}", k.k1, k.k2)));
        }
        let rows = (0..self.len())
            .map(|i| {
                let mut row =
                    vec![self.times[i], self.norm_h[i], self.norm_v[i], self.norm_1p[i], self.ip[i], self.int_ip[i]];
                if let Some(s) = &self.snapshots {
                    row.extend_from_slice(s[i].coeffs());
                }
                row
            })
            .collect();
        CsvTable { header, rows }
    }
}

/// Integrates the Galerkin SDE with the trajectory's own noise stream
/// (`replica = 0` is the canonical trajectory of a configuration).
pub fn simulate(config: &SimConfig, initial: &SpectralState) -> Result<TrajectoryRecord> {
    simulate_replica(config, initial, 0)
}

/// As [`simulate`], with the noise generator derived from `(seed, replica)`.
pub fn simulate_replica(config: &SimConfig, initial: &SpectralState, replica: u64) -> Result<TrajectoryRecord> {
    config.validate()?;
    config.grid.check_state(initial)?;
    let p = config.params.p;
    let mut rng = generator(config.seed, Stream::Noise, replica);
    let mut inc = vec![0.0; initial.dim()];
    let mut rec = TrajectoryRecord { snapshots: config.snapshots.then(Vec::new), ..Default::default() };
    let mut u = initial.clone();
    let mut integral = 0.0;
    let steps = config.steps();
    let mut last: Option<String> = None;
    for j in 0..=steps {
        let t = j as f64 * config.dt;
        let ip = dissipation_ip(&u, &config.grid, p)?;
        if j % config.record_stride == 0 || j == steps {
            rec.times.push(t);
            rec.norm_h.push(u.norm_h());
            rec.norm_v.push(u.norm_v());
            rec.norm_1p.push(sobolev_norm(&u, &config.grid, 1, p)?);
            rec.ip.push(ip);
            rec.int_ip.push(integral);
            if let Some(s) = rec.snapshots.as_mut() {
                s.push(u.clone());
            }
            last = Some(format!("normH = {}, normV = {}, Ip = {}", u.norm_h(), u.norm_v(), ip));
        }
        if j == steps {
            break;
        }
        integral += config.dt * ip;
        draw_increments(&mut rng, config.dt, &mut inc);
        u = tamed_step(&u, config.dt, &inc, config).map_err(|e| with_time(e, t + config.dt, config, last.clone()))?;
    }
    Ok(rec)
}

/// Independent replicas run on the current rayon pool, returned in replica order.
pub fn simulate_batch(config: &SimConfig, initial: &SpectralState, replicas: usize) -> Result<Vec<TrajectoryRecord>> {
    (0..replicas as u64).into_par_iter().map(|r| simulate_replica(config, initial, r)).collect()
}

/// Two trajectories driven by one noise path.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledRecord {
    pub times: Vec<f64>,
    /// `||u_t - v_t||_H` at record times.
    pub norm_z: Vec<f64>,
    pub initial_separation: f64,
    pub final_u: SpectralState,
    pub final_v: SpectralState,
}

impl CoupledRecord {
    pub fn to_csv(&self) -> CsvTable {
        CsvTable {
            header: vec!["t".into(), "normZ".into()],
            rows: self.times.iter().zip(&self.norm_z).map(|(t, z)| vec![*t, *z]).collect(),
        }
    }
}

/// Runs the synchronous coupling, calling `observe(t, u, v)` at every record time.
pub(crate) fn run_coupled(
    config: &SimConfig,
    x: &SpectralState,
    y: &SpectralState,
    replica: u64,
    mut observe: impl FnMut(f64, &SpectralState, &SpectralState),
) -> Result<(SpectralState, SpectralState)> {
    config.validate()?;
    config.grid.check_state(x)?;
    config.grid.check_state(y)?;
    let mut rng = generator(config.seed, Stream::Noise, replica);
    let mut inc = vec![0.0; x.dim()];
    let (mut u, mut v) = (x.clone(), y.clone());
    let steps = config.steps();
    for j in 0..=steps {
        let t = j as f64 * config.dt;
        if j % config.record_stride == 0 || j == steps {
            observe(t, &u, &v);
        }
        if j == steps {
            break;
        }
        draw_increments(&mut rng, config.dt, &mut inc);
        let wrap = |e| with_time(e, t + config.dt, config, None);
        u = tamed_step(&u, config.dt, &inc, config).map_err(wrap)?;
        v = tamed_step(&v, config.dt, &inc, config).map_err(wrap)?;
    }
    Ok((u, v))
}

/// Synchronous coupling: `x` and `y` advanced with identical increments.
pub fn couple(config: &SimConfig, x: &SpectralState, y: &SpectralState) -> Result<CoupledRecord> {
    couple_replica(config, x, y, 0)
}

pub fn couple_replica(config: &SimConfig, x: &SpectralState, y: &SpectralState, replica: u64) -> Result<CoupledRecord> {
    let mut times = Vec::new();
    let mut norm_z = Vec::new();
    let (final_u, final_v) = run_coupled(config, x, y, replica, |t, u, v| {
        times.push(t);
        norm_z.push(u.sub(v).expect("same cutoff").norm_h());
    })?;
    Ok(CoupledRecord { times, norm_z, initial_separation: x.sub(y)?.norm_h(), final_u, final_v })
}

/// A seeded random state with `||x||_V = norm_v`.
pub fn random_initial(cutoff: usize, norm_v: f64, seed: u64) -> Result<SpectralState> {
    let mut rng = generator(seed, Stream::InitialState, 0);
    let s = SpectralState::random(cutoff, 1.0, &mut rng)?;
    Ok(s.scaled(norm_v / s.norm_v()))
}
