//! The `plaw` command line: TOML experiment files in, CSV and JSON reports out.

mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

pub use config::{
    DiscretizationSection, ExperimentConfig, ExperimentSection, FluidSection, InitialState, NoiseSection, OutputSection,
};

use crate::error::{LabError, Result};
use crate::fluid::{fit_constants, random_corpus, verify_corpus, FluidParams, OperatorConstants};
use crate::io::{to_json_string, write_atomic, CsvTable};
use crate::kolmogorov::{
    analysis_constants, estimate_invariant_measure, exponential_moment_from, gradient_ratio_experiment,
    invariance_residuals, moment_report_from, random_direction, sample_observables, standard_suite, EmpiricalMeasure,
};
use crate::sde::{couple, random_initial, simulate};
use crate::spectral::SpectralState;

/// Exit statuses.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

/// Invariance residuals are accepted within this many standard errors.
pub const INVARIANCE_BAND: f64 = 3.0;

#[derive(Debug, Parser)]
#[command(name = "plaw", version, about = "Stochastic power-law fluid lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Master seed; overrides `[experiment] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the operator identities and inequalities on a random corpus.
    Verify,
    /// Integrate one trajectory and write its observables.
    Simulate,
    /// Sample the invariant measure from one long trajectory.
    Measure,
    /// Infinitesimal invariance residuals of bounded cylinder functions.
    Invariance,
    /// Moment recursion inequalities under the sampled measure.
    Moments,
    /// Exponential moments on a ladder of eps values.
    Expmoments,
    /// Synchronous coupling and the semigroup gradient probe.
    Couple,
    /// Exponent schedule, threshold p*, and the constants C_p, K_p, eps*.
    Constants,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Measure => "measure",
            Command::Invariance => "invariance",
            Command::Moments => "moments",
            Command::Expmoments => "expmoments",
            Command::Couple => "couple",
            Command::Constants => "constants",
        }
    }
}

pub fn exit_code(err: &LabError) -> i32 {
    match err {
        LabError::Blowup { .. } => EXIT_BLOWUP,
        _ => EXIT_CONFIG,
    }
}

/// Wrapper embedding provenance in every JSON report.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config_hash: &'a str,
    command: &'static str,
    pass: bool,
    report: T,
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    out: PathBuf,
    command: Command,
}

impl Run<'_> {
    fn json<T: Serialize>(&self, name: &str, pass: bool, report: T) -> Result<()> {
        let env =
            Envelope { version: crate::VERSION, config_hash: &self.hash, command: self.command.name(), pass, report };
        write_atomic(&self.out.join(name), to_json_string(&env)?.as_bytes())
    }

    fn csv(&self, name: &str, table: &CsvTable) -> Result<()> {
        let text = format!("# {} config_hash={}\n{}", crate::VERSION, self.hash, table.render());
        write_atomic(&self.out.join(name), text.as_bytes())
    }

    fn initial(&self) -> Result<SpectralState> {
        let e = &self.cfg.experiment;
        match e.initial {
            InitialState::Zero => SpectralState::zeros(self.cfg.discretization.n),
            InitialState::Random => random_initial(self.cfg.discretization.n, e.initial_norm_v, e.seed),
        }
    }

    fn shear_params(&self) -> Result<FluidParams> {
        FluidParams::new(self.cfg.fluid.p, self.cfg.fluid.nu0)
    }

    fn measure(&self) -> Result<EmpiricalMeasure> {
        let sim = self.cfg.sim_config()?;
        let mut m =
            estimate_invariant_measure(&sim, &self.initial()?, self.cfg.experiment.burn_in, self.cfg.experiment.thin)?;
        m.metadata.config_hash = self.hash.clone();
        Ok(m)
    }
}

/// Parses the configuration, applies flag overrides, and runs `command`.
///
/// Returns the process exit status.
pub fn execute(cli: &Cli) -> i32 {
    match prepare(cli).and_then(|(cfg, workers)| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| LabError::Config(format!("cannot start {workers} workers: {e}")))?;
        pool.install(|| run(&cfg, cli.command))
    }) {
        Ok(pass) => {
            if pass {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("plaw: {e}");
            exit_code(&e)
        }
    }
}

fn prepare(cli: &Cli) -> Result<(ExperimentConfig, usize)> {
    let path = cli.config.as_ref().ok_or_else(|| LabError::Config("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    let workers = match cli.workers {
        Some(0) => return Err(LabError::Config("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    Ok((cfg, workers))
}

/// Runs one command on the current rayon pool; `Ok(false)` means a check failed.
pub fn run(cfg: &ExperimentConfig, command: Command) -> Result<bool> {
    cfg.validate()?;
    let run = Run { cfg, hash: cfg.hash(), out: cfg.output.dir.clone(), command };
    std::fs::create_dir_all(&run.out)?;
    write_atomic(&run.out.join("config.effective.toml"), cfg.to_toml().as_bytes())?;
    match command {
        Command::Verify => run_verify(&run),
        Command::Simulate => run_simulate(&run),
        Command::Measure => run_measure(&run),
        Command::Invariance => run_invariance(&run),
        Command::Moments => run_moments(&run),
        Command::Expmoments => run_expmoments(&run),
        Command::Couple => run_couple(&run),
        Command::Constants => run_constants(&run),
    }
}

fn run_verify(run: &Run) -> Result<bool> {
    let cfg = run.cfg;
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let corpus = random_corpus(cfg.discretization.n, cfg.experiment.corpus_size, cfg.experiment.seed)?;
    let fitted = fit_constants(&corpus, &grid, &params)?;
    let constants = OperatorConstants { monotone: OperatorConstants::analytic_monotone(&params), ..fitted };
    let result = verify_corpus(&corpus, &grid, &params, &constants)?;
    let pass = result.all_pass();
    run.json("verify.json", pass, &result)?;
    Ok(pass)
}

fn run_simulate(run: &Run) -> Result<bool> {
    let sim = run.cfg.sim_config()?;
    let rec = simulate(&sim, &run.initial()?)?;
    run.csv("trajectory.csv", &rec.to_csv())?;
    Ok(true)
}

fn run_measure(run: &Run) -> Result<bool> {
    let m = run.measure()?;
    m.save(&run.out, "measure")?;
    let means = m.coordinate_means();
    let modes: Vec<String> = m.samples[0].modes().modes().iter().map(|k| k.to_string()).collect();
    let worst = means.iter().map(|e| e.z_score().abs()).fold(0.0, f64::max);
    run.json(
        "measure_summary.json",
        true,
        json!({
            "samples": m.len(),
            "modes": modes,
            "coordinate_means": means,
            "max_abs_z": worst,
            "mean_norm_v_sq": crate::stats::mean(&m.samples.iter().map(|s| s.norm_v().powi(2)).collect::<Vec<_>>()),
        }),
    )?;
    Ok(true)
}

fn run_invariance(run: &Run) -> Result<bool> {
    let params = run.shear_params()?;
    let m = run.measure()?;
    let suite = standard_suite();
    let res = invariance_residuals(&m, &suite, &run.cfg.grid()?, &params, &run.cfg.noise()?)?;
    let rows: Vec<_> = suite
        .iter()
        .zip(&res)
        .map(|(phi, r)| {
            json!({
                "phi": phi.name,
                "estimate": r.estimate,
                "std_error": r.std_error,
                "z": r.z_score(),
                "pass": r.z_score().abs() <= INVARIANCE_BAND,
            })
        })
        .collect();
    let pass = res.iter().all(|r| r.z_score().abs() <= INVARIANCE_BAND);
    run.json("invariance.json", pass, json!({ "samples": m.len(), "band": INVARIANCE_BAND, "functions": rows }))?;
    Ok(pass)
}

fn run_moments(run: &Run) -> Result<bool> {
    let params = run.shear_params()?;
    let m = run.measure()?;
    let obs = sample_observables(&m, &run.cfg.grid()?, &params)?;
    let report = moment_report_from(&obs, run.cfg.experiment.k_max, &params, &run.cfg.noise()?);
    let pass = report.all_confirmed();
    run.json("moments.json", pass, &report)?;
    Ok(pass)
}

fn run_expmoments(run: &Run) -> Result<bool> {
    let params = run.shear_params()?;
    let grid = run.cfg.grid()?;
    let noise = run.cfg.noise()?;
    let constants = analysis_constants(&params, &noise, &grid, &run.cfg.search())?;
    let m = run.measure()?;
    let obs = sample_observables(&m, &grid, &params)?;
    let ladder = run
        .cfg
        .experiment
        .eps_factors
        .iter()
        .map(|f| exponential_moment_from(&obs, f * constants.eps_star, constants.eps_star, &params))
        .collect::<Result<Vec<_>>>()?;
    let finite = ladder.iter().all(|e| e.estimate.is_finite());
    let mut sorted = ladder.clone();
    sorted.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let monotone = sorted.windows(2).all(|w| w[1].estimate >= w[0].estimate);
    let pass = finite && monotone;
    run.json(
        "expmoments.json",
        pass,
        json!({ "eps_star": constants.eps_star, "c_p_estimate": constants.c_p_estimate, "finite": finite,
                "monotone": monotone, "ladder": ladder }),
    )?;
    Ok(pass)
}

/// Largest ratio spread across separations accepted by `couple`.
pub const STABILITY_FACTOR: f64 = 2.0;

fn run_couple(run: &Run) -> Result<bool> {
    let sim = run.cfg.sim_config()?;
    let x = run.initial()?;
    let e = &run.cfg.experiment;
    let report = gradient_ratio_experiment(&sim, &x, &e.separations, &standard_suite()[0], e.replicas)?;
    let y = x.axpy(e.separations[0], &random_direction(x.cutoff(), sim.seed)?)?;
    let rec = couple(&sim, &y, &x)?;
    run.csv("coupled.csv", &rec.to_csv())?;
    let pass = report.all_finite() && report.residuals_nonnegative() && report.stability_factor <= STABILITY_FACTOR;
    run.json("couple.json", pass, &report)?;
    Ok(pass)
}

fn run_constants(run: &Run) -> Result<bool> {
    let params = run.shear_params()?;
    let c = analysis_constants(&params, &run.cfg.noise()?, &run.cfg.grid()?, &run.cfg.search())?;
    run.json("constants.json", true, &c)?;
    Ok(true)
}

/// Parses a CSV written by the CLI, skipping the provenance comment line.
pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    CsvTable::parse(&body)
}
