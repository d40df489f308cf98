//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`. Exits non-zero if any criterion fails.

use std::path::Path;
use std::time::Instant;

use powerlaw_lab::cli::{self, Command, ExperimentConfig};
use powerlaw_lab::fluid::{
    fit_constants, random_corpus, verify_corpus, CorpusVerification, FluidParams, OperatorConstants,
};
use powerlaw_lab::kolmogorov::{
    analysis_constants, condition_holds, estimate_invariant_measure, exponential_moment_from, exponents,
    gradient_ratio_experiment, invariance_residuals, moment_report_from, p_star, sample_observables, standard_suite,
    threshold_cubic, EmpiricalMeasure, SearchConfig,
};
use powerlaw_lab::sde::{random_initial, simulate, NoiseSpec, SimConfig};
use powerlaw_lab::spectral::{GridSpec, SpectralState, WaveIndex};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn corpus_run(p: f64, grid: &GridSpec, states: &[SpectralState]) -> CorpusVerification {
    let params = FluidParams::diagnostic(p, 1.0).unwrap();
    let fitted = fit_constants(states, grid, &params).unwrap();
    let constants = OperatorConstants { monotone: OperatorConstants::analytic_monotone(&params), ..fitted };
    verify_corpus(states, grid, &params, &constants).unwrap()
}

fn failures(v: &CorpusVerification, names: &[&str]) -> (usize, String) {
    let mut total = 0;
    let mut parts = Vec::new();
    for name in names {
        let c = v.check(name).unwrap_or_else(|| panic!("missing check {name}"));
        total += c.failed;
        parts.push(format!("{name} {}/{} pass", c.passed, v.states));
    }
    (total, parts.join(", "))
}

fn criterion_1() -> Outcome {
    let grid = GridSpec::new(8, 25).unwrap();
    let states = random_corpus(8, 1000, 1).unwrap();
    let start = Instant::now();
    let v = corpus_run(1.7, &grid, &states);
    let names = ["b_weak_form", "g_energy_orthogonality", "g_antisymmetry", "j_enstrophy"];
    let (failed, detail) = failures(&v, &names);
    let secs = start.elapsed().as_secs_f64();
    outcome(failed == 0 && secs < 60.0, format!("{detail}; {secs:.1}s (target < 60s)"))
}

fn criterion_2() -> Outcome {
    let grid = GridSpec::for_cutoff(8).unwrap();
    let states = random_corpus(8, 1000, 2).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.2, 1.5, 1.7, 1.9] {
        let v = corpus_run(p, &grid, &states);
        let d = v.check("d_stokes_testing").unwrap();
        let f = v.check("f_ap_norm").unwrap();
        ok &= d.failed == 0 && f.failed == 0 && d.inconclusive == 0 && f.inconclusive == 0;
        parts.push(format!("p={p}: (d) {} viol, (f) {} viol", d.failed, f.failed));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let grid = GridSpec::for_cutoff(8).unwrap();
    let states = random_corpus(8, 1000, 3).unwrap();
    let v = corpus_run(2.0, &grid, &states);
    let c = v.check("a_korn_l2_ratio").unwrap();
    let worst = &c.worst;
    let rel = (worst.lhs - worst.rhs).abs() / worst.lhs.abs();
    outcome(c.failed == 0, format!("{} states, worst |ratio - sqrt2| relative {rel:.2e}", c.passed))
}

fn criterion_4() -> Outcome {
    let ps = p_star();
    let mut disagreements = 0;
    for i in 0..10_000 {
        let p = 1.0 + (i as f64 + 0.5) / 10_000.0;
        if condition_holds(p) != (threshold_cubic(p) < 0.0) {
            disagreements += 1;
        }
    }
    let e = exponents(1.8);
    let expect = [1.0 + 0.04 / 3.6, 7.2 / 3.4, 180.0, 3.36 / 3.56, 3.6 / 3.36];
    let got = [e.r, e.q, e.q_star, e.theta, e.beta];
    let err = got.iter().zip(&expect).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
    let ok = (ps - 1.60407).abs() <= 1e-4 && disagreements == 0 && err <= 1e-12;
    outcome(ok, format!("p* = {ps:.10}, disagreements {disagreements}/10000, max rel err at p=1.8 {err:.1e}"))
}

fn criterion_5() -> Outcome {
    let n = 3;
    let k = WaveIndex::new(1, 2).unwrap();
    let t_end = 1.0;
    let exact = (-0.5 * k.norm_sq() as f64 * t_end).exp();
    let mut errors = Vec::new();
    for j in 0..4 {
        let dt = 0.01 / 2f64.powi(j);
        let cfg = SimConfig::new(
            FluidParams::diagnostic(2.0, 1.0).unwrap(),
            NoiseSpec::silent(n).unwrap(),
            GridSpec::for_cutoff(n).unwrap(),
            dt,
            t_end,
            0,
        )
        .unwrap()
        .with_snapshots(true);
        let rec = simulate(&cfg, &SpectralState::unit(n, k).unwrap()).unwrap();
        let last = rec.snapshots.unwrap().pop().unwrap();
        errors.push((last.coeff(k).unwrap() - exact).abs());
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = orders.iter().all(|o| (0.8..=1.2).contains(o));
    outcome(ok, format!("errors {}, observed orders {orders:.3?}", sci(&errors)))
}

fn criterion_6() -> Outcome {
    let n = 6;
    let dt = 0.01;
    let params = FluidParams::new(1.7, 1.0).unwrap();
    let mut worst_h: f64 = f64::NEG_INFINITY;
    let mut worst_e: f64 = f64::NEG_INFINITY;
    for (seed, norm) in [(1, 1.0), (2, 3.0), (3, 10.0)] {
        let cfg =
            SimConfig::new(params, NoiseSpec::silent(n).unwrap(), GridSpec::for_cutoff(n).unwrap(), dt, 5.0, seed)
                .unwrap();
        let rec = simulate(&cfg, &random_initial(n, norm, seed).unwrap()).unwrap();
        let energy: Vec<f64> = (0..rec.len())
            .map(|i| rec.norm_v[i].powi(2) + 2.0 * params.nu0 * (params.p - 1.0) * rec.int_ip[i])
            .collect();
        for i in 1..rec.len() {
            worst_h = worst_h.max(rec.norm_h[i] - rec.norm_h[i - 1]);
            worst_e = worst_e.max(energy[i] - energy[i - 1]);
        }
    }
    let (tol_h, tol_e) = (10.0 * dt * dt, 50.0 * dt * dt);
    outcome(
        worst_h <= tol_h && worst_e <= tol_e,
        format!("max step increase: normH {worst_h:.2e} (tol {tol_h:.0e}), V-energy {worst_e:.2e} (tol {tol_e:.0e})"),
    )
}

struct Equilibrium {
    params: FluidParams,
    noise: NoiseSpec,
    grid: GridSpec,
    measure: EmpiricalMeasure,
    seconds: f64,
}

fn equilibrium() -> Equilibrium {
    let n = 8;
    let params = FluidParams::new(1.7, 1.0).unwrap();
    let noise = NoiseSpec::new(n, 1.0, 2.5).unwrap();
    let grid = GridSpec::new(n, 32).unwrap();
    let cfg = SimConfig::new(params, noise.clone(), grid.clone(), 0.01, 2200.0, 7).unwrap();
    let start = Instant::now();
    let measure = estimate_invariant_measure(&cfg, &SpectralState::zeros(n).unwrap(), 200.0, 10).unwrap();
    Equilibrium { params, noise, grid, measure, seconds: start.elapsed().as_secs_f64() }
}

fn criterion_7(eq: &Equilibrium) -> Outcome {
    let start = Instant::now();
    let obs = sample_observables(&eq.measure, &eq.grid, &eq.params).unwrap();
    let report = moment_report_from(&obs, 2, &eq.params, &eq.noise);
    let secs = eq.seconds + start.elapsed().as_secs_f64();
    let parts: Vec<String> = report
        .entries
        .iter()
        .map(|e| {
            format!("k={}: lhs {:.3} rhs {:.3} upper95(lhs-rhs) {:.3}", e.k, e.lhs.estimate, e.rhs.estimate, e.upper_95)
        })
        .collect();
    let ok = report.entries.iter().all(|e| e.confirmed) && secs < 1800.0;
    outcome(ok, format!("{} samples; {}; {secs:.0}s (target < 1800s)", report.samples, parts.join("; ")))
}

fn criterion_8(eq: &Equilibrium) -> Outcome {
    let suite = standard_suite();
    let eq_res = invariance_residuals(&eq.measure, &suite, &eq.grid, &eq.params, &eq.noise).unwrap();
    let z_eq: Vec<f64> = eq_res.iter().map(|r| r.z_score()).collect();

    // negative control: no burn-in, started far from equilibrium
    let cfg = SimConfig::new(eq.params, eq.noise.clone(), eq.grid.clone(), 0.01, 5.0, 7).unwrap();
    let x0 = SpectralState::unit(8, WaveIndex::new(1, 0).unwrap()).unwrap().scaled(3.0);
    let control = estimate_invariant_measure(&cfg, &x0, 0.0, 1).unwrap();
    let ctl = invariance_residuals(&control, &suite, &eq.grid, &eq.params, &eq.noise).unwrap();
    let z_ctl: Vec<f64> = ctl.iter().map(|r| r.z_score()).collect();

    let ok = z_eq.iter().all(|z| z.abs() <= 3.0) && z_ctl.iter().any(|z| z.abs() > 3.0);
    outcome(ok, format!("equilibrated z {z_eq:.2?}; control z {z_ctl:.2?}"))
}

fn criterion_9(eq: &Equilibrium) -> Outcome {
    let n = 6;
    let params = FluidParams::new(1.7, 1.0).unwrap();
    let cfg =
        SimConfig::new(params, NoiseSpec::new(n, 0.1, 2.5).unwrap(), GridSpec::for_cutoff(n).unwrap(), 0.01, 1.0, 11)
            .unwrap()
            .with_stride(5)
            .unwrap();
    let x = random_initial(n, 1.0, 3).unwrap();
    let rep = gradient_ratio_experiment(&cfg, &x, &[1e-2, 1e-3, 1e-4], &standard_suite()[0], 32).unwrap();
    let rates: Vec<f64> = rep.separations.iter().map(|s| s.envelope_rate).collect();
    let coupling_ok = rep.all_finite() && rep.residuals_nonnegative() && rep.stability_factor <= 2.0;

    let search = SearchConfig::default();
    let constants = analysis_constants(&eq.params, &eq.noise, &eq.grid, &search).unwrap();
    let obs = sample_observables(&eq.measure, &eq.grid, &eq.params).unwrap();
    let ladder: Vec<f64> = [0.1, 0.25, 0.5, 1.0]
        .iter()
        .map(|f| {
            exponential_moment_from(&obs, f * constants.eps_star, constants.eps_star, &eq.params).unwrap().estimate
        })
        .collect();
    let ladder_ok = ladder.iter().all(|v| v.is_finite()) && ladder.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        coupling_ok && ladder_ok,
        format!(
            "ratio spread {:.4} across h, envelope rates {rates:.4?}, residuals >= 0: {}; eps* {:.3e}, ladder {}",
            rep.stability_factor,
            rep.residuals_nonnegative(),
            constants.eps_star,
            sci(&ladder)
        ),
    )
}

fn run_all(cfg: &ExperimentConfig, dir: &Path, workers: usize) -> Vec<(String, Vec<u8>)> {
    let mut cfg = cfg.clone();
    cfg.output.dir = dir.to_path_buf();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
    for command in [
        Command::Verify,
        Command::Simulate,
        Command::Measure,
        Command::Invariance,
        Command::Moments,
        Command::Expmoments,
        Command::Couple,
        Command::Constants,
    ] {
        pool.install(|| cli::run(&cfg, command)).unwrap();
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let cfg = ExperimentConfig::from_toml(
        "[fluid]\np = 1.7\n[discretization]\nn = 4\nhorizon = 20.0\n\
         [experiment]\nseed = 5\ninitial = \"random\"\nburn_in = 2.0\ncorpus_size = 40\nreplicas = 8\n\
         search_starts = 4\nsearch_iterations = 20\n",
    )
    .unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let a = run_all(&cfg, tmp.path(), 1);
    let b = run_all(&cfg, tmp.path(), 4);
    let c = run_all(&cfg, tmp.path(), 3);
    let same = a == b && b == c;
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    outcome(
        same && a.len() >= 12,
        format!("{} files byte-identical across runs with 1, 4 and 3 workers: {}", a.len(), names.join(" ")),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!("{} criterion {id} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    report(1, "exact identities", criterion_1());
    report(2, "explicit-constant inequalities", criterion_2());
    report(3, "Korn at p = 2", criterion_3());
    report(4, "analysis constants", criterion_4());
    report(5, "p = 2 decay and order", criterion_5());
    report(6, "deterministic dissipation", criterion_6());
    let eq = equilibrium();
    report(7, "moment inequalities", criterion_7(&eq));
    report(8, "infinitesimal invariance", criterion_8(&eq));
    report(9, "coupling stability", criterion_9(&eq));
    report(10, "reproducibility", criterion_10());
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
