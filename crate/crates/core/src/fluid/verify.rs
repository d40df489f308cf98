//! Numerical certification of the properties of the stress operator and the
//! convection term: Korn, weak form, monotonicity, Stokes testing, the `I_p`
//! lower bound, operator norms and the convection identities.

use rayon::prelude::*;
use serde::Serialize;

use super::operators::{apply_ap, apply_b, apply_stokes, stress_tensor, FluidParams};
use crate::error::{LabError, Result};
use crate::rng::{generator, Stream};
use crate::spectral::{
    derivative_magnitude, ip_from_fields, lp_norm, strain_fields, sym_gradient, GridSpec, SpectralState,
};

/// Relative tolerance for identities that are exact under quadrature.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Below this magnitude both sides of an inequality count as zero.
const NEGLIGIBLE: f64 = 1e-280;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// One check: measured left side, bound or reference right side, constant used.
#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub check_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: Option<f64>,
    pub pass: Option<bool>,
    pub tolerance: f64,
    pub status: Status,
    /// Informational entries are reported but never fail a run.
    pub gating: bool,
}

impl CheckEntry {
    fn identity(name: &str, lhs: f64, rhs: f64, scale: f64) -> Self {
        let ok = (lhs - rhs).abs() <= IDENTITY_TOL * scale || (lhs == rhs);
        Self::with_status(name, lhs, rhs, None, IDENTITY_TOL, if ok { Status::Pass } else { Status::Fail })
    }

    /// `lhs <= rhs` up to a relative slack.
    fn upper(name: &str, lhs: f64, rhs: f64, constant: Option<f64>, tol: f64) -> Self {
        let status = if !lhs.is_finite() || !rhs.is_finite() || (lhs.abs() < NEGLIGIBLE && rhs.abs() < NEGLIGIBLE) {
            Status::Inconclusive
        } else if lhs <= rhs + tol * lhs.abs().max(rhs.abs()) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self::with_status(name, lhs, rhs, constant, tol, status)
    }

    fn with_status(name: &str, lhs: f64, rhs: f64, constant: Option<f64>, tolerance: f64, status: Status) -> Self {
        let pass = match status {
            Status::Pass => Some(true),
            Status::Fail => Some(false),
            Status::Inconclusive => None,
        };
        Self { check_name: name.to_string(), lhs, rhs, constant, pass, tolerance, status, gating: true }
    }

    fn informational(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.check_name == name)
    }

    /// No gating entry failed.
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| !e.gating || e.status != Status::Fail)
    }
}

/// Constants for the inequalities whose constants are only known to exist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorConstants {
    /// Korn constant `K_p`.
    pub korn: f64,
    /// Monotonicity constant; `nu0 (p - 1)` is admissible analytically.
    pub monotone: f64,
    /// Constant in `||u||_{2,p}^2 <= C I_p(u) (1 + ||u||_{1,p})^{2-p}`.
    pub ip_lower: f64,
    /// Constant in `||A_p u + B u||_H <= C (1 + ||u||_V)^{(4-p)/2} I_p(u)^{1/2}`.
    pub combined: f64,
    /// Constant in `||B u||_H^2 <= C (1 + ||u||_V)^{(4-p)/2} I_p(u)^{1/2}`.
    pub squared_form: f64,
}

impl OperatorConstants {
    /// The monotonicity constant follows from the pointwise bound
    /// `DS(A)[B, B] >= nu0 (p-1) (1 + |A|^2)^{(p-2)/2} |B|^2` for `p < 2`.
    pub fn analytic_monotone(params: &FluidParams) -> f64 {
        params.nu0 * (params.p - 1.0).min(1.0)
    }
}

/// Per-state quantities shared by several checks.
struct Probe {
    state: SpectralState,
    ap: SpectralState,
    bu: SpectralState,
    eu: Vec<[f64; 3]>,
    grad_norm_p: f64,
    sym_norm_p: f64,
    grad_norm_2: f64,
    sym_norm_2: f64,
    norm_v: f64,
    norm_1p: f64,
    norm_2p: f64,
    ip: f64,
}

impl Probe {
    fn new(state: &SpectralState, grid: &GridSpec, params: &FluidParams) -> Result<Self> {
        let p = params.p;
        let eu = sym_gradient(state, grid)?.values().to_vec();
        let sym_mag: Vec<f64> = eu.iter().map(|t| (t[0] * t[0] + 2.0 * t[1] * t[1] + t[2] * t[2]).sqrt()).collect();
        let grad_mag = derivative_magnitude(grid, state, 1)?;
        let hess_mag = derivative_magnitude(grid, state, 2)?;
        let strain = strain_fields(grid, state);
        Ok(Self {
            state: state.clone(),
            ap: apply_ap(state, grid, params)?,
            bu: apply_b(state, state, grid)?,
            grad_norm_p: lp_norm(grid, &grad_mag, p),
            sym_norm_p: lp_norm(grid, &sym_mag, p),
            grad_norm_2: lp_norm(grid, &grad_mag, 2.0),
            sym_norm_2: lp_norm(grid, &sym_mag, 2.0),
            norm_v: state.norm_v(),
            norm_1p: lp_norm(grid, &grad_mag, p),
            norm_2p: lp_norm(grid, &hess_mag, p),
            ip: ip_from_fields(grid, &strain, p),
            eu,
        })
    }

    fn korn_ratio(&self) -> f64 {
        self.grad_norm_p / self.sym_norm_p
    }

    fn ip_lower_ratio(&self, p: f64) -> f64 {
        self.norm_2p.powi(2) / (self.ip * (1.0 + self.norm_1p).powf(2.0 - p))
    }

    fn growth(&self, p: f64) -> f64 {
        (1.0 + self.norm_v).powf(0.5 * (4.0 - p)) * self.ip.sqrt()
    }

    fn combined_ratio(&self, p: f64) -> f64 {
        self.ap.add(&self.bu).expect("same cutoff").norm_h() / self.growth(p)
    }

    fn squared_form_ratio(&self, p: f64) -> f64 {
        self.bu.norm_h().powi(2) / self.growth(p)
    }
}

fn frob_dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + 2.0 * a[1] * b[1] + a[2] * b[2]
}

/// `int (1 + |Eu|^2 + |Ev|^2)^{(p-2)/2} |Eu - Ev|^2` by quadrature.
fn monotone_integral(grid: &GridSpec, eu: &[[f64; 3]], ev: &[[f64; 3]], p: f64) -> f64 {
    let vals: Vec<f64> = eu
        .iter()
        .zip(ev)
        .map(|(a, b)| {
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            (1.0 + frob_dot(a, a) + frob_dot(b, b)).powf(0.5 * (p - 2.0)) * frob_dot(&d, &d)
        })
        .collect();
    grid.integrate(&vals)
}

fn monotone_lhs(pu: &Probe, pv: &Probe) -> Result<f64> {
    pu.ap.sub(&pv.ap)?.dot(&pu.state.sub(&pv.state)?)
}

/// Hoelder exponents `(2p/(2p-2), 2p/(2-p), 2)`; the middle one is infinite at `p = 2`.
pub fn holder_exponents(p: f64) -> [f64; 3] {
    let p2 = if p < 2.0 { 2.0 * p / (2.0 - p) } else { f64::INFINITY };
    let p1 = if p < 2.0 { 2.0 * p / (2.0 * p - 2.0) } else { 2.0 };
    [p1, p2, 2.0]
}

fn lp_or_max(grid: &GridSpec, mag: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        mag.iter().copied().fold(0.0, f64::max)
    } else {
        lp_norm(grid, mag, p)
    }
}

/// Runs checks (a) through (j) on the pair `(u, v)`.
///
/// The antisymmetry check uses `w = u`; the Hoelder check uses `w = u - v`.
pub fn verify_identities(
    u: &SpectralState,
    v: &SpectralState,
    grid: &GridSpec,
    params: &FluidParams,
    constants: &OperatorConstants,
) -> Result<VerificationReport> {
    if u.cutoff() != v.cutoff() {
        return Err(LabError::Config("states must share a cutoff".into()));
    }
    grid.check_state(u)?;
    grid.require_cubic("identity verification")?;
    let (p, nu0) = (params.p, params.nu0);
    let pu = Probe::new(u, grid, params)?;
    let pv = Probe::new(v, grid, params)?;
    let mut entries = Vec::new();

    // (a) Korn
    entries.push(CheckEntry::upper(
        "a_korn",
        pu.grad_norm_p,
        constants.korn * pu.sym_norm_p,
        Some(constants.korn),
        IDENTITY_TOL,
    ));
    entries.push(CheckEntry::identity(
        "a_korn_l2_ratio",
        pu.grad_norm_2,
        std::f64::consts::SQRT_2 * pu.sym_norm_2,
        pu.grad_norm_2,
    ));

    // (b) weak form of the stress divergence
    let ev = &pv.eu;
    let su: Vec<[f64; 3]> = pu.eu.iter().map(|e| stress_tensor(*e, params)).collect();
    let contraction: Vec<f64> = su.iter().zip(ev).map(|(s, e)| frob_dot(s, e)).collect();
    let weak_rhs = -grid.integrate(&contraction);
    let weak_lhs = pu.ap.dot(v)?;
    let s_l2 = grid.integrate(&su.iter().map(|s| frob_dot(s, s)).collect::<Vec<_>>()).sqrt();
    let ev_l2 = grid.integrate(&ev.iter().map(|e| frob_dot(e, e)).collect::<Vec<_>>()).sqrt();
    entries.push(CheckEntry::identity("b_weak_form", weak_lhs, weak_rhs, s_l2 * ev_l2));

    // (c) monotonicity
    let mono_lhs = monotone_lhs(&pu, &pv)?;
    let mono_int = monotone_integral(grid, &pu.eu, &pv.eu, p);
    entries.push(CheckEntry::upper(
        "c_monotonicity",
        mono_lhs,
        -constants.monotone * mono_int,
        Some(constants.monotone),
        IDENTITY_TOL,
    ));
    entries.push(CheckEntry::upper("c_monotone_sign", mono_lhs, 0.0, None, 0.0));

    // (d) testing with the Stokes operator
    let stokes_lhs = pu.ap.dot(&apply_stokes(u).scaled(-1.0))?;
    entries.push(CheckEntry::upper(
        "d_stokes_testing",
        stokes_lhs,
        -nu0 * (p - 1.0) * pu.ip,
        Some(nu0 * (p - 1.0)),
        IDENTITY_TOL,
    ));

    // (e) lower bound through I_p
    entries.push(CheckEntry::upper(
        "e_ip_lower_bound",
        pu.norm_2p.powi(2),
        constants.ip_lower * pu.ip * (1.0 + pu.norm_1p).powf(2.0 - p),
        Some(constants.ip_lower),
        IDENTITY_TOL,
    ));

    // (f) operator norm of A_p: constant of the proof, and the stated one
    let ap_sq = pu.ap.norm_h().powi(2);
    entries.push(CheckEntry::upper("f_ap_norm", ap_sq, 8.0 * nu0 * nu0 * pu.ip, Some(8.0 * nu0 * nu0), IDENTITY_TOL));
    entries.push(CheckEntry::upper("f_ap_norm_stated", ap_sq, nu0 * pu.ip, Some(nu0), IDENTITY_TOL).informational());

    // (g) convection identities
    let buv = apply_b(u, v, grid)?;
    entries.push(CheckEntry::identity("g_energy_orthogonality", buv.dot(v)?, 0.0, buv.norm_h() * v.norm_h()));
    let lhs = buv.dot(u)?;
    let rhs = -pu.bu.dot(v)?;
    entries.push(CheckEntry::identity(
        "g_antisymmetry",
        lhs,
        rhs,
        (buv.norm_h() * u.norm_h()).max(pu.bu.norm_h() * v.norm_h()),
    ));

    // (h) Hoelder bound with w = u - v
    let w = u.sub(v)?;
    let [p1, p2, p3] = holder_exponents(p);
    let trilinear = buv.dot(&w)?.abs();
    let bound = lp_or_max(grid, &derivative_magnitude(grid, u, 0)?, p1)
        * lp_or_max(grid, &derivative_magnitude(grid, v, 1)?, p2)
        * lp_or_max(grid, &derivative_magnitude(grid, &w, 0)?, p3);
    entries.push(CheckEntry::upper("h_holder", trilinear, bound, None, IDENTITY_TOL));

    // (i) drift norm growth, combined form and the squared form
    let growth = pu.growth(p);
    entries.push(CheckEntry::upper(
        "i_combined_norm",
        pu.ap.add(&pu.bu)?.norm_h(),
        constants.combined * growth,
        Some(constants.combined),
        IDENTITY_TOL,
    ));
    entries.push(
        CheckEntry::upper(
            "i_squared_form",
            pu.bu.norm_h().powi(2),
            constants.squared_form * growth,
            Some(constants.squared_form),
            IDENTITY_TOL,
        )
        .informational(),
    );

    // (j) enstrophy invariance
    let au = apply_stokes(u);
    entries.push(CheckEntry::identity("j_enstrophy", pu.bu.dot(&au.scaled(-1.0))?, 0.0, pu.bu.norm_h() * au.norm_h()));

    Ok(VerificationReport { entries })
}

/// Seeded random states with coefficients `N(0,1)/|k|` rescaled to a
/// log-uniform `V`-norm in `[0.1, 10]`.
pub fn random_corpus(cutoff: usize, count: usize, seed: u64) -> Result<Vec<SpectralState>> {
    use rand::Rng;
    (0..count as u64)
        .map(|i| {
            let mut rng = generator(seed, Stream::Corpus, i);
            let s = SpectralState::random(cutoff, 1.0, &mut rng)?;
            let target = 10f64.powf(rng.random_range(-1.0..1.0));
            Ok(s.scaled(target / s.norm_v()))
        })
        .collect()
}

/// Empirical constants over a corpus: the largest ratio for upper-bound
/// constants, the smallest for the monotonicity constant (consecutive pairs).
pub fn fit_constants(states: &[SpectralState], grid: &GridSpec, params: &FluidParams) -> Result<OperatorConstants> {
    if states.len() < 2 {
        return Err(LabError::Samples("constant fitting needs at least two states".into()));
    }
    let p = params.p;
    let probes: Vec<Probe> = states.par_iter().map(|s| Probe::new(s, grid, params)).collect::<Result<_>>()?;
    let max_of = |f: &dyn Fn(&Probe) -> f64| probes.iter().map(f).filter(|r| r.is_finite()).fold(0.0, f64::max);
    let mut monotone = f64::INFINITY;
    for pair in probes.windows(2) {
        let lhs = monotone_lhs(&pair[0], &pair[1])?;
        let int = monotone_integral(grid, &pair[0].eu, &pair[1].eu, p);
        if int > NEGLIGIBLE {
            monotone = monotone.min(-lhs / int);
        }
    }
    Ok(OperatorConstants {
        korn: max_of(&|pr| pr.korn_ratio()),
        monotone,
        ip_lower: max_of(&|pr| pr.ip_lower_ratio(p)),
        combined: max_of(&|pr| pr.combined_ratio(p)),
        squared_form: max_of(&|pr| pr.squared_form_ratio(p)),
    })
}

/// Aggregate over a corpus for one check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub check_name: String,
    pub gating: bool,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    /// Entry with the largest `lhs - rhs` relative to `max(|lhs|, |rhs|)`.
    pub worst: CheckEntry,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusVerification {
    pub states: usize,
    pub constants: OperatorConstants,
    pub checks: Vec<CheckSummary>,
}

impl CorpusVerification {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| !c.gating || c.failed == 0)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.check_name == name)
    }
}

fn slack(e: &CheckEntry) -> f64 {
    let scale = e.lhs.abs().max(e.rhs.abs());
    if scale == 0.0 {
        0.0
    } else if e.check_name.starts_with('a') && e.check_name.ends_with("ratio")
        || ["b_weak_form", "g_energy_orthogonality", "g_antisymmetry", "j_enstrophy"].contains(&e.check_name.as_str())
    {
        (e.lhs - e.rhs).abs() / scale
    } else {
        (e.lhs - e.rhs) / scale
    }
}

/// Verifies consecutive pairs `(states[i], states[i+1 mod len])`, in parallel
/// on the current rayon pool, merging in index order.
pub fn verify_corpus(
    states: &[SpectralState],
    grid: &GridSpec,
    params: &FluidParams,
    constants: &OperatorConstants,
) -> Result<CorpusVerification> {
    let n = states.len();
    if n == 0 {
        return Err(LabError::Samples("empty corpus".into()));
    }
    let reports: Vec<VerificationReport> = (0..n)
        .into_par_iter()
        .map(|i| verify_identities(&states[i], &states[(i + 1) % n], grid, params, constants))
        .collect::<Result<_>>()?;
    let mut checks: Vec<CheckSummary> = Vec::new();
    for report in &reports {
        for e in &report.entries {
            let summary = match checks.iter_mut().find(|c| c.check_name == e.check_name) {
                Some(s) => s,
                None => {
                    checks.push(CheckSummary {
                        check_name: e.check_name.clone(),
                        gating: e.gating,
                        passed: 0,
                        failed: 0,
                        inconclusive: 0,
                        worst: e.clone(),
                    });
                    checks.last_mut().expect("just pushed")
                }
            };
            match e.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Inconclusive => summary.inconclusive += 1,
            }
            if slack(e) > slack(&summary.worst) {
                summary.worst = e.clone();
            }
        }
    }
    Ok(CorpusVerification { states: n, constants: *constants, checks })
}
