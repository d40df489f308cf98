use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fluid::FluidParams;
use crate::io::{sha256_hex, to_json_string};
use crate::kolmogorov::SearchConfig;
use crate::sde::{NoiseSpec, Scheme, SimConfig};
use crate::spectral::GridSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSection {
    pub p: f64,
    #[serde(default = "one")]
    pub nu0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "one")]
    pub sigma0: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { sigma0: 1.0, gamma: default_gamma() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub n: usize,
    /// Grid points per axis; `4 n` when absent.
    pub m: Option<usize>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub snapshots: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Zero,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_initial")]
    pub initial: InitialState,
    #[serde(default = "one")]
    pub initial_norm_v: f64,
    #[serde(default = "default_corpus")]
    pub corpus_size: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_eps_factors")]
    pub eps_factors: Vec<f64>,
    #[serde(default = "default_separations")]
    pub separations: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_search_starts")]
    pub search_starts: usize,
    #[serde(default = "default_search_iterations")]
    pub search_iterations: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        toml::from_str("").expect("all fields defaulted")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out() }
    }
}

/// Parsed and defaulted experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fluid: FluidSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn one() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    NoiseSpec::DEFAULT_GAMMA
}
fn default_dt() -> f64 {
    0.01
}
fn default_horizon() -> f64 {
    10.0
}
fn default_scheme() -> String {
    "tamed_euler".into()
}
fn default_stride() -> usize {
    10
}
fn default_initial() -> InitialState {
    InitialState::Zero
}
fn default_corpus() -> usize {
    1000
}
fn default_burn_in() -> f64 {
    1.0
}
fn default_thin() -> usize {
    10
}
fn default_k_max() -> u32 {
    2
}
fn default_eps_factors() -> Vec<f64> {
    vec![0.1, 0.25, 0.5, 1.0]
}
fn default_separations() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}
fn default_replicas() -> usize {
    32
}
fn default_search_starts() -> usize {
    SearchConfig::default().starts
}
fn default_search_iterations() -> usize {
    SearchConfig::default().iterations
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(format!("config parse error: {e}")))?;
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn fill_defaults(&mut self) {
        if self.discretization.m.is_none() {
            self.discretization.m = Some(4 * self.discretization.n);
        }
    }

    /// Revalidates every module-level invariant.
    pub fn validate(&self) -> Result<()> {
        if self.discretization.scheme != "tamed_euler" {
            return Err(LabError::Config(format!(
                "unknown scheme {:?}; only \"tamed_euler\" is available",
                self.discretization.scheme
            )));
        }
        let e = &self.experiment;
        if e.separations.iter().any(|h| !(*h > 0.0)) || e.separations.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::Config("separations must be positive and strictly decreasing".into()));
        }
        if e.eps_factors.iter().any(|f| !(*f > 0.0)) {
            return Err(LabError::Config("eps_factors must be positive".into()));
        }
        if !(e.initial_norm_v > 0.0) {
            return Err(LabError::Config("initial_norm_v must be positive".into()));
        }
        if e.thin == 0 || e.replicas < 2 || e.corpus_size < 2 || e.search_starts == 0 {
            return Err(LabError::Config(
                "thin >= 1, replicas >= 2, corpus_size >= 2 and search_starts >= 1 are required".into(),
            ));
        }
        if !(e.burn_in >= 0.0 && e.burn_in < self.discretization.horizon) {
            return Err(LabError::Config(format!(
                "burn_in {} must lie in [0, horizon = {})",
                e.burn_in, self.discretization.horizon
            )));
        }
        self.sim_config()?;
        Ok(())
    }

    /// Stress parameters; `p >= 2` is accepted as a diagnostic.
    pub fn params(&self) -> Result<FluidParams> {
        FluidParams::diagnostic(self.fluid.p, self.fluid.nu0)
    }

    pub fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.discretization.n, self.noise.sigma0, self.noise.gamma)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let n = self.discretization.n;
        GridSpec::new(n, self.discretization.m.unwrap_or(4 * n))
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let d = &self.discretization;
        let mut cfg =
            SimConfig::new(self.params()?, self.noise()?, self.grid()?, d.dt, d.horizon, self.experiment.seed)?
                .with_stride(d.record_stride)?
                .with_snapshots(d.snapshots);
        cfg.scheme = Scheme::TamedEuler;
        Ok(cfg)
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            starts: self.experiment.search_starts,
            iterations: self.experiment.search_iterations,
            seed: self.experiment.seed,
        }
    }

    /// Canonical form: sorted-key JSON of the defaulted configuration
    /// without the `[output]` section, which does not affect results.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("table").remove("output");
        to_json_string(&v).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }

    /// Effective configuration as TOML, written next to the outputs.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_is_defaulted() {
        let c = ExperimentConfig::from_toml("[fluid]\np = 1.7\n[discretization]\nn = 6\n").unwrap();
        assert_eq!(c.noise.gamma, 2.5);
        assert_eq!(c.discretization.m, Some(24));
        assert_eq!(c.discretization.scheme, "tamed_euler");
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
        let mut moved = c.clone();
        moved.output.dir = "elsewhere".into();
        assert_eq!(moved.hash(), c.hash());
        let mut reseeded = c.clone();
        reseeded.experiment.seed = 9;
        assert_ne!(reseeded.hash(), c.hash());
    }

    #[test]
    fn rejections() {
        let base = "[fluid]\np = 1.7\n[discretization]\nn = 6\n";
        let err = ExperimentConfig::from_toml(&format!("{base}[noise]\ngamma = 1.5\n")).unwrap_err().to_string();
        assert!(err.contains("gamma must exceed 2"), "{err}");
        let err = ExperimentConfig::from_toml("[fluid]\np = 1.7\np = 1.8\n[discretization]\nn = 6\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(ExperimentConfig::from_toml(&format!("{base}[experiment]\nbogus = 1\n")).is_err());
        assert!(ExperimentConfig::from_toml(&base.replace("n = 6", "n = 6\nscheme = \"rk4\"")).is_err());
        assert!(ExperimentConfig::from_toml(&base.replace("n = 6", "n = 6\nm = 10")).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{base}[experiment]\nseparations = [1e-3, 1e-2]\n")).is_err());
    }
}
