use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::{UtilityKind, DEFAULT_EPSILON};
use crate::baselines::{RsConfig, SaConfig};
use crate::benchmarks::{ContaminationConfig, RnaBackend};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::sampler::SbboConfig;
use crate::surrogate::gp::{log_grid, GpOptions};
use crate::surrogate::GibbsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkId {
    Bqp,
    Contamination,
    Rna,
}

impl BenchmarkId {
    /// Post-initialization evaluation budget used when none is configured.
    pub fn default_budget(self) -> usize {
        match self {
            BenchmarkId::Bqp => 120,
            BenchmarkId::Contamination => 500,
            BenchmarkId::Rna => 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "sbbo-gpr", alias = "sbbo-GPr")]
    SbboGp,
    #[serde(rename = "sbbo-blr", alias = "sbbo-BLr")]
    SbboBlr,
    #[serde(rename = "sa")]
    Sa,
    #[serde(rename = "rs")]
    Rs,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SbboGp => "sbbo-gpr",
            Method::SbboBlr => "sbbo-blr",
            Method::Sa => "sa",
            Method::Rs => "rs",
        }
    }

    pub fn is_sbbo(self) -> bool {
        matches!(self, Method::SbboGp | Method::SbboBlr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BqpSettings {
    pub d: usize,
    pub lc2: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for BqpSettings {
    fn default() -> Self {
        Self { d: 10, lc2: 10.0, lambda: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RnaSettings {
    pub p: usize,
    pub backend: RnaBackend,
}

impl Default for RnaSettings {
    fn default() -> Self {
        Self { p: 30, backend: RnaBackend::Nussinov }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UtilitySettings {
    pub kind: UtilityKind,
    pub epsilon: f64,
}

impl Default for UtilitySettings {
    fn default() -> Self {
        Self { kind: UtilityKind::ExpectedImprovement, epsilon: DEFAULT_EPSILON }
    }
}

/// Log-spaced hyperparameter grids for the Tanimoto GP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpSettings {
    pub grid_size: usize,
    pub phi_range: (f64, f64),
    pub noise_range: (f64, f64),
    pub center_y: bool,
}

impl Default for GpSettings {
    fn default() -> Self {
        Self { grid_size: 25, phi_range: (1e-2, 1e2), noise_range: (1e-6, 1e1), center_y: true }
    }
}

impl GpSettings {
    pub fn options(&self) -> GpOptions {
        GpOptions {
            phi_grid: log_grid(self.phi_range.0, self.phi_range.1, self.grid_size),
            noise_grid: log_grid(self.noise_range.0, self.noise_range.1, self.grid_size),
            center_y: self.center_y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlrSettings {
    pub gibbs: GibbsConfig,
    /// Start each refit from the final state of the previous one.
    pub warm_start: bool,
}

impl Default for BlrSettings {
    fn default() -> Self {
        Self { gibbs: GibbsConfig::default(), warm_start: true }
    }
}

/// Full experiment description, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkId,
    pub method: Method,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    /// Evaluations after the initial design; benchmark default when absent.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default = "default_n_reps")]
    pub n_reps: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub output: PathBuf,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub bqp: BqpSettings,
    #[serde(default)]
    pub contamination: ContaminationConfig,
    #[serde(default)]
    pub rna: RnaSettings,
    #[serde(default)]
    pub utility: UtilitySettings,
    #[serde(default)]
    pub sbbo: SbboConfig,
    #[serde(default)]
    pub gp: GpSettings,
    #[serde(default)]
    pub blr: BlrSettings,
    #[serde(default)]
    pub sa: SaConfig,
    #[serde(default)]
    pub rs: RsConfig,
}

fn default_n_init() -> usize {
    5
}

fn default_n_reps() -> usize {
    10
}

impl ExperimentConfig {
    pub fn new(benchmark: BenchmarkId, method: Method) -> Self {
        Self {
            benchmark,
            method,
            n_init: default_n_init(),
            budget: None,
            n_reps: default_n_reps(),
            base_seed: 0,
            output: PathBuf::new(),
            execution: Execution::default(),
            bqp: BqpSettings::default(),
            contamination: ContaminationConfig::default(),
            rna: RnaSettings::default(),
            utility: UtilitySettings::default(),
            sbbo: SbboConfig::default(),
            gp: GpSettings::default(),
            blr: BlrSettings::default(),
            sa: SaConfig::default(),
            rs: RsConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; a relative `output` is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if config.output.is_relative() {
            if let Some(dir) = path.parent() {
                config.output = dir.join(&config.output);
            }
        }
        Ok(config)
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or_else(|| self.benchmark.default_budget())
    }

    /// Copy with every optional value filled in.
    pub fn resolved(&self) -> Self {
        Self { budget: Some(self.budget()), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 || self.n_reps == 0 {
            return Err(Error::Config("n_init and n_reps must be at least 1".into()));
        }
        if self.gp.grid_size == 0 {
            return Err(Error::Config("GP grid must have at least one point".into()));
        }
        if self.method.is_sbbo() {
            self.sbbo.validate()?;
        }
        match self.method {
            Method::Sa => self.sa.validate()?,
            Method::Rs => self.rs.validate()?,
            _ => {}
        }
        if !(self.utility.epsilon > 0.0) {
            return Err(Error::Config("utility epsilon must be positive".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}
