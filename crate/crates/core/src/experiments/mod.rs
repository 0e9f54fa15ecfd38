//! The metastability harness: growth and survival estimation on trees,
//! good-vertex scans, extinction-time ensembles with the exponential limit
//! test, spread probabilities, coupling deficiency, and the regrowth
//! (bootstrap) step.

mod bootstrap;
mod deficiency;
mod ensemble;
mod growth;
mod scan;
mod spread;

pub use bootstrap::{bootstrap_step, BootstrapReport, BootstrapRow};
pub use deficiency::{coupling_deficiency, DeficiencyMember, DeficiencyReport, Family};
pub use ensemble::{
    assemble_metastability, beta_fit, extinction_ensemble, extinction_ensemble_with,
    plateau_fraction, BetaFit, EnsembleReport, MetastabilityReport, NRecord,
};
pub use growth::{
    estimate_growth_rate, estimate_survival, GrowthEstimate, SurvivalCell, SurvivalEstimate,
};
pub use scan::{good_vertex_scan, GoodVertexScan, ScanParams, VertexSurvival};
pub use spread::{gamma_exponent, lemma_horizon, spread_probability, PairSpread, SpreadReport};

use thiserror::Error;

use crate::engine::EngineError;
use crate::stats::StatsError;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("degenerate regression: {0}")]
    DegenerateRegression(&'static str),
    #[error("every replica was extinct across the regression window")]
    AllExtinctWindow,
    #[error("every extinction sample was censored at the cap")]
    AllCensored,
    #[error("need at least {need} replicas, got {got}")]
    TooFewReplicas { need: usize, got: usize },
    #[error("growth rate estimate must be positive, got {0}")]
    NonPositiveGrowthRate(f64),
    #[error("member set {0} is empty")]
    EmptyFamilyMember(usize),
    #[error("family must not be empty")]
    EmptyFamily,
    #[error("epsilon {epsilon} gives an empty set on {n} vertices")]
    EpsilonTooSmall { epsilon: f64, n: u32 },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Configuration validation failure; `key` names the offending entry.
#[derive(Debug, Error, PartialEq)]
#[error("config key `{key}`: {reason}")]
pub struct ConfigError {
    pub key: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: &'static str, reason: impl Into<String>) -> Self {
        ConfigError { key, reason: reason.into() }
    }
}

/// The shared numeric knobs of an experiment run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExperimentConfig {
    pub n: u32,
    pub d: u32,
    pub lambda: f64,
    pub epsilon: f64,
    pub replicas: usize,
    pub t_cap: f64,
    pub seed: u64,
    pub depth: u32,
    pub horizon: f64,
    pub branch_depth: u32,
    pub severed_horizon: f64,
    pub severed_cap: u32,
    pub n_grid: Vec<u32>,
    pub a_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            d: 3,
            lambda: 2.5,
            epsilon: 0.05,
            replicas: 100,
            t_cap: 1e4,
            seed: 1,
            depth: 10,
            horizon: 4.0,
            branch_depth: 2,
            severed_horizon: 10.0,
            severed_cap: 20,
            n_grid: vec![50, 100, 200],
            a_grid: vec![5.0, 10.0, 20.0],
        }
    }
}

impl ExperimentConfig {
    /// Checks every invariant, naming the offending key on failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d < 3 {
            return Err(ConfigError::new("d", "degree must be at least 3"));
        }
        if self.n <= self.d {
            return Err(ConfigError::new("n", "vertex count must exceed the degree"));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(ConfigError::new("lambda", "infection rate must be nonnegative and finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.125) {
            return Err(ConfigError::new("epsilon", "must lie strictly inside (0, 1/8)"));
        }
        if self.replicas == 0 {
            return Err(ConfigError::new("replicas", "must be positive"));
        }
        if !self.t_cap.is_finite() || self.t_cap <= 0.0 {
            return Err(ConfigError::new("t_cap", "must be positive and finite"));
        }
        if self.depth == 0 {
            return Err(ConfigError::new("depth", "must be positive"));
        }
        if !self.horizon.is_finite() || self.horizon < 0.0 {
            return Err(ConfigError::new("horizon", "must be nonnegative and finite"));
        }
        if self.branch_depth == 0 {
            return Err(ConfigError::new("M", "must be positive"));
        }
        if !self.severed_horizon.is_finite() || self.severed_horizon < 0.0 {
            return Err(ConfigError::new("T", "must be nonnegative and finite"));
        }
        if self.severed_cap == 0 {
            return Err(ConfigError::new("L", "must be positive"));
        }
        if self.n_grid.is_empty() {
            return Err(ConfigError::new("n_grid", "must not be empty"));
        }
        if self.a_grid.iter().any(|&a| !a.is_finite() || a <= 0.0) {
            return Err(ConfigError::new("a_grid", "entries must be positive and finite"));
        }
        Ok(())
    }
}
