//! Flat key-value run configuration.
//!
//! Format: one `key = value` per line, `#` starts a comment. Keys: pipeline,
//! out_dir, n, d, lambda, epsilon, replicas, t_cap, seed, depth, horizon, M,
//! T, L, a_grid, n_grid, mode. Grids are comma-separated. Unknown keys are
//! rejected so typos cannot silently fall back to defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use cplab_core::engine::Mode;
use cplab_core::experiments::ExperimentConfig;

#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError { key: key.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Generate,
    Simulate,
    Extinction,
    Metastability,
    Structure,
    OracleCheck,
    Growth,
    Deficiency,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Generate => "generate",
            Pipeline::Simulate => "simulate",
            Pipeline::Extinction => "extinction",
            Pipeline::Metastability => "metastability",
            Pipeline::Structure => "structure",
            Pipeline::OracleCheck => "oracle-check",
            Pipeline::Growth => "growth",
            Pipeline::Deficiency => "deficiency",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    pub out_dir: PathBuf,
    pub mode: Mode,
    pub exp: ExperimentConfig,
    /// Raw key-value pairs, echoed into summaries and the manifest.
    pub raw: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "pipeline", "out_dir", "n", "d", "lambda", "epsilon", "replicas", "t_cap", "seed", "depth",
    "horizon", "M", "T", "L", "a_grid", "n_grid", "mode",
];

pub fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err("config", format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err("config", format!("line {}: expected `key = value`", lineno + 1)));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(err(key, "unknown key"));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(err(key, "duplicate key"));
        }
    }
    Ok(map)
}

fn get_parsed<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &'static str,
    default: T,
) -> Result<T, ConfigError> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| err(key, format!("cannot parse value {v:?}"))),
    }
}

fn get_grid<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &'static str,
    default: Vec<T>,
) -> Result<Vec<T>, ConfigError> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| err(key, format!("cannot parse entry {t:?}"))))
            .collect(),
    }
}

/// Builds and validates the typed configuration. `out_dir` falls back to
/// `$CPLAB_OUT/<pipeline>-seed<seed>` when the key is absent.
pub fn build(map: BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let pipeline = match map.get("pipeline").map(String::as_str) {
        None => return Err(err("pipeline", "missing (required)")),
        Some("generate") => Pipeline::Generate,
        Some("simulate") => Pipeline::Simulate,
        Some("extinction") => Pipeline::Extinction,
        Some("metastability") => Pipeline::Metastability,
        Some("structure") => Pipeline::Structure,
        Some("oracle-check") => Pipeline::OracleCheck,
        Some("growth") => Pipeline::Growth,
        Some("deficiency") => Pipeline::Deficiency,
        Some(other) => return Err(err("pipeline", format!("unknown pipeline {other:?}"))),
    };
    let mode = match map.get("mode").map(String::as_str) {
        None | Some("active-clock") => Mode::ActiveClock,
        Some("full-field") => Mode::FullField,
        Some(other) => return Err(err("mode", format!("expected active-clock|full-field, got {other:?}"))),
    };
    let defaults = ExperimentConfig::default();
    let exp = ExperimentConfig {
        n: get_parsed(&map, "n", defaults.n)?,
        d: get_parsed(&map, "d", defaults.d)?,
        lambda: get_parsed(&map, "lambda", defaults.lambda)?,
        epsilon: get_parsed(&map, "epsilon", defaults.epsilon)?,
        replicas: get_parsed(&map, "replicas", defaults.replicas)?,
        t_cap: get_parsed(&map, "t_cap", defaults.t_cap)?,
        seed: get_parsed(&map, "seed", defaults.seed)?,
        depth: get_parsed(&map, "depth", defaults.depth)?,
        horizon: get_parsed(&map, "horizon", defaults.horizon)?,
        branch_depth: get_parsed(&map, "M", defaults.branch_depth)?,
        severed_horizon: get_parsed(&map, "T", defaults.severed_horizon)?,
        severed_cap: get_parsed(&map, "L", defaults.severed_cap)?,
        n_grid: get_grid(&map, "n_grid", defaults.n_grid)?,
        a_grid: get_grid(&map, "a_grid", defaults.a_grid)?,
    };
    exp.validate().map_err(|e| err(e.key, e.reason))?;
    let out_dir = match map.get("out_dir") {
        Some(dir) => PathBuf::from(dir),
        None => match std::env::var_os("CPLAB_OUT") {
            Some(root) => {
                PathBuf::from(root).join(format!("{}-seed{}", pipeline.name(), exp.seed))
            }
            None => return Err(err("out_dir", "missing and CPLAB_OUT is not set")),
        },
    };
    Ok(RunConfig { pipeline, out_dir, mode, exp, raw: map })
}
