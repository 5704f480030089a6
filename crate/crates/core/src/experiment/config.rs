use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::Selection;
use crate::env::{critical_lambda, moments, serde_spec, DistSpec};
use crate::error::{Error, Result};
use crate::percolation::ArcSampling;

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Dynamic,
    #[default]
    Percolation,
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dynamic" => Ok(Engine::Dynamic),
            "percolation" => Ok(Engine::Percolation),
            _ => Err(format!("engine must be dynamic or percolation, got `{s}`")),
        }
    }
}

/// Annealed draws a fresh environment per replication; quenched keeps one
/// environment (from the master seed) and varies only the run seeds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    #[default]
    Annealed,
    Quenched,
}

impl std::str::FromStr for Measure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "annealed" => Ok(Measure::Annealed),
            "quenched" => Ok(Measure::Quenched),
            _ => Err(format!("measure must be annealed or quenched, got `{s}`")),
        }
    }
}

/// Whether `lambda_grid` holds absolute rates or multiples of `λ_c`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaUnits {
    #[default]
    Absolute,
    Critical,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(with = "serde_spec::recovery")]
    pub xi_spec: DistSpec,
    #[serde(with = "serde_spec::weight")]
    pub rho_spec: DistSpec,
    pub n_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub lambda_units: LambdaUnits,
    pub replications: u64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub arc_sampling: ArcSampling,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Minimal config with defaults for everything but the essentials.
    pub fn new(
        xi_spec: DistSpec,
        rho_spec: DistSpec,
        n_grid: Vec<usize>,
        lambda_grid: Vec<f64>,
        replications: u64,
        master_seed: u64,
    ) -> Self {
        Self {
            xi_spec,
            rho_spec,
            n_grid,
            lambda_grid,
            lambda_units: LambdaUnits::Absolute,
            replications,
            engine: Engine::default(),
            selection: Selection::default(),
            arc_sampling: ArcSampling::default(),
            measure: Measure::default(),
            epsilon: DEFAULT_EPSILON,
            confidence: DEFAULT_CONFIDENCE,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.replications < 1 {
            return fail("replications ≥ 1 required".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return fail(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return fail(format!("confidence must lie in (0, 1), got {}", self.confidence));
        }
        if self.n_grid.is_empty() || self.lambda_grid.is_empty() {
            return fail("n_grid and lambda_grid must be non-empty".into());
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n == 0) {
            return fail(format!("every n must be ≥ 1, got {n}"));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return fail(format!("lambda ≥ 0 required for every grid value, got {l}"));
        }
        Ok(())
    }

    pub fn lambda_c(&self) -> Result<f64> {
        Ok(critical_lambda(&moments(&self.rho_spec, &self.xi_spec))?)
    }

    /// Grid rates in absolute units.
    pub fn resolved_lambdas(&self) -> Result<Vec<f64>> {
        let scale = match self.lambda_units {
            LambdaUnits::Absolute => 1.0,
            LambdaUnits::Critical => self.lambda_c()?,
        };
        Ok(self.lambda_grid.iter().map(|l| l * scale).collect())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config, a JSON config, a `sweep.json` (its embedded
    /// config), or a `sweep.csv` (its `# config:` header line).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_any_str(&text)
    }

    pub fn from_any_str(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('#') {
            if let Some(line) = trimmed.lines().find_map(|l| l.strip_prefix("# config: ")) {
                let cfg: Self = serde_json::from_str(line)?;
                cfg.validate()?;
                return Ok(cfg);
            }
        }
        if trimmed.starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(trimmed)?;
            let inner = value.pointer("/provenance/config").cloned().unwrap_or(value);
            let cfg: Self = serde_json::from_value(inner)?;
            cfg.validate()?;
            return Ok(cfg);
        }
        Self::from_toml_str(text)
    }
}
