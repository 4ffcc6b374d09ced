use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::GridWorld;
use crate::error::{Error, Result};
use crate::xcsf::Hyperparams;

pub const DETERMINISTIC_BUDGET: u64 = 400_000;
pub const SLIPPERY_BUDGET: u64 = 800_000;
pub const DEFAULT_TRIALS: usize = 30;
pub const DEFAULT_CADENCE: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EnvVariant {
    /// `p_slip = 0`
    #[default]
    #[serde(rename = "det")]
    Deterministic,
    /// `p_slip = 0.1`
    #[serde(rename = "slip01")]
    Slippery,
}

impl EnvVariant {
    pub fn p_slip(self) -> f64 {
        match self {
            EnvVariant::Deterministic => 0.0,
            EnvVariant::Slippery => 0.1,
        }
    }

    pub fn world(self) -> GridWorld {
        match self {
            EnvVariant::Deterministic => GridWorld::deterministic(),
            EnvVariant::Slippery => GridWorld::slippery(),
        }
    }

    pub fn default_budget(self) -> u64 {
        match self {
            EnvVariant::Deterministic => DETERMINISTIC_BUDGET,
            EnvVariant::Slippery => SLIPPERY_BUDGET,
        }
    }
}

impl fmt::Display for EnvVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvVariant::Deterministic => "det",
            EnvVariant::Slippery => "slip01",
        })
    }
}

impl FromStr for EnvVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "det" => Ok(EnvVariant::Deterministic),
            "slip01" => Ok(EnvVariant::Slippery),
            other => Err(format!("unknown env `{other}` (expected det or slip01)")),
        }
    }
}

/// Everything needed to reproduce a training run. Serialized as one flat
/// key-value file; XCSF hyperparameters sit alongside the run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub env: EnvVariant,
    /// Environment steps per trial; `None` means the variant's default.
    pub budget: Option<u64>,
    pub trials: usize,
    /// Steps between trace points.
    pub cadence: u64,
    pub seed: u64,
    pub workers: usize,
    #[serde(flatten)]
    pub hyperparams: Hyperparams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvVariant::Deterministic,
            budget: None,
            trials: DEFAULT_TRIALS,
            cadence: DEFAULT_CADENCE,
            seed: 0,
            workers: 1,
            hyperparams: Hyperparams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn budget(&self) -> u64 {
        self.budget.unwrap_or_else(|| self.env.default_budget())
    }

    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidHyperparameter {
                name: "trials",
                reason: "must be at least 1".into(),
            });
        }
        if self.workers == 0 {
            return Err(Error::InvalidHyperparameter {
                name: "workers",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Parses a flat key-value config; unknown keys are rejected.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            path: origin.to_path_buf(),
            reason,
        };
        let table: toml::Table = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        let known = known_keys();
        if let Some(k) = table.keys().find(|k| !known.contains(k.as_str())) {
            return Err(parse_err(format!("unknown key `{k}`")));
        }
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }
}

fn known_keys() -> BTreeSet<String> {
    let cfg = ExperimentConfig {
        budget: Some(0),
        ..Default::default()
    };
    let table: toml::Table = toml::from_str(&cfg.to_toml()).expect("round trip");
    table.keys().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets_follow_variant() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.budget(), 400_000);
        cfg.env = EnvVariant::Slippery;
        assert_eq!(cfg.budget(), 800_000);
        cfg.budget = Some(10);
        assert_eq!(cfg.budget(), 10);
    }

    #[test]
    fn flat_file_round_trip() {
        let cfg = ExperimentConfig {
            env: EnvVariant::Slippery,
            trials: 3,
            budget: Some(5000),
            ..Default::default()
        };
        let text = cfg.to_toml();
        assert!(text.contains("env = \"slip01\""));
        assert!(text.contains("eps0 = 0.01"));
        assert!(!text.contains('['), "config must stay flat:\n{text}");
        assert_eq!(ExperimentConfig::from_toml(&text, Path::new("c")).unwrap(), cfg);
    }

    #[test]
    fn unknown_and_invalid_keys_named() {
        let err = ExperimentConfig::from_toml("epsilon_zero = 1\n", Path::new("c.toml")).unwrap_err();
        assert!(err.to_string().contains("epsilon_zero"), "{err}");
        let err = ExperimentConfig::from_toml("chi = 2.0\n", Path::new("c.toml")).unwrap_err();
        assert!(err.to_string().contains("chi"), "{err}");
    }
}
