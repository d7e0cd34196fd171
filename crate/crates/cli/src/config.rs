//! Run configuration: JSON schema, validation, CLI overrides.
//!
//! A run is a single JSON object. The seed is mandatory — there is no
//! wall-clock default, reproducibility is part of the contract. Law and set
//! specifications reuse the core serde schemas:
//!
//! ```json
//! {
//!   "command": "experiment",
//!   "seed": 42,
//!   "law": { "kind": "cantor-singular", "a": 1.0, "b": 2.0, "branches": 2, "ratio": 0.2 },
//!   "levels": [2, 4, 6, 8],
//!   "n_paths": 10000,
//!   "out_dir": "out/experiment"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use infobridge::setgeom::SetError;
use infobridge::timelaw::LawError;
use infobridge::{DefaultLaw, SetDescriptor};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config schema error: {0}")]
    Schema(String),
    #[error("invalid law: {0}")]
    Law(#[from] LawError),
    #[error("invalid set: {0}")]
    Set(#[from] SetError),
    #[error("command `{command}` requires field `{field}`")]
    MissingField {
        command: &'static str,
        field: &'static str,
    },
    #[error("`n_paths` must be at least 1")]
    BadPaths,
    #[error("`s` must lie strictly between 0 and 1")]
    BadOrder,
    #[error("`tol` must be finite and positive")]
    BadTolerance,
    #[error("`threshold` must lie strictly between 0 and 1")]
    BadThreshold,
    #[error("`levels` must be nonempty and nondecreasing")]
    BadLevels,
    #[error("`r` must be finite and positive")]
    BadPin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample information paths and export them as CSV.
    Simulate,
    /// Minimized energies and capacities of a set, level by level.
    Capacity,
    /// Bridge-hitting estimates for a set, level by level.
    Hitting,
    /// The predictability experiment for a default law.
    Experiment,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Capacity => "capacity",
            Command::Hitting => "hitting",
            Command::Experiment => "experiment",
        }
    }
}

/// One run specification. Optional fields fall back to command defaults at
/// execution time; see [`RunConfig::levels_or_default`] and friends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<DefaultLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetDescriptor>,
    /// Pin time of the bridge for the hitting command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    /// Riesz energy order for the capacity command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Verdict threshold of the experiment command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Base steps of simulation grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn levels_or_default(&self) -> Vec<u32> {
        self.levels
            .clone()
            .unwrap_or_else(|| match self.command {
                Command::Capacity => (2..=8).collect(),
                _ => vec![2, 4, 6, 8],
            })
    }

    pub fn n_paths_or_default(&self) -> usize {
        self.n_paths.unwrap_or(10_000)
    }

    pub fn s_or_default(&self) -> f64 {
        self.s.unwrap_or(0.5)
    }

    pub fn tol_or_default(&self) -> f64 {
        self.tol.unwrap_or(infobridge::potential::DEFAULT_TOL)
    }

    pub fn threshold_or_default(&self) -> f64 {
        self.threshold.unwrap_or(infobridge::predict::DEFAULT_THRESHOLD)
    }

    pub fn grid_steps_or_default(&self) -> usize {
        self.grid_steps.unwrap_or(64)
    }

    pub fn out_dir_or_default(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Structural validation beyond the serde schema.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(law) = &self.law {
            law.validate()?;
        }
        if let Some(set) = &self.set {
            set.validate()?;
        }
        if self.n_paths == Some(0) {
            return Err(ConfigError::BadPaths);
        }
        if let Some(s) = self.s {
            if !(s > 0.0 && s < 1.0) {
                return Err(ConfigError::BadOrder);
            }
        }
        if let Some(tol) = self.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(ConfigError::BadTolerance);
            }
        }
        if let Some(th) = self.threshold {
            if !(th > 0.0 && th < 1.0) {
                return Err(ConfigError::BadThreshold);
            }
        }
        if let Some(levels) = &self.levels {
            if levels.is_empty() || levels.windows(2).any(|w| w[0] > w[1]) {
                return Err(ConfigError::BadLevels);
            }
        }
        if let Some(r) = self.r {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConfigError::BadPin);
            }
        }
        let command = self.command.name();
        match self.command {
            Command::Simulate | Command::Experiment => {
                if self.law.is_none() {
                    return Err(ConfigError::MissingField {
                        command,
                        field: "law",
                    });
                }
            }
            Command::Capacity => {
                if self.set.is_none() {
                    return Err(ConfigError::MissingField {
                        command,
                        field: "set",
                    });
                }
            }
            Command::Hitting => {
                if self.set.is_none() {
                    return Err(ConfigError::MissingField {
                        command,
                        field: "set",
                    });
                }
                if self.r.is_none() {
                    return Err(ConfigError::MissingField { command, field: "r" });
                }
            }
        }
        Ok(())
    }
}

/// Command-line overrides; flags beat file values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub paths: Option<usize>,
    pub level: Option<u32>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = Some(out.clone());
        }
        if let Some(paths) = self.paths {
            config.n_paths = Some(paths);
        }
        if let Some(level) = self.level {
            config.levels = Some(vec![level]);
        }
    }
}

/// Parse and validate a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: RunConfig =
        serde_json::from_str(&text).map_err(|e| ConfigError::Schema(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_experiment_config_parses() {
        let json = r#"{
            "command": "experiment",
            "seed": 7,
            "law": {"kind": "uniform-interval", "a": 1.0, "b": 2.0}
        }"#;
        let config: RunConfig = serde_json::from_str(json).unwrap();
        config.validate().unwrap();
        assert_eq!(config.command, Command::Experiment);
        assert_eq!(config.levels_or_default(), vec![2, 4, 6, 8]);
    }

    #[test]
    fn missing_seed_names_the_field() {
        let json = r#"{"command": "simulate", "law": {"kind": "exponential", "rate": 1.0}}"#;
        let err = serde_json::from_str::<RunConfig>(json).unwrap_err();
        assert!(err.to_string().contains("seed"), "error was: {err}");
    }

    #[test]
    fn overlapping_cantor_branches_cite_the_constraint() {
        let json = r#"{
            "command": "capacity",
            "seed": 1,
            "set": {"variant": "cantor", "a": 0.0, "b": 1.0, "branches": 3, "ratio": 0.5}
        }"#;
        let config: RunConfig = serde_json::from_str(json).unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("disjoint"), "error was: {err}");
    }

    #[test]
    fn config_round_trips_through_json() {
        let json = r#"{
            "command": "hitting",
            "seed": 3,
            "set": {"variant": "finite-points", "points": [0.25, 0.5]},
            "r": 1.0,
            "levels": [2, 4],
            "n_paths": 100
        }"#;
        let config: RunConfig = serde_json::from_str(json).unwrap();
        let echoed = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&echoed).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), echoed);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = r#"{"command": "simulate", "seed": 1, "law": {"kind": "exponential", "rate": 1.0}, "typo_field": 2}"#;
        let err = serde_json::from_str::<RunConfig>(json).unwrap_err();
        assert!(err.to_string().contains("typo_field"));
    }

    #[test]
    fn overrides_beat_file_values() {
        let json = r#"{"command": "capacity", "seed": 1,
            "set": {"variant": "interval-union", "intervals": [[1.0, 2.0]]},
            "levels": [2, 3, 4]}"#;
        let mut config: RunConfig = serde_json::from_str(json).unwrap();
        Overrides {
            seed: Some(99),
            out: Some(PathBuf::from("elsewhere")),
            paths: Some(5),
            level: Some(6),
        }
        .apply(&mut config);
        assert_eq!(config.seed, 99);
        assert_eq!(config.levels, Some(vec![6]));
        assert_eq!(config.n_paths, Some(5));
        assert_eq!(config.out_dir, Some(PathBuf::from("elsewhere")));
    }
}
