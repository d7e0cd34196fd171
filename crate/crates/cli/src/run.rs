//! Run dispatch and report writing.
//!
//! Every run writes `report.json` plus one CSV table under the output
//! directory. The written bytes are a pure function of `(config, seed,
//! version)`: the report embeds the config echo and its SHA-256 hash, floats
//! are rendered with Rust's shortest round-trip formatting, and volatile
//! data (wall time) stays out of the files — it is returned to the caller
//! and printed, never persisted.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use infobridge::bridge::{self, GridSpec};
use infobridge::hitting::{self, HittingError};
use infobridge::potential::{self, EnergyError};
use infobridge::predict::{self, ExperimentError};
use infobridge::stream::{self, Domain};

use crate::config::{Command, RunConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{command}: i/o failure at {path}: {source}")]
    Io {
        command: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{command}: {source}")]
    Energy {
        command: &'static str,
        source: EnergyError,
    },
    #[error("{command}: {source}")]
    Hitting {
        command: &'static str,
        source: HittingError,
    },
    #[error("{command}: {source}")]
    Experiment {
        command: &'static str,
        source: ExperimentError,
    },
    #[error("{command}: serialization failed: {source}")]
    Json {
        command: &'static str,
        source: serde_json::Error,
    },
}

/// Summary of a finished run.
#[derive(Debug)]
pub struct RunReport {
    pub config_hash: String,
    pub tool_version: String,
    /// Contents of the written `report.json`.
    pub report: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
    /// Not part of any written file.
    pub wall: Duration,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    tool_version: &'a str,
    config_hash: &'a str,
    config: &'a RunConfig,
    outputs: serde_json::Value,
}

/// Execute a validated config: dispatch, write artifacts, echo the config.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    let command = config.command.name();
    let started = Instant::now();
    let out_dir = config.out_dir_or_default();
    std::fs::create_dir_all(&out_dir).map_err(|source| RunError::Io {
        command,
        path: out_dir.clone(),
        source,
    })?;

    let (outputs, csv_name, csv_data) = match config.command {
        Command::Simulate => simulate(config),
        Command::Capacity => capacity(config)?,
        Command::Hitting => hitting_run(config)?,
        Command::Experiment => experiment(config)?,
    };

    let config_bytes = serde_json::to_vec(config).map_err(|source| RunError::Json {
        command,
        source,
    })?;
    let config_hash: String = Sha256::digest(&config_bytes)
        .iter()
        .fold(String::with_capacity(64), |mut acc, byte| {
            let _ = write!(acc, "{byte:02x}");
            acc
        });

    let report_value = serde_json::to_value(ReportFile {
        tool_version: TOOL_VERSION,
        config_hash: &config_hash,
        config,
        outputs,
    })
    .map_err(|source| RunError::Json { command, source })?;

    let report_path = out_dir.join("report.json");
    let mut report_bytes =
        serde_json::to_vec_pretty(&report_value).map_err(|source| RunError::Json {
            command,
            source,
        })?;
    report_bytes.push(b'\n');
    std::fs::write(&report_path, &report_bytes).map_err(|source| RunError::Io {
        command,
        path: report_path.clone(),
        source,
    })?;

    let csv_path = out_dir.join(csv_name);
    std::fs::write(&csv_path, csv_data.as_bytes()).map_err(|source| RunError::Io {
        command,
        path: csv_path.clone(),
        source,
    })?;

    Ok(RunReport {
        config_hash,
        tool_version: TOOL_VERSION.to_string(),
        report: report_value,
        artifacts: vec![report_path, csv_path],
        wall: started.elapsed(),
    })
}

fn simulate(config: &RunConfig) -> (serde_json::Value, &'static str, String) {
    let law = config.law.as_ref().expect("validated");
    let n_paths = config.n_paths_or_default();
    let spec = GridSpec::geometric(config.grid_steps_or_default());
    let mut csv = String::from("path,t,value,is_after_tau\n");
    let mut tau_min = f64::INFINITY;
    let mut tau_max = f64::NEG_INFINITY;
    let mut tau_sum = 0.0;
    for path in 0..n_paths {
        let mut rng = stream::substream(config.seed, Domain::InfoPaths, 0, path as u64);
        let info = bridge::sample_information_path(law, &spec, &mut rng);
        tau_min = tau_min.min(info.tau);
        tau_max = tau_max.max(info.tau);
        tau_sum += info.tau;
        for (i, t) in info.grid.times().iter().enumerate() {
            let _ = writeln!(
                csv,
                "{path},{t},{v},{after}",
                v = info.values[i],
                after = u8::from(info.is_after_tau(i))
            );
        }
    }
    let outputs = serde_json::json!({
        "n_paths": n_paths,
        "tau_mean": tau_sum / n_paths as f64,
        "tau_min": tau_min,
        "tau_max": tau_max,
    });
    (outputs, "paths.csv", csv)
}

fn capacity(
    config: &RunConfig,
) -> Result<(serde_json::Value, &'static str, String), RunError> {
    let command = config.command.name();
    let set = config.set.as_ref().expect("validated");
    let s = config.s_or_default();
    let tol = config.tol_or_default();
    let mut csv = String::from("level,n_intervals,min_energy,capacity\n");
    let mut reports = Vec::new();
    for level in config.levels_or_default() {
        let report = potential::capacity_estimate(set, s, level, tol)
            .map_err(|source| RunError::Energy { command, source })?;
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            report.level, report.n_intervals, report.energy, report.capacity
        );
        reports.push(report);
    }
    let outputs = serde_json::json!({
        "s": s,
        "tol": tol,
        "levels": reports,
    });
    Ok((outputs, "capacity.csv", csv))
}

fn hitting_run(
    config: &RunConfig,
) -> Result<(serde_json::Value, &'static str, String), RunError> {
    let command = config.command.name();
    let set = config.set.as_ref().expect("validated");
    let pin = config.r.expect("validated");
    let estimates = hitting::hitting_vs_level_report(
        set,
        pin,
        &config.levels_or_default(),
        config.n_paths_or_default(),
        config.seed,
    )
    .map_err(|source| RunError::Hitting { command, source })?;
    let mut csv = String::from("level,n_intervals,n_paths,estimate,ci_halfwidth,seed\n");
    for est in &estimates {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            est.level, est.n_intervals, est.n_paths, est.estimate, est.ci_halfwidth, config.seed
        );
    }
    let outputs = serde_json::json!({
        "pin": pin,
        "estimates": estimates,
    });
    Ok((outputs, "hitting.csv", csv))
}

fn experiment(
    config: &RunConfig,
) -> Result<(serde_json::Value, &'static str, String), RunError> {
    let command = config.command.name();
    let law = config.law.as_ref().expect("validated");
    let report = predict::predictability_experiment(
        law,
        &config.levels_or_default(),
        config.n_paths_or_default(),
        config.seed,
        config.threshold_or_default(),
    )
    .map_err(|source| RunError::Experiment { command, source })?;
    let mut csv = String::from("level,estimate,ci_halfwidth,n_paths\n");
    for est in &report.estimates {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            est.level, est.estimate, est.ci_halfwidth, est.n_paths
        );
    }
    let outputs =
        serde_json::to_value(&report).map_err(|source| RunError::Json { command, source })?;
    Ok((outputs, "experiment.csv", csv))
}
