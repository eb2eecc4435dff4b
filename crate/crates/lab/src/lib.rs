//! Experiment driver on top of `cocycle-core`: TOML configs, the eight
//! experiment verbs, and deterministic `result.json` / `trials.csv` /
//! `manifest.json` artifacts.

pub mod artifacts;
pub mod config;
mod error;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

pub use artifacts::{Artifacts, FileEntry};
pub use config::{Diagnostic, ExperimentConfig, ExperimentKind};
pub use error::{Context, LabError};

use artifacts::{pretty, sha256_hex, RunInfo, ERROR_FILE, RESULT_FILE, TRIALS_FILE};

/// One CLI invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRequest {
    pub verb: ExperimentKind,
    pub config_path: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<FileEntry>,
    pub result: Value,
}

/// Parses `text` and applies the CLI overrides.
pub fn load_config(text: &str, seed: Option<u64>, trials: Option<u64>) -> Result<ExperimentConfig, LabError> {
    let mut cfg = ExperimentConfig::from_toml(text).map_err(|d| LabError::Invalid(vec![d]))?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    if trials.is_some() {
        cfg.trials = trials;
    }
    Ok(cfg)
}

/// Diagnostics for the config at `path` when run as `verb`.
pub fn validate_file(verb: ExperimentKind, path: &Path) -> Result<Vec<Diagnostic>, LabError> {
    let text = fs::read_to_string(path).map_err(|source| LabError::ReadConfig { path: path.into(), source })?;
    Ok(match ExperimentConfig::from_toml(&text) {
        Ok(cfg) => cfg.validate(verb),
        Err(d) => vec![d],
    })
}

/// Validates and runs a config held in memory, without touching the disk.
pub fn run_config(verb: ExperimentKind, cfg: &ExperimentConfig) -> Result<Artifacts, LabError> {
    let diagnostics = cfg.validate(verb);
    if !diagnostics.is_empty() {
        return Err(LabError::Invalid(diagnostics));
    }
    experiments::run_experiment(cfg.kind_for(verb), cfg)
}

fn output_dir(req: &RunRequest, cfg: Option<&ExperimentConfig>) -> Option<PathBuf> {
    req.out.clone().or_else(|| {
        let dir = cfg?.output.dir.clone()?;
        Some(match req.config_path.parent() {
            Some(parent) if dir.is_relative() => parent.join(dir),
            _ => dir,
        })
    })
}

/// Runs one experiment end to end. On failure after the output directory is
/// known, `error.json` and a manifest are written there before returning.
pub fn run(req: &RunRequest) -> Result<RunReport, LabError> {
    let started = Instant::now();
    let text = fs::read(&req.config_path);
    let config_sha256 = text.as_ref().map(|t| sha256_hex(t)).unwrap_or_default();
    let parsed = match &text {
        Ok(t) => String::from_utf8(t.clone())
            .map_err(|e| LabError::Invalid(vec![Diagnostic { field: "config".into(), message: e.to_string() }]))
            .and_then(|t| load_config(&t, req.seed, req.trials)),
        Err(e) => Err(LabError::ReadConfig {
            path: req.config_path.clone(),
            source: std::io::Error::new(e.kind(), e.to_string()),
        }),
    };
    let cfg = parsed.as_ref().ok();
    let out_dir = output_dir(req, cfg);
    let (seed, trials) = (cfg.and_then(|c| c.seed), cfg.map(|c| c.trials()));
    let info = |status| RunInfo {
        experiment: req.verb.verb().into(),
        config_sha256: config_sha256.clone(),
        seed,
        trials,
        status,
    };
    let outcome = parsed.and_then(|cfg| run_config(req.verb, &cfg));
    let Some(out_dir) = out_dir else {
        return Err(outcome.err().unwrap_or(LabError::NoOutputDir));
    };
    match outcome {
        Ok(a) => {
            let files = [(RESULT_FILE, pretty(&a.result)?), (TRIALS_FILE, a.csv)];
            let entries = artifacts::write_run(&out_dir, &files, &info("ok"), started.elapsed())?;
            Ok(RunReport { out_dir, files: entries, result: a.result })
        }
        Err(e) => {
            let diagnostics = match &e {
                LabError::Invalid(d) => d.clone(),
                _ => Vec::new(),
            };
            let record = json!({ "error": e.kind(), "message": e.to_string(), "diagnostics": diagnostics });
            artifacts::write_run(&out_dir, &[(ERROR_FILE, pretty(&record)?)], &info("error"), started.elapsed())?;
            Err(e)
        }
    }
}
