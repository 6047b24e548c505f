//! Batch front end for `renewal-coupling`: reads a TOML experiment config,
//! runs it on a deterministic worker pool, and writes CSV outputs plus a
//! manifest with checksums.
//!
//! Exit statuses: 0 success, 1 I/O failure, 2 config error, 3 envelope
//! violation, 4 divergent bound, 5 censoring threshold breached. Every error
//! message starts with the offending config key.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;

use std::path::Path;
use std::time::Instant;

pub use config::{ExperimentConfig, ModeName};
pub use error::CliError;
pub use experiments::{execute, validate, Outcome, Output};
pub use manifest::{sha256_hex, Manifest};

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub mode: Option<ModeName>,
    pub step: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.experiment.seed = seed;
        }
        if let Some(mode) = self.mode {
            config.simulation.mode = mode;
        }
        if let Some(step) = self.step {
            config.simulation.step = Some(step);
        }
    }
}

/// Result of a successful [`run`].
#[derive(Debug)]
pub struct RunReport {
    pub manifest: Manifest,
    pub summary: Vec<String>,
}

/// Runs `config` on `workers` threads (all cores when `None`).
pub fn execute_with_workers(config: &ExperimentConfig, workers: Option<usize>) -> Result<Outcome, CliError> {
    match workers {
        None => execute(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("--workers", e.to_string()))?
            .install(|| execute(config)),
    }
}

/// Loads, runs and writes one experiment. Outputs and the manifest are
/// written even when a run-level threshold is breached; the breach is then
/// returned as the error.
pub fn run(config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let (mut config, text) = ExperimentConfig::load(config_path)?;
    overrides.apply(&mut config);
    if overrides.step.is_some_and(|s| !(s > 0.0)) {
        return Err(CliError::config("--step", "must be positive"));
    }
    if overrides.workers == Some(0) {
        return Err(CliError::config("--workers", "must be positive"));
    }
    let outcome = execute_with_workers(&config, overrides.workers)?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut outputs = std::collections::BTreeMap::new();
    for o in &outcome.outputs {
        let path = out_dir.join(&o.name);
        std::fs::write(&path, &o.bytes).map_err(io(&path))?;
        outputs.insert(o.name.clone(), sha256_hex(&o.bytes));
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: config.experiment.kind.as_str().into(),
        config_sha256: sha256_hex(text.as_bytes()),
        seeds: vec![config.experiment.seed],
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs,
    };
    let path = out_dir.join("manifest.toml");
    std::fs::write(&path, manifest.to_toml()).map_err(io(&path))?;
    match outcome.breach {
        Some(e) => Err(e),
        None => Ok(RunReport {
            manifest,
            summary: outcome.summary,
        }),
    }
}

/// Loads `config_path` and lists everything that would stop a run.
pub fn validate_file(config_path: &Path) -> Result<Vec<String>, CliError> {
    let (config, _) = ExperimentConfig::load(config_path)?;
    Ok(validate(&config))
}
