//! Config handling and run orchestration behind the `decohere` binary.

pub mod config;
pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use decoherence::experiments::{run_scenario, validation::invariant_suite, ScenarioId};

pub use config::{parse_config, ConfigError, Overrides};
pub use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run failed: {0}")]
    Run(#[from] decoherence::Error),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl CliError {
    /// 2 for bad input, 1 for failures during the run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) | CliError::Output { .. } => 1,
        }
    }
}

fn output_error(path: &Path, e: impl ToString) -> CliError {
    CliError::Output {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

/// Runs the configured scenario and writes `<out>/<scenario>.csv` followed
/// by `<out>/manifest.json`.
pub fn run(config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<RunManifest, CliError> {
    let config = parse_config(config_path, overrides)?;
    let start = Instant::now();
    let output = run_scenario(&config)?;

    fs::create_dir_all(out_dir).map_err(|e| output_error(out_dir, e))?;
    let csv_name = format!("{}.csv", config.scenario);
    let csv_path = out_dir.join(&csv_name);
    let file = fs::File::create(&csv_path).map_err(|e| output_error(&csv_path, e))?;
    output.table.write_to(file).map_err(|e| output_error(&csv_path, e))?;

    let manifest = RunManifest::new(
        &config,
        start.elapsed().as_secs_f64(),
        output.saturation,
        vec![csv_name],
    );
    let manifest_path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| output_error(&manifest_path, e))?;
    fs::write(&manifest_path, json + "\n").map_err(|e| output_error(&manifest_path, e))?;
    Ok(manifest)
}

/// Runs the invariant suite, printing one line per check. True if all pass.
pub fn validate(out: &mut impl std::io::Write) -> std::io::Result<bool> {
    let mut all = true;
    for check in invariant_suite() {
        all &= check.passed;
        let verdict = if check.passed { "ok  " } else { "FAIL" };
        writeln!(out, "{verdict} {:<24} {}", check.name, check.detail)?;
    }
    Ok(all)
}

pub fn scenario_ids() -> impl Iterator<Item = &'static str> {
    ScenarioId::ALL.into_iter().map(|id| id.as_str())
}
