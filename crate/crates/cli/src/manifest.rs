use decoherence::experiments::{SaturationStatus, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::config::RawConfig;

/// Written next to the CSV once a run has completed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    /// Seed of the random initial ensemble, if the scenario uses one.
    pub seed: Option<u64>,
    pub duration_seconds: f64,
    /// Fully resolved config in file layout; resolves back to the same run.
    pub config: RawConfig,
    pub saturation: Vec<SaturationStatus>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(
        config: &ScenarioConfig,
        duration_seconds: f64,
        saturation: Vec<SaturationStatus>,
        outputs: Vec<String>,
    ) -> Self {
        let seed = match config.initial {
            decoherence::experiments::InitialState::Random { seed, .. } => Some(seed),
            _ => None,
        };
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            scenario: config.scenario.to_string(),
            seed,
            duration_seconds,
            config: RawConfig::from(config),
            saturation,
            outputs,
        }
    }
}
