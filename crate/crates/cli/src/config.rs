//! TOML scenario files.
//!
//! ```toml
//! [scenario]
//! id = "phase_single"
//! tau = 0.1
//!
//! [system]      # fock_dim, hbar, mass, spring_constant, omega, mass2, omega_s, g1, g2, lambda
//! [grid]        # t_max, steps
//! [initial]     # kind = "coherent" (x0, p0) | "random" (count, seed) | "amplitudes" (amplitudes)
//! [sweep]       # x0 = [...], variants = [...]
//! ```
//!
//! Every key except `scenario.id` is optional; missing values come from the
//! scenario's defaults.

use std::path::{Path, PathBuf};

use decoherence::experiments::{
    GridConfig, InitialState, PhysicalParams, ScenarioConfig, ScenarioId, SweepConfig, Variant,
};
use decoherence::model::OscillatorParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("[{section}] is missing required key(s): {}", keys.join(", "))]
    Missing {
        section: &'static str,
        keys: Vec<&'static str>,
    },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        message: message.to_string(),
    }
}

/// The file layout. Also used, fully populated, as the manifest's config echo.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<RawScenario>,
    pub system: Option<RawSystem>,
    pub grid: Option<RawGrid>,
    pub initial: Option<RawInitial>,
    pub sweep: Option<RawSweep>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub id: Option<ScenarioId>,
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub fock_dim: Option<usize>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub spring_constant: Option<f64>,
    pub omega: Option<f64>,
    pub mass2: Option<f64>,
    pub omega_s: Option<f64>,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Coherent,
    Random,
    Amplitudes,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<InitialKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub x0: Option<Vec<f64>>,
    pub variants: Option<Vec<Variant>>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tau: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub dim: Option<usize>,
}

impl RawConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    /// Applies command-line overrides on top of the file's values.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(tau) = o.tau {
            self.scenario.get_or_insert_with(Default::default).tau = Some(tau);
        }
        if let Some(t_max) = o.t_max {
            self.grid.get_or_insert_with(Default::default).t_max = Some(t_max);
        }
        if let Some(steps) = o.steps {
            self.grid.get_or_insert_with(Default::default).steps = Some(steps);
        }
        if let Some(dim) = o.dim {
            self.system.get_or_insert_with(Default::default).fock_dim = Some(dim);
        }
        if let Some(seed) = o.seed {
            self.initial.get_or_insert_with(Default::default).seed = Some(seed);
        }
    }

    /// Fills in defaults and validates the result.
    pub fn resolve(&self) -> Result<ScenarioConfig, ConfigError> {
        let scenario = self.scenario.clone().unwrap_or_default();
        let id = scenario.id.ok_or(ConfigError::Missing {
            section: "scenario",
            keys: vec!["id"],
        })?;
        let defaults = ScenarioConfig::defaults(id);
        let tau = scenario.tau.unwrap_or(defaults.tau);

        let system = resolve_system(self.system.clone().unwrap_or_default(), &defaults.system)?;
        let grid = self.grid.clone().unwrap_or_default();
        let grid = GridConfig {
            t_max: grid.t_max.unwrap_or(defaults.grid.t_max),
            steps: grid.steps.unwrap_or(defaults.grid.steps),
        };
        let initial = resolve_initial(self.initial.clone().unwrap_or_default(), &defaults.initial)?;
        let sweep = self.sweep.clone().unwrap_or_default();
        let sweep = SweepConfig {
            x0: sweep.x0.unwrap_or(defaults.sweep.x0),
            variants: sweep.variants.unwrap_or(defaults.sweep.variants),
        };
        let config = ScenarioConfig {
            scenario: id,
            system,
            tau,
            grid,
            initial,
            sweep,
        };

        check_sections(&config)?;
        // Anything the targeted checks above missed.
        config.validate().map_err(|e| invalid("scenario", e))?;
        Ok(config)
    }
}

/// Validates each section separately so errors name the offending key.
fn check_sections(c: &ScenarioConfig) -> Result<(), ConfigError> {
    if !(c.tau.is_finite() && c.tau >= 0.0) {
        return Err(invalid(
            "scenario.tau",
            format!("must be finite and >= 0, got {}", c.tau),
        ));
    }
    if c.scenario == ScenarioId::Fig1 && c.tau == 0.0 {
        return Err(invalid(
            "scenario.tau",
            "fig1 needs tau > 0 to reach the decohered limit",
        ));
    }
    c.grid.time_grid().map_err(|e| invalid("grid", e))?;
    let osc = c.system.oscillator().map_err(|e| invalid("system", e))?;
    match c.scenario {
        ScenarioId::Fig1 => {
            if !matches!(c.initial, InitialState::Random { .. }) {
                return Err(invalid("initial.kind", "fig1 needs kind = \"random\""));
            }
        }
        ScenarioId::PhaseSingle | ScenarioId::PhaseMulti | ScenarioId::EntanglementSuite => {
            c.initial.oscillator_state(&osc).map_err(|e| invalid("initial", e))?;
        }
        ScenarioId::EntropyVsX0 | ScenarioId::EnergyEntropySweep => {
            if !matches!(c.initial, InitialState::Coherent { .. }) {
                return Err(invalid("initial.kind", "x0 sweeps need kind = \"coherent\""));
            }
            if c.sweep.x0.is_empty() {
                return Err(invalid("sweep.x0", "must list at least one value"));
            }
            for &x0 in &c.sweep.x0 {
                decoherence::states::coherent_two_level(x0, c.initial.p0(), &osc)
                    .map_err(|e| invalid("sweep.x0", e))?;
            }
        }
    }
    let uses_variants = matches!(
        c.scenario,
        ScenarioId::PhaseMulti | ScenarioId::EnergyEntropySweep | ScenarioId::EntanglementSuite
    );
    if uses_variants && c.sweep.variants.is_empty() {
        return Err(invalid("sweep.variants", "must list at least one variant"));
    }
    if c.scenario == ScenarioId::PhaseMulti && c.sweep.variants.contains(&Variant::Single) {
        return Err(invalid("sweep.variants", "phase_multi covers composite variants only"));
    }
    Ok(())
}

/// Resolves `mass`, `spring_constant` and `omega`: any two determine the
/// third, all three must agree, and a single given value is paired with the
/// default spring constant (or the default frequency if the spring constant
/// is the one given).
fn resolve_oscillator(
    raw: &RawSystem,
    defaults: &PhysicalParams,
    fock_dim: usize,
    hbar: f64,
) -> Result<OscillatorParams, ConfigError> {
    let given = [raw.mass.is_some(), raw.spring_constant.is_some(), raw.omega.is_some()];
    let (mass, k, omega) = match given.iter().filter(|g| **g).count() {
        0 => (
            Some(defaults.mass),
            Some(defaults.spring_constant),
            Some(defaults.omega),
        ),
        1 if raw.spring_constant.is_some() => (None, raw.spring_constant, Some(defaults.omega)),
        1 => (raw.mass, Some(defaults.spring_constant), raw.omega),
        _ => (raw.mass, raw.spring_constant, raw.omega),
    };
    let key = match given {
        [true, true, true] => "system.mass/spring_constant/omega",
        [true, _, _] => "system.mass",
        [_, true, _] => "system.spring_constant",
        [_, _, true] => "system.omega",
        _ => "system",
    };
    OscillatorParams::from_parts(mass, k, omega, hbar, fock_dim).map_err(|e| invalid(key, e))
}

fn resolve_system(raw: RawSystem, defaults: &PhysicalParams) -> Result<PhysicalParams, ConfigError> {
    let fock_dim = raw.fock_dim.unwrap_or(defaults.fock_dim);
    let hbar = raw.hbar.unwrap_or(defaults.hbar);
    let osc = resolve_oscillator(&raw, defaults, fock_dim, hbar)?;
    let params = PhysicalParams {
        fock_dim,
        hbar,
        mass: osc.mass(),
        spring_constant: osc.spring_constant(),
        omega: osc.omega(),
        mass2: raw.mass2.unwrap_or(defaults.mass2),
        omega_s: raw.omega_s.unwrap_or(defaults.omega_s),
        g1: raw.g1.unwrap_or(defaults.g1),
        g2: raw.g2.unwrap_or(defaults.g2),
        lambda: raw.lambda.unwrap_or(defaults.lambda),
    };
    params.second_oscillator().map_err(|e| invalid("system.mass2", e))?;
    for variant in Variant::ALL {
        params.system(variant).map_err(|e| invalid("system", e))?;
    }
    Ok(params)
}

fn resolve_initial(raw: RawInitial, default: &InitialState) -> Result<InitialState, ConfigError> {
    let default_kind = match default {
        InitialState::Coherent { .. } => InitialKind::Coherent,
        InitialState::Random { .. } => InitialKind::Random,
        InitialState::Amplitudes { .. } => InitialKind::Amplitudes,
    };
    let kind = raw.kind.unwrap_or(default_kind);
    let reject = |present: bool, key: &str| -> Result<(), ConfigError> {
        if present {
            Err(invalid(
                &format!("initial.{key}"),
                format!("not valid for kind {kind:?}").to_lowercase(),
            ))
        } else {
            Ok(())
        }
    };
    match kind {
        InitialKind::Coherent => {
            reject(raw.count.is_some(), "count")?;
            reject(raw.seed.is_some(), "seed")?;
            reject(raw.amplitudes.is_some(), "amplitudes")?;
            let (dx, dp) = match default {
                InitialState::Coherent { x0, p0 } => (*x0, *p0),
                _ => (0.5, 0.0),
            };
            Ok(InitialState::Coherent {
                x0: raw.x0.unwrap_or(dx),
                p0: raw.p0.unwrap_or(dp),
            })
        }
        InitialKind::Random => {
            reject(raw.x0.is_some(), "x0")?;
            reject(raw.p0.is_some(), "p0")?;
            reject(raw.amplitudes.is_some(), "amplitudes")?;
            let (dc, ds) = match default {
                InitialState::Random { count, seed } => (*count, *seed),
                _ => (1, 0),
            };
            Ok(InitialState::Random {
                count: raw.count.unwrap_or(dc),
                seed: raw.seed.unwrap_or(ds),
            })
        }
        InitialKind::Amplitudes => {
            reject(raw.x0.is_some(), "x0")?;
            reject(raw.p0.is_some(), "p0")?;
            reject(raw.count.is_some(), "count")?;
            reject(raw.seed.is_some(), "seed")?;
            let amplitudes = raw.amplitudes.ok_or(ConfigError::Missing {
                section: "initial",
                keys: vec!["amplitudes"],
            })?;
            Ok(InitialState::Amplitudes { amplitudes })
        }
    }
}

impl From<&ScenarioConfig> for RawConfig {
    /// Fully populated file form of a resolved config.
    fn from(c: &ScenarioConfig) -> Self {
        let s = &c.system;
        let initial = match &c.initial {
            InitialState::Coherent { x0, p0 } => RawInitial {
                kind: Some(InitialKind::Coherent),
                x0: Some(*x0),
                p0: Some(*p0),
                ..Default::default()
            },
            InitialState::Random { count, seed } => RawInitial {
                kind: Some(InitialKind::Random),
                count: Some(*count),
                seed: Some(*seed),
                ..Default::default()
            },
            InitialState::Amplitudes { amplitudes } => RawInitial {
                kind: Some(InitialKind::Amplitudes),
                amplitudes: Some(amplitudes.clone()),
                ..Default::default()
            },
        };
        RawConfig {
            scenario: Some(RawScenario {
                id: Some(c.scenario),
                tau: Some(c.tau),
            }),
            system: Some(RawSystem {
                fock_dim: Some(s.fock_dim),
                hbar: Some(s.hbar),
                mass: Some(s.mass),
                spring_constant: Some(s.spring_constant),
                omega: Some(s.omega),
                mass2: Some(s.mass2),
                omega_s: Some(s.omega_s),
                g1: Some(s.g1),
                g2: Some(s.g2),
                lambda: Some(s.lambda),
            }),
            grid: Some(RawGrid {
                t_max: Some(c.grid.t_max),
                steps: Some(c.grid.steps),
            }),
            initial: Some(initial),
            sweep: Some(RawSweep {
                x0: Some(c.sweep.x0.clone()),
                variants: Some(c.sweep.variants.clone()),
            }),
        }
    }
}

/// Reads, overrides and resolves a config file.
pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut raw = RawConfig::from_toml(&text, path)?;
    raw.apply(overrides);
    raw.resolve()
}
