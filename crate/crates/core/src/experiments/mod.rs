//! Reproducible scenarios, each producing one CSV table.
//!
//! | scenario               | columns                                                        |
//! |------------------------|----------------------------------------------------------------|
//! | `fig1`                 | `D, S_final`                                                   |
//! | `phase_single`         | `tau, t, x, p, x2, p2, sigma_product, S`                       |
//! | `entropy_vs_x0`        | `x0, t, S`                                                     |
//! | `phase_multi`          | `variant, tau, t, x_osc, p_osc, x2_osc, p2_osc, sigma_product` |
//! | `energy_entropy_sweep` | `variant, x0, E_osc_final, S_final, E_total, saturation, status` |
//! | `entanglement_suite`   | `variant, tau, t, S_osc, S_total`                              |
//!
//! Scenarios with a `tau` column run both the unitary case (`tau = 0`) and
//! the configured decoherence strength.

mod runs;
mod table;
pub mod validation;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{DecoherenceParams, TimeGrid};
use crate::linalg::C64;
use crate::model::{Couplings, OscillatorParams, SpinParams, SystemSpec};
use crate::states::{coherent_two_level, with_spins_up, StateVector};

pub use runs::{
    decohered_entropy, run_energy_entropy_sweep, run_entanglement_suite, run_entropy_vs_x0, run_fig1, run_phase_multi,
    run_phase_single, simulate, RunOutput, Simulation,
};
pub use table::{Cell, CsvTable};

/// Decay factor below which a run counts as saturated.
pub const SATURATION_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Fig1,
    PhaseSingle,
    EntropyVsX0,
    PhaseMulti,
    EnergyEntropySweep,
    EntanglementSuite,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::Fig1,
        ScenarioId::PhaseSingle,
        ScenarioId::EntropyVsX0,
        ScenarioId::PhaseMulti,
        ScenarioId::EnergyEntropySweep,
        ScenarioId::EntanglementSuite,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::Fig1 => "fig1",
            ScenarioId::PhaseSingle => "phase_single",
            ScenarioId::EntropyVsX0 => "entropy_vs_x0",
            ScenarioId::PhaseMulti => "phase_multi",
            ScenarioId::EnergyEntropySweep => "energy_entropy_sweep",
            ScenarioId::EntanglementSuite => "entanglement_suite",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown scenario {s:?}")))
    }
}

/// The physical systems the scenarios compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Lone oscillator.
    Single,
    /// Oscillator and one active spin (`g2 = λ = 0`; spin 2 is inert).
    OscSpin,
    /// Oscillator and two spins, no spin–spin coupling (`λ = 0`).
    OscTwoSpinsDecoupled,
    /// Oscillator and two coupled spins.
    OscTwoSpinsCoupled,
    /// Two oscillators coupled through their separation.
    CoupledOscillators,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Single,
        Variant::OscSpin,
        Variant::OscTwoSpinsDecoupled,
        Variant::OscTwoSpinsCoupled,
        Variant::CoupledOscillators,
    ];

    /// The four composite systems.
    pub const MULTI: [Variant; 4] = [
        Variant::OscSpin,
        Variant::OscTwoSpinsDecoupled,
        Variant::OscTwoSpinsCoupled,
        Variant::CoupledOscillators,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Single => "single",
            Variant::OscSpin => "osc_spin",
            Variant::OscTwoSpinsDecoupled => "osc_two_spins_decoupled",
            Variant::OscTwoSpinsCoupled => "osc_two_spins_coupled",
            Variant::CoupledOscillators => "coupled_oscillators",
        }
    }

    pub fn is_composite(&self) -> bool {
        *self != Variant::Single
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Physical parameters shared by all variants. Oscillator 2 (coupled
/// oscillators only) uses `mass2` and the common `spring_constant`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub fock_dim: usize,
    pub hbar: f64,
    pub mass: f64,
    pub spring_constant: f64,
    pub omega: f64,
    pub mass2: f64,
    pub omega_s: f64,
    pub g1: f64,
    pub g2: f64,
    pub lambda: f64,
}

impl Default for PhysicalParams {
    /// k = 1, ω = 1/2 (m = 4), m₂ = 1, ω_s = 1, g₁ = g₂ = λ = 1, ħ = 1.
    fn default() -> Self {
        Self {
            fock_dim: 8,
            hbar: 1.0,
            mass: 4.0,
            spring_constant: 1.0,
            omega: 0.5,
            mass2: 1.0,
            omega_s: 1.0,
            g1: 1.0,
            g2: 1.0,
            lambda: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn oscillator(&self) -> Result<OscillatorParams> {
        OscillatorParams::from_parts(
            Some(self.mass),
            Some(self.spring_constant),
            Some(self.omega),
            self.hbar,
            self.fock_dim,
        )
    }

    pub fn second_oscillator(&self) -> Result<OscillatorParams> {
        OscillatorParams::from_parts(
            Some(self.mass2),
            Some(self.spring_constant),
            None,
            self.hbar,
            self.fock_dim,
        )
    }

    pub fn system(&self, variant: Variant) -> Result<SystemSpec> {
        let osc = self.oscillator()?;
        let spin = SpinParams::new(self.omega_s)?;
        Ok(match variant {
            Variant::Single => SystemSpec::single_oscillator(osc),
            Variant::OscSpin => SystemSpec::tripartite(osc, spin, Couplings::new(self.g1, 0.0, 0.0)?),
            Variant::OscTwoSpinsDecoupled => SystemSpec::tripartite(osc, spin, Couplings::new(self.g1, self.g2, 0.0)?),
            Variant::OscTwoSpinsCoupled => {
                SystemSpec::tripartite(osc, spin, Couplings::new(self.g1, self.g2, self.lambda)?)
            }
            Variant::CoupledOscillators => {
                SystemSpec::coupled_oscillators(osc, self.second_oscillator()?, self.lambda)?
            }
        })
    }
}

/// Embeds an oscillator state into a variant's full space: spins up, or the
/// second oscillator in its ground state.
pub fn embed_oscillator_state(variant: Variant, osc: &StateVector, spec: &SystemSpec) -> Result<StateVector> {
    Ok(match variant {
        Variant::Single => osc.clone(),
        Variant::OscSpin | Variant::OscTwoSpinsDecoupled | Variant::OscTwoSpinsCoupled => with_spins_up(osc),
        Variant::CoupledOscillators => {
            let second = spec.oscillators()[1].fock_dim();
            osc.tensor(&StateVector::basis(second, 0)?)
        }
    })
}

/// How the initial oscillator state is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Two-level state with the given `⟨x̂⟩`, `⟨p̂⟩`.
    Coherent { x0: f64, p0: f64 },
    /// `count` Haar-random states drawn from a seeded generator.
    Random { count: usize, seed: u64 },
    /// Explicit oscillator amplitudes as `[re, im]` pairs, zero-padded to
    /// the truncation.
    Amplitudes { amplitudes: Vec<[f64; 2]> },
}

impl InitialState {
    /// The single oscillator state this description denotes.
    pub fn oscillator_state(&self, osc: &OscillatorParams) -> Result<StateVector> {
        match self {
            InitialState::Coherent { x0, p0 } => coherent_two_level(*x0, *p0, osc),
            InitialState::Amplitudes { amplitudes } => {
                if amplitudes.len() > osc.fock_dim() {
                    return Err(Error::Dimension(format!(
                        "{} amplitudes exceed the truncation {}",
                        amplitudes.len(),
                        osc.fock_dim()
                    )));
                }
                let mut v = vec![C64::new(0.0, 0.0); osc.fock_dim()];
                for (slot, [re, im]) in v.iter_mut().zip(amplitudes) {
                    *slot = C64::new(*re, *im);
                }
                StateVector::from_amplitudes(&v)
            }
            InitialState::Random { .. } => Err(Error::Validation(
                "this scenario needs a single initial state, not a random ensemble".into(),
            )),
        }
    }

    /// Momentum of a coherent description (0 otherwise), for sweeps over x₀.
    pub fn p0(&self) -> f64 {
        match self {
            InitialState::Coherent { p0, .. } => *p0,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub steps: usize,
}

impl GridConfig {
    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_max, self.steps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub x0: Vec<f64>,
    pub variants: Vec<Variant>,
}

/// Fully resolved scenario description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub system: PhysicalParams,
    pub tau: f64,
    pub grid: GridConfig,
    pub initial: InitialState,
    pub sweep: SweepConfig,
}

/// `k/10` for `k` in `from..=to`, exact to the nearest double.
pub fn tenths(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| k as f64 / 10.0).collect()
}

impl ScenarioConfig {
    /// Defaults for a scenario: k = 1, ω = 1/2, τ = 0.1, T = 300.
    pub fn defaults(scenario: ScenarioId) -> Self {
        let mut system = PhysicalParams::default();
        let mut initial = InitialState::Coherent { x0: 0.5, p0: 0.0 };
        let mut sweep = SweepConfig {
            x0: Vec::new(),
            variants: Vec::new(),
        };
        match scenario {
            ScenarioId::Fig1 => {
                system.fock_dim = 2;
                initial = InitialState::Random {
                    count: 100_000,
                    seed: 0,
                };
            }
            ScenarioId::PhaseSingle => {
                system.fock_dim = 16;
                initial = InitialState::Coherent { x0: 1.0 / 3.0, p0: 0.0 };
            }
            ScenarioId::EntropyVsX0 => {
                system.fock_dim = 16;
                sweep.x0 = tenths(0, 5);
            }
            ScenarioId::PhaseMulti => sweep.variants = Variant::MULTI.to_vec(),
            ScenarioId::EnergyEntropySweep => {
                sweep.x0 = tenths(-5, 5);
                sweep.variants = Variant::ALL.to_vec();
            }
            ScenarioId::EntanglementSuite => sweep.variants = Variant::ALL.to_vec(),
        }
        Self {
            scenario,
            system,
            tau: 0.1,
            grid: GridConfig {
                t_max: 300.0,
                steps: 3000,
            },
            initial,
            sweep,
        }
    }

    /// Checks that every derived object can be built.
    pub fn validate(&self) -> Result<()> {
        DecoherenceParams::new(self.tau)?;
        self.grid.time_grid()?;
        let osc = self.system.oscillator()?;
        match self.scenario {
            ScenarioId::Fig1 => {
                if !matches!(self.initial, InitialState::Random { .. }) {
                    return Err(Error::Validation("fig1 needs a random initial ensemble".into()));
                }
                if self.tau <= 0.0 {
                    return Err(Error::Validation(
                        "fig1 needs tau > 0 to reach a decohered limit".into(),
                    ));
                }
            }
            ScenarioId::PhaseSingle => {
                self.initial.oscillator_state(&osc)?;
            }
            ScenarioId::PhaseMulti | ScenarioId::EntanglementSuite => {
                self.initial.oscillator_state(&osc)?;
                self.require_variants()?;
            }
            ScenarioId::EntropyVsX0 | ScenarioId::EnergyEntropySweep => {
                if self.sweep.x0.is_empty() {
                    return Err(Error::Validation("sweep.x0 must list at least one value".into()));
                }
                for &x0 in &self.sweep.x0 {
                    coherent_two_level(x0, self.initial.p0(), &osc)?;
                }
                if self.scenario == ScenarioId::EnergyEntropySweep {
                    self.require_variants()?;
                }
            }
        }
        for v in &self.sweep.variants {
            self.system.system(*v)?;
        }
        if self.scenario == ScenarioId::PhaseMulti && self.sweep.variants.contains(&Variant::Single) {
            return Err(Error::Validation("phase_multi covers composite variants only".into()));
        }
        Ok(())
    }

    fn require_variants(&self) -> Result<()> {
        if self.sweep.variants.is_empty() {
            return Err(Error::Validation(
                "sweep.variants must list at least one variant".into(),
            ));
        }
        Ok(())
    }

    /// `[0, τ]`, or just `[0]` when τ is zero.
    pub fn taus(&self) -> Vec<f64> {
        if self.tau > 0.0 {
            vec![0.0, self.tau]
        } else {
            vec![0.0]
        }
    }
}

/// Whether the slowest surviving coherence has decayed at the final time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationStatus {
    pub label: String,
    /// Largest `exp(−τΔE²T)` over coherences between distinct energies.
    pub factor: f64,
    pub saturated: bool,
}

impl SaturationStatus {
    pub fn new(label: impl Into<String>, factor: f64) -> Self {
        Self {
            label: label.into(),
            factor,
            saturated: factor < SATURATION_THRESHOLD,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.saturated {
            "saturated"
        } else {
            "unsaturated"
        }
    }
}

/// Runs a validated scenario end to end.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let grid = config.grid.time_grid()?;
    let params = &config.system;
    let osc = params.oscillator()?;
    match config.scenario {
        ScenarioId::Fig1 => {
            let InitialState::Random { count, seed } = config.initial else {
                unreachable!("validated above");
            };
            let spec = params.system(Variant::Single)?;
            run_fig1(params.fock_dim, count, seed, config.tau, &spec)
        }
        ScenarioId::PhaseSingle => {
            let v = config.initial.oscillator_state(&osc)?;
            let spec = params.system(Variant::Single)?;
            let mut out = RunOutput::empty(runs::PHASE_SINGLE_COLUMNS);
            for tau in config.taus() {
                out.extend(run_phase_single(tau, &spec, &v, &grid)?)?;
            }
            Ok(out)
        }
        ScenarioId::EntropyVsX0 => {
            let spec = params.system(Variant::Single)?;
            run_entropy_vs_x0(config.tau, &spec, &config.sweep.x0, config.initial.p0(), &grid)
        }
        ScenarioId::PhaseMulti => {
            let v = config.initial.oscillator_state(&osc)?;
            let mut out = RunOutput::empty(runs::PHASE_MULTI_COLUMNS);
            for &variant in &config.sweep.variants {
                for tau in config.taus() {
                    out.extend(run_phase_multi(variant, tau, &grid, params, &v)?)?;
                }
            }
            Ok(out)
        }
        ScenarioId::EnergyEntropySweep => run_energy_entropy_sweep(
            &config.sweep.variants,
            config.tau,
            &config.sweep.x0,
            config.initial.p0(),
            &grid,
            params,
        ),
        ScenarioId::EntanglementSuite => {
            let v = config.initial.oscillator_state(&osc)?;
            run_entanglement_suite(&config.sweep.variants, &config.taus(), &grid, params, &v)
        }
    }
}
