use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{embed_oscillator_state, PhysicalParams, SaturationStatus, Variant};
use crate::error::{Error, Result};
use crate::evolution::{
    evolve_rk4, evolve_series_with_spectrum, subsystem_entropy_label, uncertainty_product, Propagator, TimeGrid,
    Trajectory,
};
use crate::experiments::table::{Cell, CsvTable};
use crate::linalg::{eig_hermitian, embed_factor, ComplexMatrix, Spectrum};
use crate::model::{build_hamiltonian, momentum_op, oscillator_energy_op, position_op, SystemSpec};
use crate::states::{
    coherent_two_level, distance_to_uniform, linear_entropy, pure_density, random_pure_state, DensityMatrix,
    StateVector,
};

pub(crate) const PHASE_SINGLE_COLUMNS: &[&str] = &["tau", "t", "x", "p", "x2", "p2", "sigma_product", "S"];
pub(crate) const PHASE_MULTI_COLUMNS: &[&str] = &[
    "variant",
    "tau",
    "t",
    "x_osc",
    "p_osc",
    "x2_osc",
    "p2_osc",
    "sigma_product",
];
const FIG1_COLUMNS: &[&str] = &["D", "S_final"];
const ENTROPY_VS_X0_COLUMNS: &[&str] = &["x0", "t", "S"];
const SWEEP_COLUMNS: &[&str] = &[
    "variant",
    "x0",
    "E_osc_final",
    "S_final",
    "E_total",
    "saturation",
    "status",
];
const ENTANGLEMENT_COLUMNS: &[&str] = &["variant", "tau", "t", "S_osc", "S_total"];

/// fig1 samples cross-checked against the time-stepped integrator.
const FIG1_CROSS_CHECKS: usize = 100;
const FIG1_CROSS_CHECK_TOLERANCE: f64 = 1e-6;
/// fig1 saturation time is chosen so the slowest coherence has decayed by `e^{-30}`.
const FIG1_DECAY_EXPONENT: f64 = 30.0;
const FIG1_RK4_DT: f64 = 0.1;

/// A scenario's table plus the saturation report for each run in it.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub table: CsvTable,
    pub saturation: Vec<SaturationStatus>,
}

impl RunOutput {
    pub fn empty(columns: &[&str]) -> Self {
        Self {
            table: CsvTable::new(columns.iter().copied()),
            saturation: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: RunOutput) -> Result<()> {
        self.table.extend(other.table)?;
        self.saturation.extend(other.saturation);
        Ok(())
    }
}

/// One system prepared for evolution: Hamiltonian, its spectrum and `ρ(0)`.
#[derive(Clone, Debug)]
pub struct Simulation {
    spec: SystemSpec,
    hamiltonian: ComplexMatrix,
    spectrum: Spectrum,
    rho0: DensityMatrix,
}

impl Simulation {
    /// `state` must live in the full space of `spec`.
    pub fn new(spec: SystemSpec, state: &StateVector) -> Result<Self> {
        let hamiltonian = build_hamiltonian(&spec)?;
        let spectrum = eig_hermitian(&hamiltonian)?;
        let rho0 = pure_density(state, &spec.factor_shape())?;
        Ok(Self {
            spec,
            hamiltonian,
            spectrum,
            rho0,
        })
    }

    /// Builds a variant from the shared parameters, embedding an oscillator state.
    pub fn for_variant(variant: Variant, params: &PhysicalParams, osc_state: &StateVector) -> Result<Self> {
        let spec = params.system(variant)?;
        let state = embed_oscillator_state(variant, osc_state, &spec)?;
        Self::new(spec, &state)
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn initial(&self) -> &DensityMatrix {
        &self.rho0
    }

    pub fn trajectory(&self, tau: f64, grid: &TimeGrid, observables: &[(&str, &ComplexMatrix)]) -> Result<Trajectory> {
        evolve_series_with_spectrum(&self.rho0, &self.hamiltonian, &self.spectrum, tau, grid, observables)
    }

    pub fn saturation_factor(&self, tau: f64, t: f64) -> Result<f64> {
        Ok(Propagator::new(&self.rho0, &self.spectrum, tau)?.saturation_factor(t))
    }

    /// `x̂, p̂, x̂², p̂²` of the primary oscillator, lifted to the full space.
    pub fn oscillator_moments(&self) -> Result<[ComplexMatrix; 4]> {
        let osc = self.spec.oscillator();
        let shape = self.spec.factor_shape();
        let x = position_op(osc);
        let p = momentum_op(osc);
        let x2 = x.matmul(&x);
        let p2 = p.matmul(&p);
        Ok([
            embed_factor(&x, &shape, 0)?,
            embed_factor(&p, &shape, 0)?,
            embed_factor(&x2, &shape, 0)?,
            embed_factor(&p2, &shape, 0)?,
        ])
    }

    /// Linear entropy of the primary oscillator: the reduced state for
    /// composite systems, the full state otherwise.
    fn oscillator_entropy<'t>(&self, trajectory: &'t Trajectory) -> Result<&'t [f64]> {
        if self.spec.factor_shape().factors() > 1 {
            trajectory.series(&subsystem_entropy_label(0))
        } else {
            trajectory.series("linear_entropy")
        }
    }
}

/// Convenience wrapper: one variant, one τ, the oscillator moments recorded.
pub fn simulate(
    variant: Variant,
    params: &PhysicalParams,
    osc_state: &StateVector,
    tau: f64,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let sim = Simulation::for_variant(variant, params, osc_state)?;
    let [x, p, x2, p2] = sim.oscillator_moments()?;
    sim.trajectory(tau, grid, &[("x", &x), ("p", &p), ("x2", &x2), ("p2", &p2)])
}

fn moments_trajectory(sim: &Simulation, tau: f64, grid: &TimeGrid) -> Result<(Trajectory, Vec<f64>)> {
    let [x, p, x2, p2] = sim.oscillator_moments()?;
    let traj = sim.trajectory(tau, grid, &[("x", &x), ("p", &p), ("x2", &x2), ("p2", &p2)])?;
    let sigma = uncertainty_product(
        traj.series("x")?,
        traj.series("x2")?,
        traj.series("p")?,
        traj.series("p2")?,
    )?;
    Ok((traj, sigma))
}

fn status(label: String, sim: &Simulation, tau: f64, grid: &TimeGrid) -> Result<SaturationStatus> {
    Ok(SaturationStatus::new(label, sim.saturation_factor(tau, grid.t_max())?))
}

/// Random dim-level states: distance from the uniform superposition and the
/// decohered-limit entropy `1 − Σ|cᵢ|⁴`.
///
/// The first [`FIG1_CROSS_CHECKS`] samples are also integrated with RK4 to a
/// time where every coherence has decayed by `e^{-30}`; a mismatch above
/// `1e-6` is an error.
pub fn run_fig1(dim: usize, n_samples: usize, seed: u64, tau: f64, spec: &SystemSpec) -> Result<RunOutput> {
    if dim < 2 {
        return Err(Error::Validation(format!("fig1 needs dim >= 2, got {dim}")));
    }
    if spec.dim() != dim {
        return Err(Error::Dimension(format!(
            "system dim {} vs requested dim {dim}",
            spec.dim()
        )));
    }
    if tau <= 0.0 {
        return Err(Error::Validation("fig1 needs tau > 0".into()));
    }
    let hamiltonian = build_hamiltonian(spec)?;
    let spectrum = eig_hermitian(&hamiltonian)?;
    let e = spectrum.energies();
    let min_gap = e.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if min_gap.is_nan() || min_gap <= 0.0 {
        return Err(Error::Validation("fig1 needs a non-degenerate spectrum".into()));
    }
    let t_sat = FIG1_DECAY_EXPONENT / (tau * min_gap * min_gap);
    let checks = FIG1_CROSS_CHECKS.min(n_samples);
    let rk4_grid = TimeGrid::new(t_sat, (t_sat / FIG1_RK4_DT).ceil() as usize)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RunOutput::empty(FIG1_COLUMNS);
    for k in 0..n_samples {
        let v = random_pure_state(dim, &mut rng)?;
        let s_final = decohered_entropy(&v);
        if k < checks {
            let rho0 = pure_density(&v, &spec.factor_shape())?;
            let stepped = linear_entropy(&evolve_rk4(&rho0, &hamiltonian, tau, &rk4_grid)?);
            if (stepped - s_final).abs() > FIG1_CROSS_CHECK_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "sample {k}: time-stepped entropy {stepped} vs decohered limit {s_final}"
                )));
            }
        }
        out.table
            .push_row(vec![distance_to_uniform(&v).into(), s_final.into()])?;
    }
    let factor = (-tau * min_gap * min_gap * t_sat).exp();
    out.saturation.push(SaturationStatus::new("fig1", factor));
    Ok(out)
}

/// `1 − Σ|cᵢ|⁴`, the linear entropy once all coherences have decayed
/// (non-degenerate spectrum). Populations are renormalized first so that
/// equal superpositions give exactly `1 − 1/dim`.
pub fn decohered_entropy(v: &StateVector) -> f64 {
    let pops = v.populations();
    let total: f64 = pops.iter().sum();
    1.0 - pops.iter().map(|p| (p / total).powi(2)).sum::<f64>()
}

/// Single-oscillator phase-space trajectory and entropy.
pub fn run_phase_single(tau: f64, spec: &SystemSpec, state: &StateVector, grid: &TimeGrid) -> Result<RunOutput> {
    let sim = Simulation::new(spec.clone(), state)?;
    let (traj, sigma) = moments_trajectory(&sim, tau, grid)?;
    let mut out = RunOutput::empty(PHASE_SINGLE_COLUMNS);
    let (x, p, x2, p2) = (
        traj.series("x")?,
        traj.series("p")?,
        traj.series("x2")?,
        traj.series("p2")?,
    );
    let s = traj.series("linear_entropy")?;
    for (k, &t) in traj.times().iter().enumerate() {
        out.table.push_row(
            [tau, t, x[k], p[k], x2[k], p2[k], sigma[k], s[k]]
                .into_iter()
                .map(Cell::from)
                .collect(),
        )?;
    }
    out.saturation.push(status(format!("tau={tau}"), &sim, tau, grid)?);
    Ok(out)
}

/// One entropy trajectory per initial displacement (coherent states with
/// momentum `p0`).
pub fn run_entropy_vs_x0(tau: f64, spec: &SystemSpec, x0_list: &[f64], p0: f64, grid: &TimeGrid) -> Result<RunOutput> {
    let mut out = RunOutput::empty(ENTROPY_VS_X0_COLUMNS);
    for &x0 in x0_list {
        let v = coherent_two_level(x0, p0, spec.oscillator())?;
        let sim = Simulation::new(spec.clone(), &v)?;
        let traj = sim.trajectory(tau, grid, &[])?;
        let s = sim.oscillator_entropy(&traj)?;
        for (&t, &s) in traj.times().iter().zip(s) {
            out.table.push_row(vec![x0.into(), t.into(), s.into()])?;
        }
        out.saturation.push(status(format!("x0={x0}"), &sim, tau, grid)?);
    }
    Ok(out)
}

/// Moments of the traced-out oscillator for one composite variant.
pub fn run_phase_multi(
    variant: Variant,
    tau: f64,
    grid: &TimeGrid,
    params: &PhysicalParams,
    osc_state: &StateVector,
) -> Result<RunOutput> {
    if !variant.is_composite() {
        return Err(Error::Validation("phase_multi covers composite variants only".into()));
    }
    let sim = Simulation::for_variant(variant, params, osc_state)?;
    let (traj, sigma) = moments_trajectory(&sim, tau, grid)?;
    let (x, p, x2, p2) = (
        traj.series("x")?,
        traj.series("p")?,
        traj.series("x2")?,
        traj.series("p2")?,
    );
    let mut out = RunOutput::empty(PHASE_MULTI_COLUMNS);
    for (k, &t) in traj.times().iter().enumerate() {
        let mut row = vec![Cell::from(variant.as_str())];
        row.extend([tau, t, x[k], p[k], x2[k], p2[k], sigma[k]].map(Cell::from));
        out.table.push_row(row)?;
    }
    out.saturation
        .push(status(format!("{variant} tau={tau}"), &sim, tau, grid)?);
    Ok(out)
}

/// Final oscillator energy `⟨Ĥ⟩ − ⟨Ĥ − ĥ_o⟩` and oscillator entropy per
/// variant and displacement.
pub fn run_energy_entropy_sweep(
    variants: &[Variant],
    tau: f64,
    x0_list: &[f64],
    p0: f64,
    grid: &TimeGrid,
    params: &PhysicalParams,
) -> Result<RunOutput> {
    let osc = params.oscillator()?;
    let mut out = RunOutput::empty(SWEEP_COLUMNS);
    for &variant in variants {
        for &x0 in x0_list {
            let v = coherent_two_level(x0, p0, &osc)?;
            let sim = Simulation::for_variant(variant, params, &v)?;
            let rest = sim.hamiltonian() - &oscillator_energy_op(sim.spec())?;
            let traj = sim.trajectory(tau, grid, &[("H", sim.hamiltonian()), ("H_rest", &rest)])?;
            let last = traj.len() - 1;
            let e_total = traj.series("H")?[last];
            let e_osc = e_total - traj.series("H_rest")?[last];
            let s_final = sim.oscillator_entropy(&traj)?[last];
            let sat = status(format!("{variant} x0={x0}"), &sim, tau, grid)?;
            out.table.push_row(vec![
                variant.as_str().into(),
                x0.into(),
                e_osc.into(),
                s_final.into(),
                e_total.into(),
                sat.factor.into(),
                sat.status().into(),
            ])?;
            out.saturation.push(sat);
        }
    }
    Ok(out)
}

/// Oscillator and total linear entropy over time, for each variant and τ.
pub fn run_entanglement_suite(
    variants: &[Variant],
    taus: &[f64],
    grid: &TimeGrid,
    params: &PhysicalParams,
    osc_state: &StateVector,
) -> Result<RunOutput> {
    let mut out = RunOutput::empty(ENTANGLEMENT_COLUMNS);
    for &variant in variants {
        let sim = Simulation::for_variant(variant, params, osc_state)?;
        for &tau in taus {
            let traj = sim.trajectory(tau, grid, &[])?;
            let s_osc = sim.oscillator_entropy(&traj)?;
            let s_total = traj.series("linear_entropy")?;
            for (k, &t) in traj.times().iter().enumerate() {
                out.table.push_row(vec![
                    variant.as_str().into(),
                    tau.into(),
                    t.into(),
                    s_osc[k].into(),
                    s_total[k].into(),
                ])?;
            }
            out.saturation
                .push(status(format!("{variant} tau={tau}"), &sim, tau, grid)?);
        }
    }
    Ok(out)
}
