//! Fast self-checks on small truncations, run by `decohere validate`.

use serde::Serialize;

use super::{PhysicalParams, Simulation, Variant};
use crate::error::Result;
use crate::evolution::{analytic_x, evolve_rk4, propagate_exact, TimeGrid};
use crate::linalg::{frobenius_distance, ComplexMatrix};
use crate::model::total_excitation_op;
use crate::states::{coherent_two_level, purity};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_measure(name: &str, value: Result<f64>, tolerance: f64) -> Self {
        match value {
            Ok(v) => Self {
                name: name.into(),
                passed: v.is_finite() && v < tolerance,
                detail: format!("{v:.3e} (tolerance {tolerance:.0e})"),
            },
            Err(e) => Self {
                name: name.into(),
                passed: false,
                detail: e.to_string(),
            },
        }
    }
}

fn small_params() -> PhysicalParams {
    PhysicalParams {
        fock_dim: 4,
        ..PhysicalParams::default()
    }
}

fn simulation(variant: Variant, x0: f64) -> Result<Simulation> {
    let params = small_params();
    let v = coherent_two_level(x0, 0.0, &params.oscillator()?)?;
    Simulation::for_variant(variant, &params, &v)
}

fn max_over_variants(f: impl Fn(Variant) -> Result<f64>) -> Result<f64> {
    Variant::ALL.iter().try_fold(0.0f64, |acc, &v| Ok(acc.max(f(v)?)))
}

fn oracle_distance() -> Result<f64> {
    let grid = TimeGrid::new(1.0, 1000)?;
    max_over_variants(|variant| {
        let sim = simulation(variant, 0.5)?;
        let mut worst = 0.0f64;
        for tau in [0.0, 0.1] {
            let exact = propagate_exact(sim.initial(), sim.spectrum(), tau, grid.t_max())?;
            let stepped = evolve_rk4(sim.initial(), sim.hamiltonian(), tau, &grid)?;
            worst = worst.max(frobenius_distance(exact.matrix(), stepped.matrix())?);
        }
        Ok(worst)
    })
}

fn unitary_purity_defect() -> Result<f64> {
    max_over_variants(|variant| {
        let sim = simulation(variant, 0.5)?;
        let traj = sim.trajectory(0.0, &TimeGrid::new(50.0, 100)?, &[])?;
        Ok(traj
            .series("purity")?
            .iter()
            .fold(0.0f64, |acc, p| acc.max((p - 1.0).abs())))
    })
}

fn entropy_decrease() -> Result<f64> {
    max_over_variants(|variant| {
        let sim = simulation(variant, 0.5)?;
        let traj = sim.trajectory(0.1, &TimeGrid::new(50.0, 100)?, &[])?;
        let s = traj.series("linear_entropy")?;
        Ok(s.windows(2).fold(0.0f64, |acc, w| acc.max(w[0] - w[1])))
    })
}

fn excitation_commutator() -> Result<f64> {
    let sim = simulation(Variant::OscTwoSpinsCoupled, 0.5)?;
    let n = total_excitation_op(sim.spec())?;
    Ok(sim.hamiltonian().commutator(&n).frobenius_norm())
}

fn analytic_position_error() -> Result<f64> {
    let params = PhysicalParams {
        fock_dim: 8,
        ..PhysicalParams::default()
    };
    let osc = params.oscillator()?;
    let v = coherent_two_level(1.0 / 3.0, 0.0, &osc)?;
    let sim = Simulation::for_variant(Variant::Single, &params, &v)?;
    let [x, ..] = sim.oscillator_moments()?;
    let grid = TimeGrid::new(60.0, 60)?;
    let traj = sim.trajectory(0.1, &grid, &[("x", &x)])?;
    let mut worst = 0.0f64;
    for (&t, &xm) in traj.times().iter().zip(traj.series("x")?) {
        worst = worst.max((xm - analytic_x(t, &v, &osc, 0.1)?).abs());
    }
    Ok(worst)
}

fn factorization_error() -> Result<f64> {
    let params = PhysicalParams {
        fock_dim: 4,
        g1: 0.0,
        g2: 0.0,
        lambda: 0.0,
        ..PhysicalParams::default()
    };
    let v = coherent_two_level(0.5, 0.0, &params.oscillator()?)?;
    let grid = TimeGrid::new(20.0, 40)?;
    let single = Simulation::for_variant(Variant::Single, &params, &v)?;
    let triple = Simulation::for_variant(Variant::OscTwoSpinsCoupled, &params, &v)?;
    let mut worst = 0.0f64;
    for &t in &grid.times() {
        let a = propagate_exact(single.initial(), single.spectrum(), 0.1, t)?;
        let b = propagate_exact(triple.initial(), triple.spectrum(), 0.1, t)?.reduce(&[0])?;
        worst = worst.max(frobenius_distance(a.matrix(), b.matrix())?);
    }
    Ok(worst)
}

fn hermiticity_defect() -> Result<f64> {
    max_over_variants(|variant| {
        let h: ComplexMatrix = simulation(variant, 0.0)?.hamiltonian().clone();
        Ok(h.hermiticity_defect())
    })
}

fn initial_purity_defect() -> Result<f64> {
    max_over_variants(|variant| Ok((purity(simulation(variant, 0.5)?.initial()) - 1.0).abs()))
}

/// Runs every check; never short-circuits.
pub fn invariant_suite() -> Vec<CheckOutcome> {
    vec![
        CheckOutcome::from_measure("hamiltonians_hermitian", hermiticity_defect(), 1e-12),
        CheckOutcome::from_measure("initial_states_pure", initial_purity_defect(), 1e-12),
        CheckOutcome::from_measure("exact_matches_rk4", oracle_distance(), 1e-8),
        CheckOutcome::from_measure("unitary_purity", unitary_purity_defect(), 1e-10),
        CheckOutcome::from_measure("entropy_nondecreasing", entropy_decrease(), 1e-10),
        CheckOutcome::from_measure("excitation_commutator", excitation_commutator(), 1e-10),
        CheckOutcome::from_measure("analytic_position", analytic_position_error(), 1e-9),
        CheckOutcome::from_measure("factorization", factorization_error(), 1e-10),
    ]
}
