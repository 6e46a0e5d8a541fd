//! Time evolution under `ρ̇ = −i[Ĥ,ρ] − (τ/2)[Ĥ,[Ĥ,ρ]]`.
//!
//! [`Propagator`] is the production path: in the eigenbasis of `Ĥ` every
//! entry evolves independently as
//!
//! ```text
//! ρ̃ₘₙ(t) = ρ̃ₘₙ(0) · exp(−i(Eₘ − Eₙ)t) · exp(−τ(Eₘ − Eₙ)²t/2)
//! ```
//!
//! [`evolve_rk4`] integrates the same equation directly in the original
//! basis and exists as an independent check of the closed form.
//!
//! Energies carry `ħ`, time exponents do not: phases are `exp(−iΔE·t)`.

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, FactorShape, Spectrum, C64};
use crate::model::OscillatorParams;
use crate::states::{linear_entropy, purity, DensityMatrix, StateVector};

/// Tolerances of the exact path's runtime invariant monitor.
pub const TRACE_TOLERANCE: f64 = 1e-12;
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
pub const ENERGY_TOLERANCE: f64 = 1e-9;
/// Largest imaginary part tolerated in `Tr(Ôρ)` for Hermitian `Ô`.
pub const IMAGINARY_RESIDUE: f64 = 1e-9;
/// Relative trace drift or norm growth at which the RK4 integrator gives up.
pub const RK4_TRACE_DRIFT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceParams {
    tau: f64,
}

impl DecoherenceParams {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::Validation(format!("tau must be finite and >= 0, got {tau}")));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `steps + 1` equally spaced times from 0 to `t_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Validation(format!(
                "t_max must be positive and finite, got {t_max}"
            )));
        }
        if steps == 0 {
            return Err(Error::Validation("time grid needs at least one step".into()));
        }
        Ok(Self { t_max, steps })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_max
        } else {
            self.t_max * k as f64 / self.steps as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// Time grid plus named real series of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    series: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let label = label.into();
        if values.len() != self.times.len() {
            return Err(Error::Dimension(format!(
                "series {label:?} has {} values for {} times",
                values.len(),
                self.times.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "series {label:?} is non-finite at index {bad}"
            )));
        }
        if self.get(&label).is_some() {
            return Err(Error::Validation(format!("duplicate series label {label:?}")));
        }
        self.series.push((label, values));
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.series.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    /// Like [`Trajectory::get`], but a missing label is an error.
    pub fn series(&self, label: &str) -> Result<&[f64]> {
        self.get(label)
            .ok_or_else(|| Error::Validation(format!("trajectory has no series {label:?}")))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.series.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Label of the linear entropy of factor `k` in [`evolve_series`] output.
pub fn subsystem_entropy_label(k: usize) -> String {
    format!("linear_entropy[{k}]")
}

/// Exact propagator for one initial state and one Hamiltonian spectrum.
#[derive(Clone, Debug)]
pub struct Propagator<'a> {
    spectrum: &'a Spectrum,
    shape: FactorShape,
    initial: ComplexMatrix,
    tau: f64,
}

impl<'a> Propagator<'a> {
    pub fn new(rho0: &DensityMatrix, spectrum: &'a Spectrum, tau: f64) -> Result<Self> {
        if rho0.dim() != spectrum.dim() {
            return Err(Error::Dimension(format!(
                "state dim {} vs Hamiltonian dim {}",
                rho0.dim(),
                spectrum.dim()
            )));
        }
        DecoherenceParams::new(tau)?;
        Ok(Self {
            spectrum,
            shape: rho0.shape().clone(),
            initial: spectrum.to_eigenbasis(rho0.matrix()),
            tau,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
    }

    /// `ρ̃(0)`, the initial state in the eigenbasis.
    pub fn initial_eigenbasis(&self) -> &ComplexMatrix {
        &self.initial
    }

    /// `ρ̃(t)` in the eigenbasis.
    pub fn eigenbasis_at(&self, t: f64) -> Result<ComplexMatrix> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Validation(format!("evolution time must be >= 0, got {t}")));
        }
        let e = self.spectrum.energies();
        let tau = self.tau;
        Ok(ComplexMatrix::from_fn(e.len(), |m, n| {
            let gap = e[m] - e[n];
            if gap == 0.0 {
                return self.initial[(m, n)];
            }
            let rate = C64::new(-tau * gap * gap / 2.0, -gap);
            self.initial[(m, n)] * (rate * t).exp()
        }))
    }

    pub fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        let evolved = self.spectrum.from_eigenbasis(&self.eigenbasis_at(t)?);
        Ok(DensityMatrix::from_evolved(evolved, self.shape.clone()))
    }

    /// Largest `exp(−τΔE²t)` over eigenbasis coherences that are present in
    /// the initial state and belong to distinct energies. 0 when there are
    /// none (the state is already stationary).
    pub fn saturation_factor(&self, t: f64) -> f64 {
        let e = self.spectrum.energies();
        let scale = e.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        let mut worst = 0.0f64;
        for m in 0..e.len() {
            for n in 0..m {
                let gap = e[m] - e[n];
                if gap.abs() <= 1e-9 * scale || self.initial[(m, n)].norm() <= 1e-12 {
                    continue;
                }
                worst = worst.max((-self.tau * gap * gap * t).exp());
            }
        }
        worst
    }
}

/// `ρ(t)` from `ρ(0)` via the eigenbasis closed form.
pub fn propagate_exact(rho0: &DensityMatrix, spectrum: &Spectrum, tau: f64, t: f64) -> Result<DensityMatrix> {
    Propagator::new(rho0, spectrum, tau)?.state_at(t)
}

/// Checks trace, Hermiticity and energy of evolved states against the
/// initial state; any violation aborts with the offending time.
struct InvariantMonitor<'h> {
    hamiltonian: &'h ComplexMatrix,
    trace0: C64,
    energy0: f64,
}

impl<'h> InvariantMonitor<'h> {
    fn new(rho0: &DensityMatrix, hamiltonian: &'h ComplexMatrix) -> Self {
        Self {
            hamiltonian,
            trace0: rho0.matrix().trace(),
            energy0: hamiltonian.trace_product(rho0.matrix()).re,
        }
    }

    fn check(&self, t: f64, rho: &DensityMatrix) -> Result<()> {
        let drift = (rho.matrix().trace() - self.trace0).norm();
        if drift > TRACE_TOLERANCE {
            return Err(Error::Numerical(format!("trace drifted by {drift:.3e} at t = {t}")));
        }
        let defect = rho.matrix().hermiticity_defect();
        if defect > HERMITICITY_TOLERANCE {
            return Err(Error::Numerical(format!("‖ρ − ρ†‖ = {defect:.3e} at t = {t}")));
        }
        let energy = self.hamiltonian.trace_product(rho.matrix()).re;
        if (energy - self.energy0).abs() > ENERGY_TOLERANCE * self.energy0.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "energy changed from {} to {energy} at t = {t}",
                self.energy0
            )));
        }
        Ok(())
    }
}

fn real_expectation(op: &ComplexMatrix, rho: &DensityMatrix, label: &str, t: f64) -> Result<f64> {
    let z = rho.expectation(op)?;
    if z.im.abs() > IMAGINARY_RESIDUE {
        return Err(Error::Numerical(format!(
            "observable {label:?} has imaginary expectation {:.3e} at t = {t}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Evolves `rho0` across `grid` and records, per time: `Re Tr(Ôₖρ)` for each
/// observable, `purity`, `linear_entropy`, and for composite shapes the
/// linear entropy of every factor (see [`subsystem_entropy_label`]).
///
/// `Ĥ` is diagonalized once. Every state is checked by the invariant monitor.
pub fn evolve_series(
    rho0: &DensityMatrix,
    hamiltonian: &ComplexMatrix,
    tau: f64,
    grid: &TimeGrid,
    observables: &[(&str, &ComplexMatrix)],
) -> Result<Trajectory> {
    let spectrum = eig_hermitian(hamiltonian)?;
    evolve_series_with_spectrum(rho0, hamiltonian, &spectrum, tau, grid, observables)
}

/// [`evolve_series`] with a precomputed spectrum of `hamiltonian`.
pub fn evolve_series_with_spectrum(
    rho0: &DensityMatrix,
    hamiltonian: &ComplexMatrix,
    spectrum: &Spectrum,
    tau: f64,
    grid: &TimeGrid,
    observables: &[(&str, &ComplexMatrix)],
) -> Result<Trajectory> {
    if spectrum.dim() != hamiltonian.dim() {
        return Err(Error::Dimension("spectrum does not match the Hamiltonian".into()));
    }
    if hamiltonian.dim() != rho0.dim() {
        return Err(Error::Dimension(format!(
            "Hamiltonian dim {} vs state dim {}",
            hamiltonian.dim(),
            rho0.dim()
        )));
    }
    for (label, op) in observables {
        if op.dim() != rho0.dim() {
            return Err(Error::Dimension(format!(
                "observable {label:?} has dim {} but the state has {}",
                op.dim(),
                rho0.dim()
            )));
        }
    }
    let propagator = Propagator::new(rho0, spectrum, tau)?;
    let monitor = InvariantMonitor::new(rho0, hamiltonian);
    let factors = rho0.shape().factors();

    let times = grid.times();
    let mut values = vec![Vec::with_capacity(times.len()); observables.len()];
    let mut purities = Vec::with_capacity(times.len());
    let mut subsystem = vec![Vec::with_capacity(times.len()); if factors > 1 { factors } else { 0 }];

    for &t in &times {
        let rho = propagator.state_at(t)?;
        monitor.check(t, &rho)?;
        for ((label, op), out) in observables.iter().zip(values.iter_mut()) {
            out.push(real_expectation(op, &rho, label, t)?);
        }
        purities.push(purity(&rho));
        for (k, out) in subsystem.iter_mut().enumerate() {
            out.push(linear_entropy(&rho.reduce(&[k])?));
        }
    }

    let mut trajectory = Trajectory::new(times);
    for ((label, _), series) in observables.iter().zip(values) {
        trajectory.push(*label, series)?;
    }
    let entropies = purities.iter().map(|p| 1.0 - p).collect();
    trajectory.push("purity", purities)?;
    trajectory.push("linear_entropy", entropies)?;
    for (k, series) in subsystem.into_iter().enumerate() {
        trajectory.push(subsystem_entropy_label(k), series)?;
    }
    Ok(trajectory)
}

/// Right-hand side for Hermitian `ρ` and `Ĥ`.
///
/// With `C = [Ĥ,ρ] = Ĥρ − (Ĥρ)†` and `[Ĥ,C] = ĤC + (ĤC)†` (C is
/// anti-Hermitian) each evaluation costs two matrix products.
fn master_rhs(h: &ComplexMatrix, rho: &ComplexMatrix, tau: f64) -> ComplexMatrix {
    let k = h.matmul(rho);
    let comm = &k - &k.adjoint();
    let hc = h.matmul(&comm);
    let double = &hc + &hc.adjoint();
    &comm.scale(C64::new(0.0, -1.0)) - &double.scale_real(tau / 2.0)
}

/// Classical fixed-step RK4 from 0 to `grid.t_max()` with step `grid.dt()`.
///
/// Stability wants `dt · τ · ΔE_max² < 0.5`. The exact flow preserves the
/// trace and never increases `‖ρ‖_F`; a trace drift or norm growth beyond
/// [`RK4_TRACE_DRIFT`] aborts with the step at which it happened.
pub fn evolve_rk4(
    rho0: &DensityMatrix,
    hamiltonian: &ComplexMatrix,
    tau: f64,
    grid: &TimeGrid,
) -> Result<DensityMatrix> {
    if hamiltonian.dim() != rho0.dim() {
        return Err(Error::Dimension(format!(
            "Hamiltonian dim {} vs state dim {}",
            hamiltonian.dim(),
            rho0.dim()
        )));
    }
    let defect = hamiltonian.hermiticity_defect();
    if defect > crate::linalg::HERMITIAN_TOLERANCE * hamiltonian.frobenius_norm() {
        return Err(Error::NotHermitian {
            defect: defect / hamiltonian.frobenius_norm().max(f64::MIN_POSITIVE),
            tolerance: crate::linalg::HERMITIAN_TOLERANCE,
        });
    }
    DecoherenceParams::new(tau)?;

    let h = hamiltonian;
    let dt = grid.dt();
    let trace0 = rho0.matrix().trace();
    let norm_cap = rho0.matrix().frobenius_norm() * (1.0 + RK4_TRACE_DRIFT);
    let mut rho = rho0.matrix().clone();
    for step in 1..=grid.steps() {
        let k1 = master_rhs(h, &rho, tau);
        let k2 = master_rhs(h, &(&rho + &k1.scale_real(dt / 2.0)), tau);
        let k3 = master_rhs(h, &(&rho + &k2.scale_real(dt / 2.0)), tau);
        let k4 = master_rhs(h, &(&rho + &k3.scale_real(dt)), tau);
        let increment = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        rho = &rho + &increment.scale_real(dt / 6.0);

        let drift = (rho.trace() - trace0).norm();
        let norm = rho.frobenius_norm();
        if !(drift <= RK4_TRACE_DRIFT && norm <= norm_cap) {
            return Err(Error::Numerical(format!(
                "RK4 unstable: trace drift {drift:.3e}, norm {norm:.3e} at step {step} (t = {:.6}, dt = {dt:e}, tau = {tau})",
                step as f64 * dt
            )));
        }
    }
    Ok(DensityMatrix::from_evolved(rho, rho0.shape().clone()))
}

fn check_analytic_support(v: &StateVector, p: &OscillatorParams) -> Result<()> {
    let n = p.fock_dim();
    if v.dim() != n {
        return Err(Error::Dimension(format!(
            "state has {} levels but the oscillator is truncated at {n}",
            v.dim()
        )));
    }
    if let Some(level) = (0..n).rev().find(|&k| v.amplitudes()[k].norm() > 1e-14) {
        if level + 2 >= n {
            return Err(Error::Domain(format!(
                "state populates level {level}; closed forms need support below N − 2 = {}",
                n - 2
            )));
        }
    }
    Ok(())
}

/// `(Σ c*_l c_{l+1} √(l+1), Σ c*_l c_{l+2} √((l+1)(l+2)))`, i.e. `⟨â⟩` and
/// `⟨â²⟩` at `t = 0`.
fn ladder_sums(v: &StateVector) -> (C64, C64) {
    let c = v.amplitudes();
    let n = c.len();
    let mut first = C64::new(0.0, 0.0);
    let mut second = C64::new(0.0, 0.0);
    for l in 0..n.saturating_sub(1) {
        first += c[l].conj() * c[l + 1] * ((l + 1) as f64).sqrt();
    }
    for l in 0..n.saturating_sub(2) {
        second += c[l].conj() * c[l + 2] * (((l + 1) * (l + 2)) as f64).sqrt();
    }
    (first, second)
}

fn level_weight(v: &StateVector) -> f64 {
    v.populations()
        .iter()
        .enumerate()
        .map(|(n, pop)| (2 * n + 1) as f64 * pop)
        .sum()
}

/// Closed-form `⟨x̂⟩(t)` for a single oscillator.
pub fn analytic_x(t: f64, v: &StateVector, p: &OscillatorParams, tau: f64) -> Result<f64> {
    check_analytic_support(v, p)?;
    let quantum = p.hbar() * p.omega();
    let (down, _) = ladder_sums(v);
    let up = down.conj();
    let phase = C64::new(0.0, -quantum * t).exp();
    let envelope = (-tau * quantum * quantum * t / 2.0).exp();
    let bracket = phase * down + phase.conj() * up;
    Ok(p.position_scale() * envelope * bracket.re)
}

/// Closed-form `⟨p̂⟩(t)`.
pub fn analytic_p(t: f64, v: &StateVector, p: &OscillatorParams, tau: f64) -> Result<f64> {
    check_analytic_support(v, p)?;
    let quantum = p.hbar() * p.omega();
    let (down, _) = ladder_sums(v);
    let up = down.conj();
    let phase = C64::new(0.0, -quantum * t).exp();
    let envelope = (-tau * quantum * quantum * t / 2.0).exp();
    // p̂ = i√(ħmω/2)(â† − â)
    let bracket = C64::new(0.0, 1.0) * (phase.conj() * up - phase * down);
    Ok(p.momentum_scale() * envelope * bracket.re)
}

/// The `n ↔ n±2` coherence contribution shared by `⟨x̂²⟩` and `⟨p̂²⟩`.
fn two_quantum_term(t: f64, v: &StateVector, p: &OscillatorParams, tau: f64) -> f64 {
    let quantum = p.hbar() * p.omega();
    let (_, down2) = ladder_sums(v);
    let phase = C64::new(0.0, -2.0 * quantum * t).exp();
    let envelope = (-2.0 * tau * quantum * quantum * t).exp();
    envelope * (phase * down2 + phase.conj() * down2.conj()).re
}

/// Closed-form `⟨x̂²⟩(t)`; tends to `(ħ/2mω)Σ(2n+1)|cₙ|²`.
pub fn analytic_x2(t: f64, v: &StateVector, p: &OscillatorParams, tau: f64) -> Result<f64> {
    check_analytic_support(v, p)?;
    let scale = p.position_scale().powi(2);
    Ok(scale * (level_weight(v) + two_quantum_term(t, v, p, tau)))
}

/// Closed-form `⟨p̂²⟩(t)`; tends to `(ħmω/2)Σ(2n+1)|cₙ|²`.
pub fn analytic_p2(t: f64, v: &StateVector, p: &OscillatorParams, tau: f64) -> Result<f64> {
    check_analytic_support(v, p)?;
    let scale = p.momentum_scale().powi(2);
    Ok(scale * (level_weight(v) - two_quantum_term(t, v, p, tau)))
}

/// `S(t) = 1 − Σₘₙ |cₘ|²|cₙ|² exp(−τ(Eₙ − Eₘ)²t)` for a single oscillator.
pub fn analytic_entropy_single(t: f64, v: &StateVector, p: &OscillatorParams, tau: f64) -> Result<f64> {
    if v.dim() != p.fock_dim() {
        return Err(Error::Dimension(format!(
            "state has {} levels but the oscillator is truncated at {}",
            v.dim(),
            p.fock_dim()
        )));
    }
    let pops = v.populations();
    let mut retained = 0.0;
    for (m, pm) in pops.iter().enumerate() {
        for (n, pn) in pops.iter().enumerate() {
            let gap = p.level_energy(n) - p.level_energy(m);
            retained += pm * pn * (-tau * gap * gap * t).exp();
        }
    }
    Ok(1.0 - retained)
}

/// `σₓσ_p` per sample from the first and second moments.
pub fn uncertainty_product(x: &[f64], x2: &[f64], p: &[f64], p2: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if x2.len() != n || p.len() != n || p2.len() != n {
        return Err(Error::Dimension("moment series differ in length".into()));
    }
    (0..n)
        .map(|k| {
            let var_x = x2[k] - x[k] * x[k];
            let var_p = p2[k] - p[k] * p[k];
            if var_x < -1e-10 || var_p < -1e-10 {
                return Err(Error::Numerical(format!(
                    "negative variance at sample {k}: var_x = {var_x:.3e}, var_p = {var_p:.3e}"
                )));
            }
            Ok(var_x.max(0.0).sqrt() * var_p.max(0.0).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_distance;
    use crate::model::{build_single_oscillator_h, momentum_op, position_op};
    use crate::states::{coherent_two_level, pure_density};

    fn half_superposition() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = StateVector::from_amplitudes(&[C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
        pure_density(&v, &FactorShape::flat(2)).unwrap()
    }

    fn two_level_h() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[0.25, 0.75])
    }

    #[test]
    fn time_zero_is_identity() {
        let rho0 = half_superposition();
        let spectrum = eig_hermitian(&two_level_h()).unwrap();
        let rho = propagate_exact(&rho0, &spectrum, 0.1, 0.0).unwrap();
        assert!(frobenius_distance(rho.matrix(), rho0.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn two_level_phase_and_decay() {
        let rho0 = half_superposition();
        let spectrum = eig_hermitian(&two_level_h()).unwrap();
        for t in [0.7, 3.0, 40.0] {
            let unitary = propagate_exact(&rho0, &spectrum, 0.0, t).unwrap();
            let expected = C64::from_polar(0.5, 0.5 * t);
            // ρ₀₁ ∝ exp(−i(E₀ − E₁)t) = exp(+0.5it)
            assert!((unitary.matrix()[(0, 1)] - expected).norm() < 1e-14);
            assert!((unitary.matrix()[(1, 0)] - expected.conj()).norm() < 1e-14);

            let decayed = propagate_exact(&rho0, &spectrum, 0.1, t).unwrap();
            let magnitude = decayed.matrix()[(0, 1)].norm();
            assert!((magnitude - 0.5 * (-0.0125 * t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_time_and_mismatch_are_errors() {
        let rho0 = half_superposition();
        let spectrum = eig_hermitian(&two_level_h()).unwrap();
        assert!(propagate_exact(&rho0, &spectrum, 0.1, -1.0).is_err());
        let big = eig_hermitian(&ComplexMatrix::identity(3)).unwrap();
        assert!(matches!(
            propagate_exact(&rho0, &big, 0.1, 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn identity_observable_is_constant() {
        let grid = TimeGrid::new(10.0, 50).unwrap();
        let one = ComplexMatrix::identity(2);
        let traj = evolve_series(&half_superposition(), &two_level_h(), 0.1, &grid, &[("one", &one)]).unwrap();
        assert!(traj.series("one").unwrap().iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert_eq!(traj.len(), 51);
    }

    #[test]
    fn rk4_matches_exact_for_two_levels() {
        let rho0 = half_superposition();
        let h = two_level_h();
        let grid = TimeGrid::new(10.0, 10_000).unwrap();
        let rk = evolve_rk4(&rho0, &h, 0.0, &grid).unwrap();
        let exact = propagate_exact(&rho0, &eig_hermitian(&h).unwrap(), 0.0, 10.0).unwrap();
        assert!(frobenius_distance(rk.matrix(), exact.matrix()).unwrap() < 1e-8);
    }

    #[test]
    fn rk4_fixed_point() {
        let p = OscillatorParams::new(4.0, 0.5, 4).unwrap();
        let h = build_single_oscillator_h(&p);
        let rho0 = pure_density(&StateVector::basis(4, 2).unwrap(), &FactorShape::flat(4)).unwrap();
        let rk = evolve_rk4(&rho0, &h, 0.3, &TimeGrid::new(2.0, 200).unwrap()).unwrap();
        assert!(frobenius_distance(rk.matrix(), rho0.matrix()).unwrap() < 1e-10);
    }

    #[test]
    fn rk4_reports_instability() {
        let h = ComplexMatrix::from_real_diagonal(&[0.0, 100.0]);
        let err = evolve_rk4(&half_superposition(), &h, 1.0, &TimeGrid::new(10.0, 10).unwrap()).unwrap_err();
        assert!(
            matches!(err, Error::Numerical(ref m) if m.contains("RK4 unstable")),
            "{err}"
        );
    }

    #[test]
    fn ground_state_uncertainty_is_minimal() {
        let p = OscillatorParams::default();
        let rho = pure_density(
            &StateVector::basis(p.fock_dim(), 0).unwrap(),
            &FactorShape::flat(p.fock_dim()),
        )
        .unwrap();
        let (x, xp) = (position_op(&p), momentum_op(&p));
        let m = |op: &ComplexMatrix| rho.expectation(op).unwrap().re;
        let prod = uncertainty_product(&[m(&x)], &[m(&x.matmul(&x))], &[m(&xp)], &[m(&xp.matmul(&xp))]).unwrap();
        assert!((prod[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_variance_is_error() {
        assert!(uncertainty_product(&[1.0], &[0.5], &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn closed_forms_at_time_zero() {
        let p = OscillatorParams::default();
        let v = coherent_two_level(1.0 / 3.0, 0.0, &p).unwrap();
        assert!((analytic_x(0.0, &v, &p, 0.1).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(analytic_p(0.0, &v, &p, 0.1).unwrap().abs() < 1e-14);
        assert!(analytic_entropy_single(0.0, &v, &p, 0.1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn closed_form_periodic_without_decoherence() {
        let p = OscillatorParams::default();
        let v = coherent_two_level(0.4, 0.2, &p).unwrap();
        let period = std::f64::consts::TAU / p.omega();
        for t in [0.3, 2.0, 7.7] {
            let a = analytic_x(t, &v, &p, 0.0).unwrap();
            let b = analytic_x(t + period, &v, &p, 0.0).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_forms_vanish_at_late_times() {
        let p = OscillatorParams::default();
        let v = coherent_two_level(0.5, 0.0, &p).unwrap();
        assert!(analytic_x(5000.0, &v, &p, 0.1).unwrap().abs() < 1e-12);
        assert!(analytic_p(5000.0, &v, &p, 0.1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn uncertainty_limit_for_equal_superposition() {
        // Σ(2n+1)|cₙ|² = 2, so σₓσ_p → ħ/2 · 2 = 1.
        let p = OscillatorParams::default();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); p.fock_dim()];
        amps[0] = C64::new(s, 0.0);
        amps[1] = C64::new(s, 0.0);
        let v = StateVector::from_amplitudes(&amps).unwrap();
        let t = 3000.0;
        let x = analytic_x(t, &v, &p, 0.1).unwrap();
        let x2 = analytic_x2(t, &v, &p, 0.1).unwrap();
        let mom = analytic_p(t, &v, &p, 0.1).unwrap();
        let p2 = analytic_p2(t, &v, &p, 0.1).unwrap();
        let prod = uncertainty_product(&[x], &[x2], &[mom], &[p2]).unwrap()[0];
        assert!((prod - 1.0).abs() < 1e-12, "{prod}");
    }

    #[test]
    fn support_near_truncation_is_rejected() {
        let p = OscillatorParams::new(4.0, 0.5, 4).unwrap();
        let v = StateVector::basis(4, 2).unwrap();
        assert!(matches!(analytic_x(1.0, &v, &p, 0.1), Err(Error::Domain(_))));
        assert!(analytic_x(1.0, &StateVector::basis(4, 1).unwrap(), &p, 0.1).is_ok());
    }

    #[test]
    fn saturation_factor_of_two_level_state() {
        let rho0 = half_superposition();
        let spectrum = eig_hermitian(&two_level_h()).unwrap();
        let prop = Propagator::new(&rho0, &spectrum, 0.1).unwrap();
        assert!((prop.saturation_factor(100.0) - (-0.1f64 * 0.25 * 100.0).exp()).abs() < 1e-15);
        let ground = pure_density(&StateVector::basis(2, 0).unwrap(), &FactorShape::flat(2)).unwrap();
        assert_eq!(
            Propagator::new(&ground, &spectrum, 0.1).unwrap().saturation_factor(1.0),
            0.0
        );
    }

    #[test]
    fn grid_layout() {
        let g = TimeGrid::new(300.0, 3000).unwrap();
        let t = g.times();
        assert_eq!(t.len(), 3001);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 300.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }
}
