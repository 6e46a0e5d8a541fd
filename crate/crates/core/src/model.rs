//! Oscillator and spin operators, and the three system Hamiltonians.
//!
//! Conventions: Fock states `|n⟩` are basis vector `n`; a spin's `|↑⟩` is
//! `[1, 0]ᵀ`. Composite systems are ordered oscillator, spin 1, spin 2 (or
//! oscillator 1, oscillator 2).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{embed_factor, tensor_all, tensor_product, ComplexMatrix, FactorShape, C64};

/// Relative tolerance for `ω = √(k/m)` when all three are supplied.
const OMEGA_CONSISTENCY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorParams {
    mass: f64,
    omega: f64,
    hbar: f64,
    fock_dim: usize,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, fock_dim: usize) -> Result<Self> {
        Self::with_hbar(mass, omega, 1.0, fock_dim)
    }

    pub fn with_hbar(mass: f64, omega: f64, hbar: f64, fock_dim: usize) -> Result<Self> {
        for (name, v) in [("mass", mass), ("omega", omega), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if fock_dim < 2 {
            return Err(Error::Validation(format!(
                "fock_dim must be at least 2, got {fock_dim}"
            )));
        }
        Ok(Self {
            mass,
            omega,
            hbar,
            fock_dim,
        })
    }

    /// Resolves an oscillator from any two (or all three, consistently) of
    /// mass, spring constant and angular frequency.
    pub fn from_parts(
        mass: Option<f64>,
        spring_constant: Option<f64>,
        omega: Option<f64>,
        hbar: f64,
        fock_dim: usize,
    ) -> Result<Self> {
        let (m, w) = match (mass, spring_constant, omega) {
            (Some(m), Some(k), Some(w)) => {
                let implied = (k / m).sqrt();
                if (implied - w).abs() > OMEGA_CONSISTENCY * w.abs().max(implied.abs()) {
                    return Err(Error::Validation(format!(
                        "inconsistent oscillator: omega = {w} but sqrt(spring_constant/mass) = sqrt({k}/{m}) = {implied}"
                    )));
                }
                (m, w)
            }
            (Some(m), Some(k), None) => (m, (k / m).sqrt()),
            (Some(m), None, Some(w)) => (m, w),
            (None, Some(k), Some(w)) => (k / (w * w), w),
            _ => {
                return Err(Error::Validation(
                    "oscillator needs two of mass, spring_constant, omega".into(),
                ))
            }
        };
        if let Some(k) = spring_constant {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Validation(format!("spring_constant must be positive, got {k}")));
            }
        }
        Self::with_hbar(m, w, hbar, fock_dim)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn spring_constant(&self) -> f64 {
        self.mass * self.omega * self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn with_fock_dim(self, fock_dim: usize) -> Result<Self> {
        Self::with_hbar(self.mass, self.omega, self.hbar, fock_dim)
    }

    /// Energy of level `n`: `(n + 1/2)ħω`.
    pub fn level_energy(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.hbar * self.omega
    }

    /// `√(ħ/2mω)`, the scale of `x̂` in units of `â + â†`.
    pub fn position_scale(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }

    /// `√(ħmω/2)`, the scale of `p̂`.
    pub fn momentum_scale(&self) -> f64 {
        (self.hbar * self.mass * self.omega / 2.0).sqrt()
    }
}

impl Default for OscillatorParams {
    /// k = 1, ω = 1/2, hence m = 4; ħ = 1; N = 16.
    fn default() -> Self {
        Self {
            mass: 4.0,
            omega: 0.5,
            hbar: 1.0,
            fock_dim: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinParams {
    pub omega_s: f64,
}

impl SpinParams {
    pub fn new(omega_s: f64) -> Result<Self> {
        if !omega_s.is_finite() {
            return Err(Error::Validation(format!("omega_s must be finite, got {omega_s}")));
        }
        Ok(Self { omega_s })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Couplings {
    pub g1: f64,
    pub g2: f64,
    pub lambda: f64,
}

impl Couplings {
    pub fn new(g1: f64, g2: f64, lambda: f64) -> Result<Self> {
        for (name, v) in [("g1", g1), ("g2", g2), ("lambda", lambda)] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(Self { g1, g2, lambda })
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    SingleOscillator,
    Tripartite,
    CoupledOscillators,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::SingleOscillator => "single_oscillator",
            SystemKind::Tripartite => "tripartite",
            SystemKind::CoupledOscillators => "coupled_oscillators",
        })
    }
}

/// Declarative description of one of the three physical systems.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    kind: SystemKind,
    oscillators: Vec<OscillatorParams>,
    spin: Option<SpinParams>,
    couplings: Couplings,
}

impl SystemSpec {
    pub fn single_oscillator(osc: OscillatorParams) -> Self {
        Self {
            kind: SystemKind::SingleOscillator,
            oscillators: vec![osc],
            spin: None,
            couplings: Couplings::zero(),
        }
    }

    /// Oscillator plus two spins sharing the splitting `spin.omega_s`.
    pub fn tripartite(osc: OscillatorParams, spin: SpinParams, couplings: Couplings) -> Self {
        Self {
            kind: SystemKind::Tripartite,
            oscillators: vec![osc],
            spin: Some(spin),
            couplings,
        }
    }

    /// Two oscillators coupled through `(λ/2)(x̂₁ − x̂₂)²`.
    pub fn coupled_oscillators(osc1: OscillatorParams, osc2: OscillatorParams, lambda: f64) -> Result<Self> {
        Ok(Self {
            kind: SystemKind::CoupledOscillators,
            oscillators: vec![osc1, osc2],
            spin: None,
            couplings: Couplings::new(0.0, 0.0, lambda)?,
        })
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    /// The primary oscillator (factor 0).
    pub fn oscillator(&self) -> &OscillatorParams {
        &self.oscillators[0]
    }

    pub fn oscillators(&self) -> &[OscillatorParams] {
        &self.oscillators
    }

    pub fn spin(&self) -> Option<&SpinParams> {
        self.spin.as_ref()
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn factor_shape(&self) -> FactorShape {
        let dims = match self.kind {
            SystemKind::SingleOscillator => vec![self.oscillators[0].fock_dim],
            SystemKind::Tripartite => vec![self.oscillators[0].fock_dim, 2, 2],
            SystemKind::CoupledOscillators => {
                vec![self.oscillators[0].fock_dim, self.oscillators[1].fock_dim]
            }
        };
        FactorShape::new(dims).expect("fock_dim >= 2 by construction")
    }

    pub fn dim(&self) -> usize {
        self.factor_shape().total()
    }

    fn expect_kind(&self, expected: SystemKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::WrongKind {
                expected,
                actual: self.kind,
            });
        }
        Ok(())
    }
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Annihilation operator `â` truncated to `n` Fock levels.
pub fn lowering_op(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Validation(format!(
            "Fock truncation must be at least 2, got {n}"
        )));
    }
    let mut a = ComplexMatrix::zeros(n);
    for k in 1..n {
        a[(k - 1, k)] = real((k as f64).sqrt());
    }
    Ok(a)
}

/// Creation operator `â†`.
pub fn raising_op(n: usize) -> Result<ComplexMatrix> {
    Ok(lowering_op(n)?.adjoint())
}

/// `â†â = diag(0, 1, …, N−1)`.
pub fn number_op(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Validation(format!(
            "Fock truncation must be at least 2, got {n}"
        )));
    }
    Ok(ComplexMatrix::from_real_diagonal(
        &(0..n).map(|k| k as f64).collect::<Vec<_>>(),
    ))
}

/// `x̂ = √(ħ/2mω)(â + â†)`.
pub fn position_op(p: &OscillatorParams) -> ComplexMatrix {
    let a = lowering_op(p.fock_dim).expect("validated fock_dim");
    (&a + &a.adjoint()).scale_real(p.position_scale())
}

/// `p̂ = i√(ħmω/2)(â† − â)`.
pub fn momentum_op(p: &OscillatorParams) -> ComplexMatrix {
    let a = lowering_op(p.fock_dim).expect("validated fock_dim");
    (&a.adjoint() - &a).scale(C64::new(0.0, p.momentum_scale()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli(axis: Axis) -> ComplexMatrix {
    let o = real(0.0);
    let rows = match axis {
        Axis::X => [[o, real(1.0)], [real(1.0), o]],
        Axis::Y => [[o, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), o]],
        Axis::Z => [[real(1.0), o], [o, real(-1.0)]],
    };
    ComplexMatrix::from_fn(2, |i, j| rows[i][j])
}

/// `σ₊ = (σ_x + iσ_y)/2`, taking `|↓⟩` to `|↑⟩`.
pub fn sigma_plus() -> ComplexMatrix {
    (&pauli(Axis::X) + &pauli(Axis::Y).scale(C64::new(0.0, 1.0))).scale_real(0.5)
}

/// `σ₋ = (σ_x − iσ_y)/2`.
pub fn sigma_minus() -> ComplexMatrix {
    (&pauli(Axis::X) - &pauli(Axis::Y).scale(C64::new(0.0, 1.0))).scale_real(0.5)
}

/// `Ĥ = ħω(â†â + ½I)`; diagonal in the Fock basis.
pub fn build_single_oscillator_h(p: &OscillatorParams) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&(0..p.fock_dim).map(|n| p.level_energy(n)).collect::<Vec<_>>())
}

/// The five terms of the oscillator–spin–spin Hamiltonian, each on the full
/// `[N, 2, 2]` space.
#[derive(Clone, Debug)]
pub struct TripartiteTerms {
    pub oscillator: ComplexMatrix,
    pub spins: ComplexMatrix,
    pub coupling_g1: ComplexMatrix,
    pub coupling_g2: ComplexMatrix,
    pub spin_spin: ComplexMatrix,
}

impl TripartiteTerms {
    pub fn total(&self) -> ComplexMatrix {
        let mut h = &self.oscillator + &self.spins;
        h = &h + &self.coupling_g1;
        h = &h + &self.coupling_g2;
        &h + &self.spin_spin
    }
}

pub fn tripartite_terms(spec: &SystemSpec) -> Result<TripartiteTerms> {
    spec.expect_kind(SystemKind::Tripartite)?;
    let osc = spec.oscillator();
    let n = osc.fock_dim;
    let omega_s = spec.spin.expect("tripartite has spins").omega_s;
    let Couplings { g1, g2, lambda } = spec.couplings;

    let a = lowering_op(n)?;
    let ad = a.adjoint();
    let i_n = ComplexMatrix::identity(n);
    let i2 = ComplexMatrix::identity(2);
    let sz = pauli(Axis::Z);
    let sp = sigma_plus();
    let sm = sigma_minus();

    let oscillator = tensor_all(&[&build_single_oscillator_h(osc), &i2, &i2]);
    let spins = tensor_product(
        &i_n,
        &(&tensor_product(&sz, &i2) + &tensor_product(&i2, &sz)).scale_real(omega_s / 2.0),
    );
    let coupling_g1 = tensor_product(&(&tensor_product(&a, &sp) + &tensor_product(&ad, &sm)), &i2).scale_real(g1 / 2.0);
    let coupling_g2 = (&tensor_all(&[&a, &i2, &sp]) + &tensor_all(&[&ad, &i2, &sm])).scale_real(g2 / 2.0);
    let spin_spin =
        tensor_product(&i_n, &(&tensor_product(&sp, &sm) + &tensor_product(&sm, &sp))).scale_real(lambda / 2.0);

    Ok(TripartiteTerms {
        oscillator,
        spins,
        coupling_g1,
        coupling_g2,
        spin_spin,
    })
}

/// `Ĥ = ĥ_o + ĥ_s + ĥ_g1 + ĥ_g2 + ĥ_λ` on `[N, 2, 2]`.
pub fn build_tripartite_h(spec: &SystemSpec) -> Result<ComplexMatrix> {
    Ok(tripartite_terms(spec)?.total())
}

/// `Ĥ = ĥ_o1 + ĥ_o2 + (λ/2)(x̂₁⊗I − I⊗x̂₂)²` on `[N₁, N₂]`.
pub fn build_coupled_oscillators_h(spec: &SystemSpec) -> Result<ComplexMatrix> {
    spec.expect_kind(SystemKind::CoupledOscillators)?;
    let (o1, o2) = (&spec.oscillators[0], &spec.oscillators[1]);
    let shape = spec.factor_shape();
    let h1 = embed_factor(&build_single_oscillator_h(o1), &shape, 0)?;
    let h2 = embed_factor(&build_single_oscillator_h(o2), &shape, 1)?;
    let separation = &embed_factor(&position_op(o1), &shape, 0)? - &embed_factor(&position_op(o2), &shape, 1)?;
    let coupling = separation.matmul(&separation).scale_real(spec.couplings.lambda / 2.0);
    Ok(&(&h1 + &h2) + &coupling)
}

/// Hamiltonian of any system kind.
pub fn build_hamiltonian(spec: &SystemSpec) -> Result<ComplexMatrix> {
    match spec.kind {
        SystemKind::SingleOscillator => Ok(build_single_oscillator_h(spec.oscillator())),
        SystemKind::Tripartite => build_tripartite_h(spec),
        SystemKind::CoupledOscillators => build_coupled_oscillators_h(spec),
    }
}

/// `ĥ_o` of the primary oscillator lifted to the full space.
pub fn oscillator_energy_op(spec: &SystemSpec) -> Result<ComplexMatrix> {
    embed_factor(&build_single_oscillator_h(spec.oscillator()), &spec.factor_shape(), 0)
}

/// `N̂_tot = â†â⊗I⊗I + I⊗(σ_z+I)/2⊗I + I⊗I⊗(σ_z+I)/2`.
pub fn total_excitation_op(spec: &SystemSpec) -> Result<ComplexMatrix> {
    spec.expect_kind(SystemKind::Tripartite)?;
    let shape = spec.factor_shape();
    let up_count = (&pauli(Axis::Z) + &ComplexMatrix::identity(2)).scale_real(0.5);
    let osc = embed_factor(&number_op(spec.oscillator().fock_dim)?, &shape, 0)?;
    let s1 = embed_factor(&up_count, &shape, 1)?;
    let s2 = embed_factor(&up_count, &shape, 2)?;
    Ok(&(&osc + &s1) + &s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, frobenius_distance};
    use nalgebra::DVector;

    fn basis(n: usize, k: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[k] = real(1.0);
        v
    }

    fn default_osc(n: usize) -> OscillatorParams {
        OscillatorParams::from_parts(None, Some(1.0), Some(0.5), 1.0, n).unwrap()
    }

    #[test]
    fn ladder_actions() {
        let a = lowering_op(5).unwrap();
        assert_eq!(a.apply(&basis(5, 0)), DVector::zeros(5));
        assert_eq!(a.apply(&basis(5, 1)), basis(5, 0));
        let ad = raising_op(5).unwrap();
        assert_eq!(ad, a.adjoint());
        assert_eq!(ad.apply(&basis(5, 0)), basis(5, 1));
        assert_eq!(ad.apply(&basis(5, 4)), DVector::zeros(5));
        assert!(lowering_op(1).is_err());
    }

    #[test]
    fn number_operator_from_ladders() {
        let a = lowering_op(6).unwrap();
        let n = a.adjoint().matmul(&a);
        for k in 0..6 {
            assert!((n[(k, k)].re - k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn position_and_momentum_two_level() {
        let p = OscillatorParams::new(1.0, 0.5, 2).unwrap();
        let x = position_op(&p);
        let expected_x = ComplexMatrix::from_fn(2, |i, j| real(if i != j { 1.0 } else { 0.0 }));
        assert!(frobenius_distance(&x, &expected_x).unwrap() < 1e-15);
        let mom = momentum_op(&p);
        let expected_p = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -0.5),
            (1, 0) => C64::new(0.0, 0.5),
            _ => real(0.0),
        });
        assert!(frobenius_distance(&mom, &expected_p).unwrap() < 1e-15);
    }

    #[test]
    fn truncated_canonical_commutator() {
        let n = 6;
        let p = default_osc(n);
        let x = position_op(&p);
        let mom = momentum_op(&p);
        assert!(x.hermiticity_defect() == 0.0 && mom.hermiticity_defect() < 1e-15);
        assert!(x[(0, 0)].norm() == 0.0);
        let comm = x.commutator(&mom);
        for i in 0..n {
            for j in 0..n {
                let expected = if i != j {
                    real(0.0)
                } else if i < n - 1 {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, 1.0 - n as f64)
                };
                assert!((comm[(i, j)] - expected).norm() < 1e-12, "({i},{j}): {}", comm[(i, j)]);
            }
        }
    }

    #[test]
    fn pauli_and_ladder_spins() {
        let up = basis(2, 0);
        let down = basis(2, 1);
        assert_eq!(pauli(Axis::Z).apply(&up), up);
        assert_eq!(sigma_plus().apply(&down), up);
        assert_eq!(sigma_plus().apply(&up), DVector::zeros(2));
        assert_eq!(sigma_minus().apply(&up), down);
        assert_eq!(pauli(Axis::Y).adjoint(), pauli(Axis::Y));
    }

    #[test]
    fn single_oscillator_levels() {
        let h = build_single_oscillator_h(&default_osc(3));
        assert_eq!(h, ComplexMatrix::from_real_diagonal(&[0.25, 0.75, 1.25]));
        let n = number_op(3).unwrap();
        assert_eq!(h.commutator(&n), ComplexMatrix::zeros(3));
        let s = eig_hermitian(&build_single_oscillator_h(&default_osc(16))).unwrap();
        for (k, e) in s.energies().iter().enumerate() {
            assert_eq!(*e, (k as f64 + 0.5) * 0.5);
        }
    }

    #[test]
    fn fig_defaults_imply_mass_four() {
        let p = default_osc(4);
        assert!((p.mass() - 4.0).abs() < 1e-15);
        assert!((p.spring_constant() - 1.0).abs() < 1e-15);
        let err = OscillatorParams::from_parts(Some(2.0), Some(1.0), Some(0.5), 1.0, 4).unwrap_err();
        assert!(err.to_string().contains("inconsistent"));
    }

    fn trip(n: usize, g1: f64, g2: f64, lambda: f64) -> SystemSpec {
        SystemSpec::tripartite(
            default_osc(n),
            SpinParams::new(1.0).unwrap(),
            Couplings::new(g1, g2, lambda).unwrap(),
        )
    }

    #[test]
    fn decoupled_tripartite_spectrum_is_sums() {
        let n = 4;
        let h = build_tripartite_h(&trip(n, 0.0, 0.0, 0.0)).unwrap();
        let mut expected: Vec<f64> = Vec::new();
        for k in 0..n {
            for s1 in [0.5, -0.5] {
                for s2 in [0.5, -0.5] {
                    expected.push((k as f64 + 0.5) * 0.5 + s1 + s2);
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        let s = eig_hermitian(&h).unwrap();
        for (e, x) in s.energies().iter().zip(&expected) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn tripartite_conserves_excitations() {
        let spec = trip(4, 1.0, 1.0, 1.0);
        let h = build_tripartite_h(&spec).unwrap();
        assert!(h.hermiticity_defect() <= 1e-12 * h.frobenius_norm());
        let ntot = total_excitation_op(&spec).unwrap();
        assert!(h.commutator(&ntot).frobenius_norm() < 1e-12);
    }

    #[test]
    fn excitation_operator_spectrum() {
        let spec = trip(5, 1.0, 1.0, 1.0);
        let ntot = total_excitation_op(&spec).unwrap();
        let s = eig_hermitian(&ntot).unwrap();
        for e in s.energies() {
            assert!((e - e.round()).abs() < 1e-14 && *e >= 0.0 && *e <= 6.0);
        }
        // |0⟩⊗|↑↑⟩ is basis index 0 in the [N,2,2] ordering.
        assert_eq!(ntot[(0, 0)], real(2.0));
    }

    #[test]
    fn coupled_oscillators_decouple_at_zero_lambda() {
        let o1 = default_osc(4);
        let o2 = OscillatorParams::from_parts(Some(1.0), Some(1.0), None, 1.0, 3).unwrap();
        let spec = SystemSpec::coupled_oscillators(o1, o2, 0.0).unwrap();
        let s = eig_hermitian(&build_coupled_oscillators_h(&spec).unwrap()).unwrap();
        let mut expected: Vec<f64> = (0..4)
            .flat_map(|a| (0..3).map(move |b| o1.level_energy(a) + o2.level_energy(b)))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (e, x) in s.energies().iter().zip(&expected) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn coupled_oscillators_low_spectrum() {
        // Frozen from an independent dense build: m₁ = 4, m₂ = 1, k = λ = 1, N = 8.
        let o1 = default_osc(8);
        let o2 = OscillatorParams::from_parts(Some(1.0), Some(1.0), None, 1.0, 8).unwrap();
        let spec = SystemSpec::coupled_oscillators(o1, o2, 1.0).unwrap();
        let s = eig_hermitian(&build_coupled_oscillators_h(&spec).unwrap()).unwrap();
        let expected = [1.0285976763306144, 1.6190257213966934, 2.2095163703319867];
        for (e, x) in s.energies().iter().zip(expected) {
            assert!((e - x).abs() < 1e-10, "{e} vs {x}");
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let single = SystemSpec::single_oscillator(default_osc(3));
        assert!(matches!(build_tripartite_h(&single), Err(Error::WrongKind { .. })));
        assert!(matches!(
            build_coupled_oscillators_h(&single),
            Err(Error::WrongKind { .. })
        ));
        assert!(matches!(total_excitation_op(&single), Err(Error::WrongKind { .. })));
    }
}
