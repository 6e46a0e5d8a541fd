//! State vectors, density matrices and scalar state measures.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, tensor_vectors, ComplexMatrix, FactorShape, C64};
use crate::model::OscillatorParams;

const NORM_TOLERANCE: f64 = 1e-12;
const DENSITY_TOLERANCE: f64 = 1e-10;
const POSITIVITY_FLOOR: f64 = -1e-8;

/// Normalized amplitude vector `Σ cₙ|n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Validation("state vector is empty".into()));
        }
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!(
                "state vector is not normalized (Σ|c|² = {norm_sqr})"
            )));
        }
        Ok(Self(amplitudes))
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Validation("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes / C64::new(norm, 0.0))
    }

    pub fn from_amplitudes(amplitudes: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Index { index, factors: dim });
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    /// `|cₙ|²` for every level.
    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `ψ ⊗ φ` in the slow-left ordering.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector(tensor_vectors(&self.0, &other.0))
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix with its factor layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    shape: FactorShape,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, shape: FactorShape) -> Result<Self> {
        if shape.total() != matrix.dim() {
            return Err(Error::Dimension(format!(
                "shape {:?} does not match matrix dimension {}",
                shape.dims(),
                matrix.dim()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > DENSITY_TOLERANCE {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (‖ρ − ρ†‖ = {defect:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOLERANCE {
            return Err(Error::Validation(format!("density matrix trace is {tr}, expected 1")));
        }
        let min_eig = eig_hermitian(&matrix)?.energies()[0];
        if min_eig < POSITIVITY_FLOOR {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix, shape })
    }

    /// Wraps a matrix produced by a trace- and Hermiticity-preserving map of
    /// a valid density matrix. Callers are responsible for the invariants.
    pub(crate) fn from_evolved(matrix: ComplexMatrix, shape: FactorShape) -> Self {
        debug_assert_eq!(matrix.dim(), shape.total());
        Self { matrix, shape }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn shape(&self) -> &FactorShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `Tr(Ô ρ̂)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator dim {} vs state dim {}",
                op.dim(),
                self.dim()
            )));
        }
        Ok(op.trace_product(&self.matrix))
    }

    /// Reduced state on the kept factors.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let reduced = partial_trace(&self.matrix, &self.shape, keep)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let dims = kept.iter().map(|&k| self.shape.dims()[k]).collect();
        Ok(Self {
            matrix: reduced,
            shape: FactorShape::new(dims)?,
        })
    }
}

/// `ρ̂ = |ψ⟩⟨ψ|`.
pub fn pure_density(v: &StateVector, shape: &FactorShape) -> Result<DensityMatrix> {
    if shape.total() != v.dim() {
        return Err(Error::Dimension(format!(
            "shape {:?} does not match state dimension {}",
            shape.dims(),
            v.dim()
        )));
    }
    let matrix = ComplexMatrix::outer(&v.0, &v.0)?;
    Ok(DensityMatrix {
        matrix,
        shape: shape.clone(),
    })
}

/// Bloch angles of the two-level oscillator state together with the
/// initial phase-space point they encode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentInit {
    pub theta: f64,
    pub phi: f64,
    pub x0: f64,
    pub p0: f64,
}

impl CoherentInit {
    /// Inverts `x₀ = √(ħ/2mω)·sinθ·cosφ`, `p₀ = −√(ħmω/2)·sinφ·sinθ`.
    pub fn from_phase_space(x0: f64, p0: f64, p: &OscillatorParams) -> Result<Self> {
        if !(x0.is_finite() && p0.is_finite()) {
            return Err(Error::Domain(format!("non-finite initial point ({x0}, {p0})")));
        }
        let u = x0 / p.position_scale();
        let w = -p0 / p.momentum_scale();
        let r = u.hypot(w);
        if r > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "(x0, p0) = ({x0}, {p0}) needs sinθ = {r:.6} > 1; not representable on levels {{0, 1}}"
            )));
        }
        let theta = r.min(1.0).asin();
        let phi = if r == 0.0 {
            0.0
        } else {
            w.atan2(u).rem_euclid(std::f64::consts::TAU)
        };
        Ok(Self { theta, phi, x0, p0 })
    }

    /// Amplitudes `(cos(θ/2), sin(θ/2)e^{−iφ})` on `|0⟩, |1⟩`.
    ///
    /// The phase sign makes `⟨p̂⟩ = p₀` hold with `p̂ = i√(ħmω/2)(â† − â)`.
    pub fn amplitudes(&self) -> (C64, C64) {
        let half = self.theta / 2.0;
        (C64::new(half.cos(), 0.0), C64::from_polar(half.sin(), -self.phi))
    }
}

/// Two-level oscillator state with `⟨x̂⟩ = x₀`, `⟨p̂⟩ = p₀` at `t = 0`.
pub fn coherent_two_level(x0: f64, p0: f64, p: &OscillatorParams) -> Result<StateVector> {
    let init = CoherentInit::from_phase_space(x0, p0, p)?;
    let (c0, c1) = init.amplitudes();
    let mut v = DVector::zeros(p.fock_dim());
    v[0] = c0;
    v[1] = c1;
    StateVector::new(v)
}

/// Haar-random pure state: complex standard normals, normalized.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::Validation("random state dimension must be at least 1".into()));
    }
    let v = DVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    StateVector::normalized(v)
}

/// `osc ⊗ |↑⟩ ⊗ |↑⟩`.
pub fn with_spins_up(osc: &StateVector) -> StateVector {
    let up = StateVector::basis(2, 0).expect("index 0 < 2");
    osc.tensor(&up).tensor(&up)
}

/// `Tr(ρ̂²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // ρ is Hermitian, so Tr(ρ²) = Σ|ρᵢⱼ|².
    rho.matrix.iter().map(|z| z.norm_sqr()).sum()
}

/// `S = 1 − Tr(ρ̂²)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// `−Tr(ρ̂ ln ρ̂)`, for comparison plots only.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spectrum = eig_hermitian(rho.matrix())?;
    Ok(spectrum
        .energies()
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.ln())
        .sum())
}

/// `D = √Σᵢ(|cᵢ| − 1/√N)²`, distance from the equal-weight superposition.
pub fn distance_to_uniform(v: &StateVector) -> f64 {
    let target = 1.0 / (v.dim() as f64).sqrt();
    v.0.iter().map(|c| (c.norm() - target).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_distance;
    use crate::model::position_op;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ground_state_density() {
        let v = StateVector::basis(4, 0).unwrap();
        let rho = pure_density(&v, &FactorShape::flat(4)).unwrap();
        assert_eq!(*rho.matrix(), ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(purity(&rho), 1.0);
    }

    #[test]
    fn equal_superposition_density() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = StateVector::from_amplitudes(&[c(s), c(s)]).unwrap();
        let rho = pure_density(&v, &FactorShape::flat(2)).unwrap();
        for z in rho.matrix().iter() {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        assert!(StateVector::from_amplitudes(&[c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn coherent_state_for_default_oscillator() {
        let p = OscillatorParams::default();
        let v = coherent_two_level(1.0 / 3.0, 0.0, &p).unwrap();
        let theta = (2.0f64 / 3.0).asin();
        assert!((v.amplitudes()[0] - c((theta / 2.0).cos())).norm() < 1e-15);
        assert!((v.amplitudes()[1] - c((theta / 2.0).sin())).norm() < 1e-15);
        let rho = pure_density(&v, &FactorShape::flat(p.fock_dim())).unwrap();
        let x = rho.expectation(&position_op(&p)).unwrap();
        assert!((x.re - 1.0 / 3.0).abs() < 1e-12 && x.im.abs() < 1e-15);
    }

    #[test]
    fn origin_maps_to_ground_state() {
        let p = OscillatorParams::default();
        let v = coherent_two_level(0.0, 0.0, &p).unwrap();
        assert_eq!(v, StateVector::basis(16, 0).unwrap());
    }

    #[test]
    fn coherent_init_matches_bloch_map() {
        let p = OscillatorParams::default();
        let init = CoherentInit::from_phase_space(0.2, -0.3, &p).unwrap();
        let (m, w) = (p.mass(), p.omega());
        let x0 = init.theta.sin() * init.phi.cos() / (2.0 * m * w).sqrt();
        let p0 = -(m * w / 2.0).sqrt() * init.phi.sin() * init.theta.sin();
        assert!((x0 - 0.2).abs() < 1e-12 && (p0 + 0.3).abs() < 1e-12);
        assert!(init.theta >= 0.0 && init.theta <= std::f64::consts::PI);
        assert!(init.phi >= 0.0 && init.phi < std::f64::consts::TAU);
    }

    #[test]
    fn unrepresentable_point_is_domain_error() {
        let p = OscillatorParams::default();
        assert!(matches!(coherent_two_level(0.6, 0.0, &p), Err(Error::Domain(_))));
        assert!(coherent_two_level(0.5, 0.0, &p).is_ok());
    }

    #[test]
    fn random_state_is_normalized_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        let va = random_pure_state(5, &mut a).unwrap();
        let vb = random_pure_state(5, &mut b).unwrap();
        assert_eq!(va, vb);
        assert!((va.amplitudes().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_state_population_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| random_pure_state(2, &mut rng).unwrap().populations()[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn spins_up_product() {
        let osc = StateVector::basis(3, 0).unwrap();
        let full = with_spins_up(&osc);
        assert_eq!(full, StateVector::basis(12, 0).unwrap());

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let osc = StateVector::from_amplitudes(&[c(s), C64::new(0.0, s), c(0.0)]).unwrap();
        let full = with_spins_up(&osc);
        assert!((full.amplitudes().norm() - 1.0).abs() < 1e-15);
        let rho = pure_density(&full, &FactorShape::new(vec![3, 2, 2]).unwrap()).unwrap();
        let reduced = rho.reduce(&[0]).unwrap();
        let direct = pure_density(&osc, &FactorShape::flat(3)).unwrap();
        assert!(frobenius_distance(reduced.matrix(), direct.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn purity_and_entropy_values() {
        let mixed = DensityMatrix::new(ComplexMatrix::identity(4).scale_real(0.25), FactorShape::flat(4)).unwrap();
        assert!((purity(&mixed) - 0.25).abs() < 1e-15);
        let half = DensityMatrix::new(ComplexMatrix::identity(2).scale_real(0.5), FactorShape::flat(2)).unwrap();
        assert!((linear_entropy(&half) - 0.5).abs() < 1e-15);
        assert!((von_neumann_entropy(&half).unwrap() - 2f64.ln()).abs() < 1e-14);

        // Decohered two-level state keeps only |c₀|², |c₁|².
        let (p0, p1) = (0.3, 0.7);
        let dec = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[p0, p1]), FactorShape::flat(2)).unwrap();
        assert!((purity(&dec) - (p0 * p0 + p1 * p1)).abs() < 1e-15);

        let n = 7;
        let uniform = DensityMatrix::new(
            ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            FactorShape::flat(n),
        )
        .unwrap();
        assert!((linear_entropy(&uniform) - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(bad_trace, FactorShape::flat(2)).is_err());
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative, FactorShape::flat(2)).is_err());
    }

    #[test]
    fn distance_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let eq = StateVector::from_amplitudes(&[c(s), c(s)]).unwrap();
        assert!(distance_to_uniform(&eq) < 1e-15);
        let ground = StateVector::basis(2, 0).unwrap();
        // (1 − 1/√2)² + (1/√2)² = 2 − √2
        assert!((distance_to_uniform(&ground) - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-15);
        assert!((distance_to_uniform(&ground) - 0.765_366_864_730_18).abs() < 1e-12);
    }
}
