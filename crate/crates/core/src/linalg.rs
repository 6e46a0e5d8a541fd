//! Dense complex linear algebra for operators and density matrices.
//!
//! Everything here works on square [`ComplexMatrix`] values. Composite
//! Hilbert spaces are described by a [`FactorShape`]; the Kronecker layout
//! puts the first factor on the slowest index, so `[N, 2, 2]` means
//! oscillator, spin 1, spin 2.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance on `‖a − a†‖_F / ‖a‖_F` accepted by [`eig_hermitian`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// Dense complex square matrix, stored column-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Self {
        let mut m = Self::zeros(diagonal.len());
        for (i, &d) in diagonal.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("rows must form a non-empty square matrix".into()));
        }
        Self::try_from_dmatrix(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    /// Wraps an nalgebra matrix after checking squareness and finiteness.
    pub fn try_from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &DVector<C64>, v: &DVector<C64>) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::Dimension(format!(
                "outer product of lengths {} and {}",
                u.len(),
                v.len()
            )));
        }
        Ok(Self(u * v.adjoint()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `‖a − a†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += (self.0[(i, j)] - self.0[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Matrix product. Panics on dimension mismatch, like the operator form.
    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.dim();
        assert_eq!(n, rhs.dim(), "matmul dimension mismatch");
        let mut out = DMatrix::<C64>::zeros(n, n);
        gemm_into(&self.0, &rhs.0, &mut out);
        Self(out)
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    /// `Tr(self · rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> C64 {
        let n = self.dim();
        assert_eq!(n, rhs.dim(), "trace_product dimension mismatch");
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += self.0[(i, j)] * rhs.0[(j, i)];
            }
        }
        acc
    }

    /// `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, rhs: &Self) -> Self {
        Self(self.0.component_mul(&rhs.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.0.iter()
    }
}

/// `out = a · b` through matrixmultiply's complex kernel.
fn gemm_into(a: &DMatrix<C64>, b: &DMatrix<C64>, out: &mut DMatrix<C64>) {
    let n = a.nrows();
    debug_assert!(a.ncols() == n && b.nrows() == n && b.ncols() == n);
    debug_assert!(out.nrows() == n && out.ncols() == n);
    let col = n as isize;
    // SAFETY: Complex64 is #[repr(C)] { re, im }, layout-compatible with
    // [f64; 2]. All three buffers are contiguous column-major n×n
    // (row stride 1, column stride n), and `out` is uniquely borrowed.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            n,
            n,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            col,
            b.as_ptr() as *const [f64; 2],
            1,
            col,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            col,
        );
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Ordered factor dimensions of a composite Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactorShape(Vec<usize>);

impl FactorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!(
                "factor shape needs at least one positive dimension, got {dims:?}"
            )));
        }
        Ok(Self(dims))
    }

    /// Single-factor shape of the given dimension.
    pub fn flat(dim: usize) -> Self {
        assert!(dim >= 1);
        Self(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn factors(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// Linear-index stride of each factor (last factor fastest).
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for f in (0..self.0.len().saturating_sub(1)).rev() {
            strides[f] = strides[f + 1] * self.0[f + 1];
        }
        strides
    }

    fn check_matches(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::Dimension(format!(
                "factor shape {:?} has product {} but matrix dimension is {dim}",
                self.0,
                self.total()
            )));
        }
        Ok(())
    }
}

/// Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    energies: Vec<f64>,
    vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Column `k` is the eigenvector for `energies()[k]`.
    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `V† · a · V`: the matrix expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint().matmul(&a.matmul(&self.vectors))
    }

    /// `V · a · V†`: back from the eigenbasis.
    pub fn from_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.matmul(&a.matmul(&self.vectors.adjoint()))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.from_eigenbasis(&ComplexMatrix::from_real_diagonal(&self.energies))
    }
}

/// Kronecker product; `a`'s indices are the slow ones.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Kronecker product of a sequence of matrices, left to right.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let (first, rest) = factors.split_first().expect("at least one factor");
    rest.iter().fold((*first).clone(), |acc, m| tensor_product(&acc, m))
}

/// Kronecker product of state vectors with the same ordering convention.
pub fn tensor_vectors(a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
    a.kronecker(b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.trace()
}

/// Places `op` on factor `factor` of `shape`, identities elsewhere.
pub fn embed_factor(op: &ComplexMatrix, shape: &FactorShape, factor: usize) -> Result<ComplexMatrix> {
    if factor >= shape.factors() {
        return Err(Error::Index {
            index: factor,
            factors: shape.factors(),
        });
    }
    if shape.dims()[factor] != op.dim() {
        return Err(Error::Dimension(format!(
            "operator of dim {} placed on factor {factor} of dim {}",
            op.dim(),
            shape.dims()[factor]
        )));
    }
    let identities: Vec<ComplexMatrix> = shape.dims().iter().map(|&d| ComplexMatrix::identity(d)).collect();
    let parts: Vec<&ComplexMatrix> = (0..shape.factors())
        .map(|f| if f == factor { op } else { &identities[f] })
        .collect();
    Ok(tensor_all(&parts))
}

/// Reduced matrix on the factors in `keep`, tracing out the rest.
///
/// `keep` is treated as a set; kept factors stay in their original order.
pub fn partial_trace(a: &ComplexMatrix, shape: &FactorShape, keep: &[usize]) -> Result<ComplexMatrix> {
    shape.check_matches(a.dim())?;
    if keep.is_empty() {
        return Err(Error::Validation("partial trace must keep at least one factor".into()));
    }
    let nf = shape.factors();
    let mut kept = vec![false; nf];
    for &k in keep {
        if k >= nf {
            return Err(Error::Index { index: k, factors: nf });
        }
        kept[k] = true;
    }

    let strides = shape.strides();
    let dims = shape.dims();
    // Offsets into the full linear index contributed by every multi-index
    // over the kept (resp. traced) factors.
    let offsets = |selected: bool| -> Vec<usize> {
        let mut offs = vec![0usize];
        for f in 0..nf {
            if kept[f] != selected {
                continue;
            }
            let (dim, stride) = (dims[f], strides[f]);
            offs = offs
                .iter()
                .flat_map(|&o| (0..dim).map(move |d| o + d * stride))
                .collect();
        }
        offs
    };
    let keep_offsets = offsets(true);
    let traced_offsets = offsets(false);

    let m = &a.0;
    Ok(ComplexMatrix::from_fn(keep_offsets.len(), |i, j| {
        let (oi, oj) = (keep_offsets[i], keep_offsets[j]);
        traced_offsets.iter().map(|&r| m[(oi + r, oj + r)]).sum()
    }))
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<Spectrum> {
    let norm = a.frobenius_norm();
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOLERANCE * norm {
        return Err(Error::NotHermitian {
            defect: if norm > 0.0 { defect / norm } else { defect },
            tolerance: HERMITIAN_TOLERANCE,
        });
    }
    let n = a.dim();
    let eig =
        a.0.clone()
            .try_symmetric_eigen(f64::EPSILON, 1000 * n)
            .ok_or_else(|| Error::Numerical(format!("Hermitian eigensolver did not converge (dim {n})")))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum {
        energies,
        vectors: ComplexMatrix(vectors),
    })
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "cannot compare {}x{} with {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    Ok((&a.0 - &b.0).norm())
}
