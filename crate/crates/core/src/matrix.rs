//! Dense complex-matrix substrate: Hermitian certification, spectral
//! decomposition, operator norms, anticommutators, and Kronecker products.
//!
//! Matrices are square, stored row-major in a flat `Vec<Complex64>`, and
//! immutable in practice: every operation returns a fresh value. Dimensions
//! stay at desk scale (a few hundred at most), so everything is dense.
//! Eigendecomposition is delegated to `nalgebra`'s Hermitian solver behind
//! [`HermitianOperator::eig`]; the rest is implemented directly.

use num_complex::Complex64;

use crate::error::Error;

/// Row-major dense complex square matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                write!(f, " {:+.4}{:+.4}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// 1x1 matrix holding a single value; the base case of tensor recursions.
    pub fn scalar(value: Complex64) -> Self {
        ComplexMatrix {
            dim: 1,
            entries: vec![value],
        }
    }

    /// Build from a row-major flat entry list. Rejects non-square lengths,
    /// zero dimension, and non-finite entries.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self, Error> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::NotSquare {
                expected: dim,
                got: entries.len(),
            });
        }
        if !entries.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_fn(2, |i, j| {
            Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn pauli_y() -> Self {
        Self::from_fn(2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, -1.0),
            (1, 0) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(0.0, 0.0),
        })
    }

    pub fn pauli_z() -> Self {
        Self::from_fn(2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(1.0, 0.0),
            (1, 1) => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 0.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    fn check_dim(&self, other: &Self) -> Result<(), Error> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check_dim(other)?;
        Ok(ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.check_dim(other)?;
        Ok(ComplexMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, Error> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Tr[self * other] without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64, Error> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        Ok(acc)
    }

    /// Kronecker product; dimension `dim(self) * dim(other)`.
    pub fn tensor(&self, other: &Self) -> Self {
        let da = self.dim;
        let db = other.dim;
        let d = da * db;
        let mut out = Self::zeros(d);
        for ia in 0..da {
            for ja in 0..da {
                let a = self.get(ia, ja);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        out.set(ia * db + ib, ja * db + jb, a * other.get(ib, jb));
                    }
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, Error> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Max entry of |M - M^dagger|.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    /// Max entry of |U^dagger U - 1|.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.adjoint().mul(self).expect("same dimension");
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                r = r.max((gram.get(i, j) - Complex64::new(expect, 0.0)).norm());
            }
        }
        r
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// A complex square matrix certified Hermitian at construction time.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    hermiticity_residual: f64,
}

/// Eigendecomposition of a Hermitian operator: real eigenvalues ascending,
/// eigenvectors as the columns of a unitary matrix, `A V = V diag(values)`.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianOperator {
    /// Certify `matrix` as Hermitian within `tol` and record the residual.
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self, Error> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let residual = matrix.hermiticity_residual();
        if residual > tol {
            return Err(Error::ResidualExceeded { residual, tol });
        }
        Ok(HermitianOperator {
            matrix,
            hermiticity_residual: residual,
        })
    }

    /// Wrap a matrix known Hermitian by construction; the residual is still
    /// measured and recorded, but nothing is rejected.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        let hermiticity_residual = matrix.hermiticity_residual();
        HermitianOperator {
            matrix,
            hermiticity_residual,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.hermiticity_residual
    }

    /// `AB + BA`. Hermitian whenever both inputs are.
    pub fn anticommutator(&self, other: &Self) -> Result<HermitianOperator, Error> {
        let ab = self.matrix.mul(&other.matrix)?;
        let ba = other.matrix.mul(&self.matrix)?;
        Ok(HermitianOperator::new_unchecked(ab.add(&ba)?))
    }

    /// Spectral radius: the largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64, Error> {
        let eig = self.eig()?;
        Ok(eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }

    /// Hermitian eigendecomposition with eigenvalues sorted ascending.
    /// Ordering and phase inside degenerate eigenspaces are arbitrary.
    pub fn eig(&self) -> Result<Eigensystem, Error> {
        let d = self.dim();
        if d == 1 {
            return Ok(Eigensystem {
                values: vec![self.matrix.get(0, 0).re],
                vectors: ComplexMatrix::identity(1),
            });
        }
        let m = faer::Mat::<Complex64>::from_fn(d, d, |i, j| self.matrix.get(i, j));
        let eig = m
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|_| Error::EigenFailure { dim: d })?;
        let u = eig.U();
        let s = eig.S();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            s[a].re
                .partial_cmp(&s[b].re)
                .expect("hermitian eigenvalues are finite")
        });
        let values: Vec<f64> = order.iter().map(|&k| s[k].re).collect();
        let vectors = ComplexMatrix::from_fn(d, |i, j| u[(i, order[j])]);
        Ok(Eigensystem { values, vectors })
    }
}

/// Traceless Hermitian operator squaring to the identity (eigenvalues +/-1).
#[derive(Clone, Debug)]
pub struct DichotomicObservable {
    op: HermitianOperator,
    squared_identity_residual: f64,
    trace_magnitude: f64,
}

impl DichotomicObservable {
    pub fn new(op: HermitianOperator, tol: f64) -> Result<Self, Error> {
        let square = op.matrix().mul(op.matrix())?;
        let squared_identity_residual = square.max_abs_diff(&ComplexMatrix::identity(op.dim()))?;
        if squared_identity_residual > tol {
            return Err(Error::NonDichotomic {
                detail: format!(
                    "B^2 deviates from the identity by {squared_identity_residual:.3e} (tol {tol:.3e})"
                ),
            });
        }
        let trace_magnitude = op.matrix().trace().norm();
        if trace_magnitude > tol * op.dim() as f64 {
            return Err(Error::NonDichotomic {
                detail: format!(
                    "trace magnitude {trace_magnitude:.3e} exceeds tolerance (traceless required)"
                ),
            });
        }
        Ok(DichotomicObservable {
            op,
            squared_identity_residual,
            trace_magnitude,
        })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn squared_identity_residual(&self) -> f64 {
        self.squared_identity_residual
    }

    pub fn trace_magnitude(&self) -> f64 {
        self.trace_magnitude
    }
}

/// Deterministic pairwise summation; the fixed reduction scheme for every
/// score accumulation in the crate.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (left, right) = values.split_at(n / 2);
            pairwise_sum(left) + pairwise_sum(right)
        }
    }
}
