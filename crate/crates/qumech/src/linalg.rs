//! Dense complex linear algebra kernels.
//!
//! Everything downstream (operators, states, propagators) is carried by
//! [`ComplexMatrix`], a row-major dense matrix of `Complex64`. System
//! dimensions stay small enough (≤ ~1000) that dense O(d³) algebra is the
//! right tradeoff, and the spectral propagator needs a dense
//! eigendecomposition anyway.
//!
//! Matrix products go through `matrixmultiply::zgemm`; the Hermitian
//! eigendecomposition is backed by `nalgebra`'s `SymmetricEigen`, re-sorted
//! to ascending eigenvalue order.

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Absolute tolerance on the max off-symmetry residual accepted by
/// [`hermitian_eigen`]. Inputs within this tolerance are symmetrized as
/// (h + h†)/2 before decomposition to absorb roundoff.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("dimension overflow: {rows}x{cols} product exceeds usize")]
    DimensionOverflow { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: off-symmetry residual {residual:.3e} exceeds {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("empty matrix operand")]
    EmptyOperand,
    #[error("non-finite entry produced in {context}")]
    NonFinite { context: String },
}

/// Dense square-or-rectangular complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { " ..." } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, " ...")?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Square matrix with the given diagonal, zeros elsewhere.
    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Row-major construction; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows, "trace_product dimension mismatch");
        assert_eq!(self.rows, other.cols, "trace_product dimension mismatch");
        let mut acc = C64::ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// self += s * other, in place.
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |a_ij − conj(a_ji)| over all entries.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let r = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// (A + A†)/2.
    pub fn symmetrize(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs)
    }
}

impl std::ops::Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, s: C64) -> ComplexMatrix {
        self.scale(s)
    }
}

/// C = A · B through `zgemm`.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut c = ComplexMatrix::zeros(a.rows, b.cols);
    matmul_into(a, b, &mut c);
    c
}

/// C = A · B, writing into an existing buffer of the right shape.
pub fn matmul_into(a: &ComplexMatrix, b: &ComplexMatrix, c: &mut ComplexMatrix) {
    assert_eq!(a.cols, b.rows, "matmul dimension mismatch: {}x{} * {}x{}", a.rows, a.cols, b.rows, b.cols);
    assert_eq!((c.rows, c.cols), (a.rows, b.cols), "matmul output shape mismatch");
    // Complex64 is repr(C) { re: f64, im: f64 }, layout-compatible with [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            a.rows,
            a.cols,
            b.cols,
            [1.0, 0.0],
            a.data.as_ptr() as *const [f64; 2],
            a.cols as isize,
            1,
            b.data.as_ptr() as *const [f64; 2],
            b.cols as isize,
            1,
            [0.0, 0.0],
            c.data.as_mut_ptr() as *mut [f64; 2],
            c.cols as isize,
            1,
        );
    }
}

/// Kronecker (tensor) product; output dims are the products of the inputs'.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if a.data.is_empty() || b.data.is_empty() {
        return Err(LinalgError::EmptyOperand);
    }
    let rows = a
        .rows
        .checked_mul(b.rows)
        .ok_or(LinalgError::DimensionOverflow { rows: a.rows, cols: b.rows })?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .ok_or(LinalgError::DimensionOverflow { rows: a.cols, cols: b.cols })?;
    rows.checked_mul(cols)
        .ok_or(LinalgError::DimensionOverflow { rows, cols })?;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let f = a[(ia, ja)];
            if f == C64::ZERO {
                continue;
            }
            for ib in 0..b.rows {
                let i = ia * b.rows + ib;
                for jb in 0..b.cols {
                    out[(i, ja * b.cols + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    Ok(out)
}

/// Which factor of a bipartite product space to keep in [`partial_trace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// The first tensor factor (here: the qubit).
    First,
    /// The second tensor factor (here: the oscillator).
    Second,
}

/// Reduced matrix over one factor of a `dims.0 * dims.1` product space.
/// The trace of the output equals the trace of the input.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix, LinalgError> {
    let (da, db) = dims;
    if !rho.is_square() {
        return Err(LinalgError::NotSquare { rows: rho.rows, cols: rho.cols });
    }
    if rho.rows != da * db {
        return Err(LinalgError::DimensionMismatch {
            context: format!("partial_trace: matrix dim {} != {}*{}", rho.rows, da, db),
        });
    }
    match keep {
        Subsystem::First => {
            let mut out = ComplexMatrix::zeros(da, da);
            for a in 0..da {
                for a2 in 0..da {
                    let mut acc = C64::ZERO;
                    for b in 0..db {
                        acc += rho[(a * db + b, a2 * db + b)];
                    }
                    out[(a, a2)] = acc;
                }
            }
            Ok(out)
        }
        Subsystem::Second => {
            let mut out = ComplexMatrix::zeros(db, db);
            for b in 0..db {
                for b2 in 0..db {
                    let mut acc = C64::ZERO;
                    for a in 0..da {
                        acc += rho[(a * db + b, a * db + b2)];
                    }
                    out[(b, b2)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// a unitary matrix of eigenvectors (as columns).
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// V · diag(λ) · V†, for round-trip checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.eigenvalues.len();
        let lam = ComplexMatrix::from_diagonal(
            &self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
        );
        let vd = self.eigenvectors.dagger();
        let mut tmp = ComplexMatrix::zeros(d, d);
        matmul_into(&self.eigenvectors, &lam, &mut tmp);
        matmul(&tmp, &vd)
    }

    /// e^{−i H t} = V · diag(e^{−i λ t}) · V†.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let phases: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&lam| C64::from_polar(1.0, -lam * t))
            .collect();
        let lam = ComplexMatrix::from_diagonal(&phases);
        let tmp = matmul(&self.eigenvectors, &lam);
        matmul(&tmp, &self.eigenvectors.dagger())
    }
}

/// Decompose a Hermitian matrix. Inputs with off-symmetry residual above
/// [`HERMITICITY_TOL`] are rejected; below it they are symmetrized first.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare { rows: h.rows, cols: h.cols });
    }
    let residual = h.hermiticity_residual();
    if residual > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian { residual, tol: HERMITICITY_TOL });
    }
    let sym = h.symmetrize();
    let eig = sym.to_nalgebra().symmetric_eigen();
    let d = h.rows;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    if !eigenvalues.iter().all(|x| x.is_finite()) || !eigenvectors.is_finite() {
        return Err(LinalgError::NonFinite { context: "hermitian_eigen".into() });
    }
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// Smallest eigenvalue of a Hermitian matrix (used for positivity checks).
pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64, LinalgError> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.eigenvalues[0])
}

/// Cheap sufficient positivity test: does `h + shift·I` admit a Cholesky
/// factorization with positive real pivots? Success proves the smallest
/// eigenvalue exceeds `-shift` (up to factorization roundoff). Hand-rolled:
/// a complex-field Cholesky would happily take square roots of negative
/// pivots, so the pivot sign check must be explicit.
pub fn is_positive_within(h: &ComplexMatrix, shift: f64) -> bool {
    let d = h.rows;
    debug_assert!(h.is_square());
    let mut l = vec![C64::ZERO; d * d]; // lower triangle, row-major
    for j in 0..d {
        let mut pivot = h[(j, j)].re + shift;
        for k in 0..j {
            pivot -= l[j * d + k].norm_sqr();
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return false;
        }
        let diag = pivot.sqrt();
        l[j * d + j] = C64::new(diag, 0.0);
        for i in (j + 1)..d {
            let mut acc = h[(i, j)];
            for k in 0..j {
                acc -= l[i * d + k] * l[j * d + k].conj();
            }
            l[i * d + j] = acc / diag;
        }
    }
    true
}
