//! Minimal dense complex linear algebra.
//!
//! [`CMatrix`] is a row-major matrix of [`C64`] entries. Products, Kronecker
//! products and adjoints are implemented directly; the Hermitian eigensolver
//! and the Schur factorization behind [`logm_unitary`] are delegated to
//! `nalgebra`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerance used to validate Hermitian/unitary inputs to the decompositions.
pub const VALIDATION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |h - h^dag| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (max |u^dag u - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

pub type LinalgResult<T> = Result<T, LinalgError>;

/// Dense complex matrix stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Build from row-major entries. Fails if the entry count does not match
    /// or any entry is non-finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> LinalgResult<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                actual: format!("{} entries", data.len()),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite { row: pos / cols.max(1), col: pos % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> LinalgResult<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// Diagonal unitary `diag(exp(i * phase))`.
    pub fn phase_diag(phases: &[f64]) -> Self {
        Self::diag(&phases.iter().map(|&p| C64::from_polar(1.0, p)).collect::<Vec<_>>())
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

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * k).collect() }
    }

    pub fn matmul(&self, rhs: &CMatrix) -> LinalgResult<CMatrix> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("{} rows on the right", self.cols),
                actual: format!("{} rows", rhs.rows),
            });
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[C64]) -> LinalgResult<Vec<C64>> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: format!("vector of length {}", self.cols),
                actual: format!("length {}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dag`.
    pub fn hermitian_defect(&self) -> LinalgResult<f64> {
        self.require_square()?;
        Ok(self.max_abs_diff(&self.dagger()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect().map(|d| d <= tol).unwrap_or(false)
    }

    /// Largest entrywise modulus of `self^dag self - I`.
    pub fn unitarity_defect(&self) -> LinalgResult<f64> {
        self.require_square()?;
        let prod = self.dagger().matmul(self)?;
        Ok(prod.max_abs_diff(&CMatrix::identity(self.rows)))
    }

    /// Equality up to a global phase, measured after aligning the phase of
    /// the largest entry.
    pub fn phase_aligned_diff(&self, other: &CMatrix) -> f64 {
        let (idx, _) = self
            .data
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let a = self.data[idx];
        let b = other.data[idx];
        if b.norm() < 1e-300 {
            return self.max_abs_diff(other);
        }
        let phase = (a / b) / (a / b).norm();
        self.max_abs_diff(&other.scale(phase))
    }

    pub(crate) fn require_square(&self) -> LinalgResult<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    /// Panics on shape mismatch; use [`CMatrix::matmul`] for a fallible product.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Complex vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    data: Vec<C64>,
}

impl CVector {
    pub fn new(data: Vec<C64>) -> LinalgResult<Self> {
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite { row: pos, col: 0 });
        }
        Ok(Self { data })
    }

    pub fn from_real(data: &[f64]) -> LinalgResult<Self> {
        Self::new(data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut data = vec![ZERO; dim];
        data[index] = ONE;
        Self { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Kronecker product; the result has shape `(a.rows * b.rows, a.cols * b.cols)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = CMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// `m ⊗ m ⊗ ... ⊗ m` (`power` factors). `power = 0` gives the 1x1 identity.
pub fn kron_power(m: &CMatrix, power: usize) -> CMatrix {
    (0..power).fold(CMatrix::identity(1), |acc, _| kron(&acc, m))
}

pub fn is_unitary(a: &CMatrix, tol: f64) -> LinalgResult<bool> {
    Ok(a.unitarity_defect()? <= tol)
}

/// Eigendecomposition of a Hermitian matrix. Eigenvalues are returned in
/// ascending order with the matching eigenvectors as columns.
pub fn herm_eig(h: &CMatrix) -> LinalgResult<(Vec<f64>, CMatrix)> {
    let defect = h.hermitian_defect()?;
    if defect > VALIDATION_TOL {
        return Err(LinalgError::NotHermitian { defect });
    }
    let n = h.rows;
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    // symmetrize so that the solver only ever sees an exactly Hermitian input
    let sym = (&h.to_nalgebra() + h.to_nalgebra().adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let evals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let evecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((evals, evecs))
}

/// `exp(-i h)` for Hermitian `h`, computed through its eigendecomposition.
pub fn expm_hermitian(h: &CMatrix) -> LinalgResult<CMatrix> {
    let (evals, evecs) = herm_eig(h)?;
    let phases: Vec<f64> = evals.iter().map(|&e| -e).collect();
    Ok(&(&evecs * &CMatrix::phase_diag(&phases)) * &evecs.dagger())
}

/// Map a phase onto the principal interval `(-pi, pi]`.
pub fn principal_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    // values within rounding of -pi belong to +pi
    if t <= -PI + 1e-12 {
        t += 2.0 * PI;
    }
    t
}

/// Hermitian `R` with `u = exp(-i R)` and eigenvalues in `(-pi, pi]`.
pub fn logm_unitary(u: &CMatrix) -> LinalgResult<CMatrix> {
    let defect = u.unitarity_defect()?;
    if defect > VALIDATION_TOL {
        return Err(LinalgError::NotUnitary { defect });
    }
    let n = u.rows;
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    // A unitary is normal, so its complex Schur form is diagonal.
    let (q, t) = u.to_nalgebra().schur().unpack();
    let q = CMatrix::from_nalgebra(&q);
    let thetas: Vec<f64> = (0..n).map(|i| principal_angle(-t[(i, i)].arg())).collect();
    let r = &(&q * &CMatrix::real_diag(&thetas)) * &q.dagger();
    // drop the anti-Hermitian rounding residue
    let r_dag = r.dagger();
    Ok((&r + &r_dag).scale(C64::new(0.5, 0.0)))
}
