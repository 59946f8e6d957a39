//! Dense complex linear algebra sized for small systems (N ≤ 64).
//!
//! Everything here is a pure function over immutable [`ComplexMatrix`]
//! values. Hermitian eigenproblems use cyclic Jacobi rotations; singular
//! values come from the eigenvalues of `K†K`; inversion is Gauss-Jordan
//! with partial pivoting behind a condition-number guard.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Relative off-diagonal mass at which the Jacobi sweep stops.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Singular values below this fraction of the largest are reported as 0.
const SV_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular (condition number {cond:.3e})")]
    SingularMatrix { cond: f64 },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("vectors are linearly dependent at column {column}")]
    RankDeficient { column: usize },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Numerical tolerances shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceContext {
    /// Equality tolerance for matrix identities (Frobenius norm).
    pub eq_tol: f64,
    /// Allowed negative eigenvalue before an operator counts as indefinite.
    pub psd_tol: f64,
    /// Largest accepted condition number.
    pub cond_max: f64,
}

impl Default for ToleranceContext {
    fn default() -> Self {
        ToleranceContext {
            eq_tol: 1e-10,
            psd_tol: 1e-9,
            cond_max: 1e12,
        }
    }
}

impl ToleranceContext {
    pub fn new(eq_tol: f64, psd_tol: f64, cond_max: f64) -> Result<Self> {
        for (name, v) in [("eq_tol", eq_tol), ("psd_tol", psd_tol), ("cond_max", cond_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(LinalgError::InvalidTolerance(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(ToleranceContext {
            eq_tol,
            psd_tol,
            cond_max,
        })
    }

    pub fn with_eq_tol(self, eq_tol: f64) -> Result<Self> {
        Self::new(eq_tol, self.psd_tol, self.cond_max)
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, rejecting bad shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Real-valued rows; convenient for fixtures.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Stacks the given vectors as columns.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|col| col.len() != r) {
            return Err(LinalgError::DimensionMismatch("columns differ in length".into()));
        }
        let mut data = vec![C64::default(); r * c];
        for (j, col) in columns.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                data[i * c + j] = z;
            }
        }
        Self::new(r, c, data)
    }

    pub(crate) fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::default() })
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { C64::default() })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let values: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&values)
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
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

    /// Row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Copies out the block with the given top-left corner and shape.
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Result<Self> {
        if row0 + rows > self.rows || col0 + cols > self.cols || rows == 0 || cols == 0 {
            return Err(LinalgError::DimensionMismatch(format!(
                "block {rows}x{cols} at ({row0}, {col0}) outside {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_fn(rows, cols, |i, j| self[(row0 + i, col0 + j)]))
    }

    /// Writes `src` into `self` with its top-left corner at `(row0, col0)`.
    pub(crate) fn set_block(&mut self, row0: usize, col0: usize, src: &ComplexMatrix) {
        for i in 0..src.rows {
            for j in 0..src.cols {
                self[(row0 + i, col0 + j)] = src[(i, j)];
            }
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![C64::default(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out[i * other.cols..(i + 1) * other.cols].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`; infinite when the shapes differ.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self − self†‖_F`; infinite for non-square input.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `‖A†A − I‖_F`; infinite for non-square input.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).distance(&Self::identity(self.rows))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] for checked products.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix sum shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix difference shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `⟨u|v⟩`, conjugate-linear in the first argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `tr(A·B)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    assert_eq!((a.rows, a.cols), (b.cols, b.rows), "trace of product shape mismatch");
    let mut acc = C64::default();
    for i in 0..a.rows {
        for k in 0..a.cols {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `⟨v|A|v⟩`
pub fn expectation(a: &ComplexMatrix, v: &[C64]) -> C64 {
    let av = a.mul_vec(v).expect("expectation shape mismatch");
    inner(v, &av)
}

/// Multiplies `v` by the unit phase that makes its first entry above
/// `threshold` in modulus real and positive.
pub fn fix_phase(v: &mut [C64], threshold: f64) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > threshold) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Eigendecomposition `H = V·diag(λ)·V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V·diag(f(λ))·V†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("eigendecomposition of an empty matrix")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn require_square(h: &ComplexMatrix, what: &str) -> Result<()> {
    if h.is_square() {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch(format!(
            "{what} needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )))
    }
}

fn require_hermitian(h: &ComplexMatrix, ctx: &ToleranceContext) -> Result<()> {
    require_square(h, "Hermitian eigendecomposition")?;
    let residual = h.hermiticity_residual();
    if residual > ctx.eq_tol * h.frobenius_norm().max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(LinalgError::NotHermitian { residual });
    }
    Ok(())
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `h[p][q]` and then
/// applies the real symmetric Jacobi rotation that annihilates it.
pub fn hermitian_eigen(h: &ComplexMatrix, ctx: &ToleranceContext) -> Result<HermitianEigen> {
    require_hermitian(h, ctx)?;
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += a[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    };

    let mut sweeps = 0;
    while scale > 0.0 && off_norm(&a) > JACOBI_TOL * scale {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]] acting on (p, q).
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = C64::default();
                a[(q, p)] = C64::default();
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Singular values of a matrix, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValues {
    pub values: Vec<f64>,
}

impl SingularValues {
    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().expect("no singular values")
    }

    /// Number of values above `rel_tol` times the largest.
    pub fn numeric_rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.largest();
        self.values.iter().filter(|&&s| s > cut).count()
    }
}

/// Singular values from the spectrum of `K†K`.
pub fn singular_values(k: &ComplexMatrix, ctx: &ToleranceContext) -> Result<SingularValues> {
    let gram = &k.adjoint() * k;
    let eig = hermitian_eigen(&gram, ctx)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let cut = SV_CUTOFF * values[0];
    for s in values.iter_mut() {
        if *s < cut {
            *s = 0.0;
        }
    }
    Ok(SingularValues { values })
}

pub fn spectral_norm(k: &ComplexMatrix, ctx: &ToleranceContext) -> Result<f64> {
    Ok(singular_values(k, ctx)?.largest())
}

/// Gauss-Jordan elimination with partial pivoting. `None` when a pivot is
/// exactly zero.
fn gauss_jordan(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.rows();
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))?;
        let pivot = m[(pivot_row, col)];
        if pivot.norm() == 0.0 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                m.data.swap(pivot_row * n + j, col * n + j);
                inv.data.swap(pivot_row * n + j, col * n + j);
            }
        }
        let inv_pivot = C64::new(1.0, 0.0) / pivot;
        for j in 0..n {
            m[(col, j)] *= inv_pivot;
            inv[(col, j)] *= inv_pivot;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = m[(i, col)];
            if factor == C64::default() {
                continue;
            }
            for j in 0..n {
                let mc = m[(col, j)];
                let ic = inv[(col, j)];
                m[(i, j)] -= factor * mc;
                inv[(i, j)] -= factor * ic;
            }
        }
    }
    Some(inv)
}

/// Inverse of a square matrix together with its 2-norm condition number.
///
/// The condition number is `‖A‖₂·‖A⁻¹‖₂`, both taken as largest singular
/// values. The smallest singular value of `A` computed from `A†A` bottoms
/// out near `1e-8·σ_max`, so it cannot detect exact rank loss on its own.
pub fn inverse_with_cond(a: &ComplexMatrix, ctx: &ToleranceContext) -> Result<(ComplexMatrix, f64)> {
    require_square(a, "inverse")?;
    let inv = match gauss_jordan(a) {
        Some(inv) => inv,
        None => return Err(LinalgError::SingularMatrix { cond: f64::INFINITY }),
    };
    if inv.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::SingularMatrix { cond: f64::INFINITY });
    }
    let cond = spectral_norm(a, ctx)? * spectral_norm(&inv, ctx)?;
    if cond.is_nan() || cond > ctx.cond_max {
        return Err(LinalgError::SingularMatrix { cond });
    }
    Ok((inv, cond))
}

pub fn inverse(a: &ComplexMatrix, ctx: &ToleranceContext) -> Result<ComplexMatrix> {
    inverse_with_cond(a, ctx).map(|(inv, _)| inv)
}

/// `exp(−i·H·t)` from the spectral decomposition of `H`.
pub fn unitary_exp(h: &ComplexMatrix, t: f64, ctx: &ToleranceContext) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h, ctx)?;
    Ok(eig.map_spectrum(|l| C64::from_polar(1.0, -l * t)))
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[−psd_tol, 0)` are clamped to zero.
pub fn psd_sqrt(f: &ComplexMatrix, ctx: &ToleranceContext) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(f, ctx)?;
    let min = eig.min_eigenvalue();
    if min < -ctx.psd_tol {
        return Err(LinalgError::NotPositive { min_eigenvalue: min });
    }
    Ok(eig.map_spectrum(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Orthonormalizes the columns of `vectors` in order (modified Gram-Schmidt
/// with one reorthogonalization pass). Each output column is rephased so its
/// first nonzero entry is real and positive.
pub fn gram_schmidt(vectors: &ComplexMatrix, ctx: &ToleranceContext) -> Result<ComplexMatrix> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(vectors.cols());
    for (j, col) in vectors.columns().into_iter().enumerate() {
        let original = vec_norm(&col);
        let mut w = col;
        for _ in 0..2 {
            for q in &basis {
                let proj = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
        }
        let norm = vec_norm(&w);
        if original == 0.0 || norm <= ctx.eq_tol * original {
            return Err(LinalgError::RankDeficient { column: j });
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        fix_phase(&mut w, ctx.eq_tol);
        basis.push(w);
    }
    ComplexMatrix::from_columns(&basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_hermitian, random_matrix, rng};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ctx() -> ToleranceContext {
        ToleranceContext::default()
    }

    fn fig1_k(gamma: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, gamma], &[-1.0, gamma]])
            .unwrap()
            .scale_real(FRAC_1_SQRT_2)
    }

    fn fig2_h() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]),
            Err(LinalgError::DimensionMismatch(_))
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![c(0.0, 0.0), c(f64::NAN, 0.0)]),
            Err(LinalgError::NonFinite { row: 0, col: 1 })
        ));
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert!(ToleranceContext::new(0.0, 1e-9, 1e12).is_err());
    }

    #[test]
    fn matmul_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.matmul(&i2).unwrap(), i2);

        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e1 = ComplexMatrix::from_real_rows(&[&[1.0], &[0.0]]).unwrap();
        let e2 = ComplexMatrix::from_real_rows(&[&[0.0], &[1.0]]).unwrap();
        assert_eq!(x.matmul(&e1).unwrap(), e2);

        let gamma: f64 = 0.5;
        let n = (1.0 + gamma * gamma).sqrt();
        let alpha = ComplexMatrix::from_real_rows(&[&[gamma / n], &[1.0 / n]]).unwrap();
        let out = fig1_k(gamma).matmul(&alpha).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.632_455_532_033_675_9], &[0.0]]).unwrap();
        assert!(out.distance(&expected) < 1e-12);

        assert!(matches!(e1.matmul(&e1), Err(LinalgError::DimensionMismatch(_))));
    }

    #[test]
    fn adjoint_examples() {
        let s = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 3.0]]).unwrap();
        assert_eq!(s.adjoint(), s);
        let a = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let expected =
            ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, -1.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(a.adjoint(), expected);
        let r = random_matrix(&mut rng(1), 3, 4);
        assert_eq!(r.adjoint().adjoint(), r);
    }

    #[test]
    fn inverse_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert!(inverse(&i3, &ctx()).unwrap().distance(&i3) < 1e-15);

        let a = ComplexMatrix::from_real_rows(&[&[1.0, FRAC_1_SQRT_2], &[0.0, FRAC_1_SQRT_2]]).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[1.0, -1.0], &[0.0, SQRT_2]]).unwrap();
        assert!(inverse(&a, &ctx()).unwrap().distance(&expected) < 1e-12);

        let dup = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[2.0, 2.0]]).unwrap();
        assert!(matches!(inverse(&dup, &ctx()), Err(LinalgError::SingularMatrix { .. })));

        let dup3 = ComplexMatrix::from_real_rows(&[&[0.3, 0.3, 1.0], &[0.7, 0.7, -2.0], &[0.1, 0.1, 0.5]]).unwrap();
        assert!(matches!(
            inverse(&dup3, &ctx()),
            Err(LinalgError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut r = rng(2);
        for n in 1..=8 {
            let a = random_matrix(&mut r, n, n);
            let (inv, cond) = inverse_with_cond(&a, &ctx()).unwrap();
            let tol = ctx().eq_tol * cond;
            assert!((&inv * &a).distance(&ComplexMatrix::identity(n)) <= tol);
            assert!((&a * &inv).distance(&ComplexMatrix::identity(n)) <= tol);
        }
    }

    #[test]
    fn eigen_examples() {
        let d = ComplexMatrix::diag_real(&[3.0, 1.0, 2.0]);
        let e = hermitian_eigen(&d, &ctx()).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);

        let h = &fig2_h();
        let e = hermitian_eigen(h, &ctx()).unwrap();
        for (got, want) in e.eigenvalues.iter().zip([2.0, -1.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }

        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = hermitian_eigen(&x, &ctx()).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14 && (e.eigenvalues[1] + 1.0).abs() < 1e-14);
        let mut v0 = e.eigenvectors.column(0);
        let mut v1 = e.eigenvectors.column(1);
        fix_phase(&mut v0, 1e-12);
        fix_phase(&mut v1, 1e-12);
        assert!((v0[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12 && (v0[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((v1[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12 && (v1[1] + c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);

        let not_h = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eigen(&not_h, &ctx()),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        let mut r = rng(3);
        for n in 1..=8 {
            let h = random_hermitian(&mut r, n);
            let e = hermitian_eigen(&h, &ctx()).unwrap();
            let v = &e.eigenvectors;
            assert!((&v.adjoint() * v).distance(&ComplexMatrix::identity(n)) <= 1e-12);
            let rec = e.map_spectrum(|l| c(l, 0.0));
            assert!(rec.distance(&h) <= 1e-9 * h.frobenius_norm());
            let lam = ComplexMatrix::diag_real(&e.eigenvalues);
            assert!((&h * v).distance(&(v * &lam)) <= 1e-10 * h.frobenius_norm());
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn singular_value_examples() {
        let sv = singular_values(&ComplexMatrix::diag_real(&[0.5, 0.3]), &ctx()).unwrap();
        assert!((sv.values[0] - 0.5).abs() < 1e-15 && (sv.values[1] - 0.3).abs() < 1e-15);

        let sv = singular_values(&fig1_k(0.5), &ctx()).unwrap();
        assert!((sv.values[0] - 1.0).abs() < 1e-14 && (sv.values[1] - 0.5).abs() < 1e-14);

        let a = FRAC_1_SQRT_2;
        let kj = ComplexMatrix::from_real_rows(&[&[a, 0.5], &[0.0, a]]).unwrap();
        assert!((spectral_norm(&kj, &ctx()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_norm_of_isometries() {
        assert!((spectral_norm(&ComplexMatrix::identity(4), &ctx()).unwrap() - 1.0).abs() < 1e-15);
        let u = unitary_exp(&random_hermitian(&mut rng(4), 5), 0.7, &ctx()).unwrap();
        assert!((spectral_norm(&u, &ctx()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_exp_examples() {
        let z = ComplexMatrix::zeros(3, 3);
        assert!(
            unitary_exp(&z, 1.3, &ctx())
                .unwrap()
                .distance(&ComplexMatrix::identity(3))
                < 1e-15
        );

        let one = ComplexMatrix::diag_real(&[1.0]);
        let u = unitary_exp(&one, PI, &ctx()).unwrap();
        assert!((u[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);

        let zl = 1.0;
        let u = unitary_exp(&fig2_h(), zl, &ctx()).unwrap();
        let diag = C64::from_polar(1.0, zl);
        let off = (C64::from_polar(1.0, -2.0 * zl) - C64::from_polar(1.0, zl)) / 3.0;
        let expected = ComplexMatrix::from_fn(3, 3, |i, j| if i == j { diag + off } else { off });
        assert!(u.distance(&expected) < 1e-12);
    }

    #[test]
    fn psd_sqrt_examples() {
        let r = psd_sqrt(&ComplexMatrix::diag_real(&[4.0, 9.0]), &ctx()).unwrap();
        assert!(r.distance(&ComplexMatrix::diag_real(&[2.0, 3.0])) < 1e-14);

        let r = psd_sqrt(&ComplexMatrix::diag_real(&[0.0, 0.75]), &ctx()).unwrap();
        assert!(r.distance(&ComplexMatrix::diag_real(&[0.0, 0.866_025_403_784_438_6])) < 1e-14);

        let neg = ComplexMatrix::diag_real(&[1.0, -0.1]);
        assert!(matches!(psd_sqrt(&neg, &ctx()), Err(LinalgError::NotPositive { .. })));

        // slightly negative round-off is clamped
        let tiny = ComplexMatrix::diag_real(&[1.0, -1e-12]);
        assert!(psd_sqrt(&tiny, &ctx()).is_ok());
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut r = rng(5);
        for n in 1..=6 {
            let g = random_matrix(&mut r, n, n);
            let f = &g.adjoint() * &g;
            let m = psd_sqrt(&f, &ctx()).unwrap();
            assert!(m.hermiticity_residual() < 1e-12);
            assert!((&m * &m).distance(&f) <= ctx().eq_tol * f.frobenius_norm());
        }
    }

    #[test]
    fn gram_schmidt_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert!(gram_schmidt(&i3, &ctx()).unwrap().distance(&i3) < 1e-15);

        let v = ComplexMatrix::from_real_rows(&[&[1.0, FRAC_1_SQRT_2], &[0.0, FRAC_1_SQRT_2]]).unwrap();
        assert!(gram_schmidt(&v, &ctx()).unwrap().distance(&ComplexMatrix::identity(2)) < 1e-14);

        let dup = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            gram_schmidt(&dup, &ctx()),
            Err(LinalgError::RankDeficient { column: 1 })
        ));
    }

    #[test]
    fn gram_schmidt_preserves_nested_spans() {
        let mut r = rng(6);
        let a = random_matrix(&mut r, 5, 4);
        let q = gram_schmidt(&a, &ctx()).unwrap();
        assert!((&q.adjoint() * &q).distance(&ComplexMatrix::identity(4)) < 1e-13);
        // Q†A is upper triangular exactly when span(q_1..q_k) = span(a_1..a_k).
        let r_factor = &q.adjoint() * &a;
        for i in 0..4 {
            for j in 0..i {
                assert!(r_factor[(i, j)].norm() < 1e-12);
            }
            assert!(r_factor[(i, i)].norm() > 1e-6);
            let mut col = q.column(i);
            let before = col.clone();
            fix_phase(&mut col, 1e-10);
            assert_eq!(col, before);
        }
    }
}
