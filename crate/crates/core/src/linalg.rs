//! Dense real linear algebra: the [`Mat`] carrier, symmetric eigen-decomposition, SVD,
//! the five matrix norms used throughout the crate, and numerical rank.
//!
//! All spectra are returned in descending order. Factorizations are backed by `faer`;
//! only the factor contracts documented here are part of the API.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use faer::{MatRef, Side};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative singular-value cutoff used wherever a rank has to be decided.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Dense real matrix with at least one row and one column and only finite entries.
///
/// Logical layout is row-major (constructors, [`Mat::to_row_major`], CSV and FFI all use
/// it); storage is whatever the factorization backend prefers.
#[derive(Clone)]
pub struct Mat {
    inner: faer::Mat<f64>,
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!("empty matrix ({rows}×{cols})")));
    }
    Ok(())
}

impl Mat {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}×{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry ({}, {})", pos / cols, pos % cols)));
        }
        Ok(Self { inner: faer::Mat::from_fn(rows, cols, |i, j| data[i * cols + j]) })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(i) = rows.iter().position(|r| r.as_ref().len() != cols) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {cols}",
                rows[i].as_ref().len()
            )));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_shape(rows, cols)?;
        Self::from_faer(faer::Mat::from_fn(rows, cols, f))
    }

    /// Wraps a backend matrix, validating shape and finiteness.
    pub fn from_faer(inner: faer::Mat<f64>) -> Result<Self> {
        check_shape(inner.nrows(), inner.ncols())?;
        let m = Self { inner };
        if let Some((i, j)) = m.first_non_finite() {
            return Err(Error::NonFinite(format!("entry ({i}, {j})")));
        }
        Ok(m)
    }

    pub(crate) fn from_faer_unchecked(inner: faer::Mat<f64>) -> Self {
        debug_assert!(inner.nrows() > 0 && inner.ncols() > 0);
        Self { inner }
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix ({rows}×{cols})");
        Self { inner: faer::Mat::zeros(rows, cols) }
    }

    /// # Panics
    /// If `n` is zero.
    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "empty matrix (0×0)");
        Self { inner: faer::Mat::identity(n, n) }
    }

    pub fn from_diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    /// Matrix with iid standard normal entries, drawn in row-major order.
    pub fn random_normal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        Self::from_row_major(rows, cols, data).expect("gaussian samples are finite")
    }

    /// Haar-distributed `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
    pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        assert!(rows >= cols, "cannot fit {cols} orthonormal columns in R^{rows}");
        let g = Self::random_normal(rows, cols, rng);
        let qr = g.inner.qr();
        let mut q = qr.compute_thin_Q();
        let r = qr.thin_R();
        // Sign-fix against diag(R) so the distribution is uniform.
        for j in 0..cols {
            if r[(j, j)] < 0.0 {
                for v in q.col_as_slice_mut(j) {
                    *v = -*v;
                }
            }
        }
        Self { inner: q }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_faer(&self) -> MatRef<'_, f64> {
        self.inner.as_ref()
    }

    pub fn into_faer(self) -> faer::Mat<f64> {
        self.inner
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            out.extend((0..c).map(|j| self.inner[(i, j)]));
        }
        out
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.inner.col_as_slice(j)
    }

    /// Copy of the block starting at `(row, col)` with the given extent.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self::from_faer_unchecked(self.inner.as_ref().submatrix(row, col, rows, cols).to_owned())
    }

    pub fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose().to_owned() }
    }

    /// # Panics
    /// On inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Mat) -> Self {
        assert_eq!(
            self.cols(),
            rhs.rows(),
            "matmul of {:?} by {:?}",
            self.shape(),
            rhs.shape()
        );
        Self { inner: &self.inner * &rhs.inner }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `(A + Aᵀ)/2`; exactly symmetric.
    pub fn symmetric_part(&self) -> Self {
        assert!(self.is_square(), "symmetric part of a non-square matrix");
        Self { inner: symmetrize(self.as_faer()) }
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let inner = faer::Mat::from_fn(self.rows(), self.cols(), |i, j| f(self.inner[(i, j)]));
        Self { inner }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.as_faer())
    }

    /// Euclidean inner product `trace(AᵀB)`.
    pub fn inner(&self, other: &Mat) -> f64 {
        assert_eq!(self.shape(), other.shape(), "inner product shape mismatch");
        (0..self.cols())
            .map(|j| self.column(j).iter().zip(other.column(j)).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows().min(self.cols())).map(|i| self.inner[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.inner.norm_l2()
    }

    pub fn is_finite(&self) -> bool {
        self.first_non_finite().is_none()
    }

    fn first_non_finite(&self) -> Option<(usize, usize)> {
        (0..self.cols()).find_map(|j| {
            self.column(j).iter().position(|v| !v.is_finite()).map(|i| (i, j))
        })
    }
}

pub(crate) fn symmetrize(a: MatRef<'_, f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

pub(crate) fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

pub(crate) fn all_finite(a: MatRef<'_, f64>) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].is_finite()))
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape()
            && (0..self.cols()).all(|j| self.column(j) == other.column(j))
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}×{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|j| format!("{:.6}", self.get(i, j))).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.inner[idx]
    }
}

impl Add for &Mat {
    type Output = Mat;

    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        Mat { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &Mat {
    type Output = Mat;

    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        Mat { inner: &self.inner - &rhs.inner }
    }
}

impl Mul for &Mat {
    type Output = Mat;

    fn mul(self, rhs: &Mat) -> Mat {
        self.matmul(rhs)
    }
}

/// Symmetric eigen-decomposition `S = V·Diag(values)·Vᵀ`, values descending.
#[derive(Clone, Debug)]
pub struct EigSym {
    pub vectors: Mat,
    pub values: Vec<f64>,
}

/// Thin singular value decomposition `A = U·Diag(σ)·Vᵀ` with `k = min(m, n)` factors.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub singular_values: Vec<f64>,
    pub v: Mat,
}

/// Eigen-decomposition of a (numerically) symmetric matrix.
///
/// The input is accepted when `‖S − Sᵀ‖_F ≤ symmetry_tol·‖S‖_F` and is replaced by
/// `(S + Sᵀ)/2` before factorizing.
pub fn eig_sym(s: &Mat, symmetry_tol: f64) -> Result<EigSym> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "eigen-decomposition needs a square matrix, got {}×{}",
            s.rows(),
            s.cols()
        )));
    }
    let asymmetry = (s - &s.transpose()).frobenius();
    let allowed = symmetry_tol * s.frobenius();
    if asymmetry > allowed {
        return Err(Error::Symmetry { asymmetry, allowed });
    }
    let (vectors, values) = eig_symmetrized(symmetrize(s.as_faer()).as_ref())?;
    Ok(EigSym { vectors: Mat::from_faer_unchecked(vectors), values })
}

/// Eigen-decomposition of an already exactly symmetric matrix, descending order.
pub(crate) fn eig_symmetrized(s: MatRef<'_, f64>) -> Result<(faer::Mat<f64>, Vec<f64>)> {
    let evd = s
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("symmetric eigensolver: {e:?}")))?;
    let n = s.nrows();
    let ascending = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|k| ascending[n - 1 - k]).collect();
    let vectors = faer::Mat::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    Ok((vectors, values))
}

pub fn svd(a: &Mat) -> Result<Svd> {
    let (u, singular_values, v) = thin_svd(a.as_faer())?;
    Ok(Svd {
        u: Mat::from_faer_unchecked(u),
        singular_values,
        v: Mat::from_faer_unchecked(v),
    })
}

pub(crate) fn thin_svd(a: MatRef<'_, f64>) -> Result<(faer::Mat<f64>, Vec<f64>, faer::Mat<f64>)> {
    let svd = a.thin_svd().map_err(|e| Error::Decomposition(format!("SVD: {e:?}")))?;
    let s = svd.S().column_vector();
    let sv = (0..s.nrows()).map(|i| s[i].max(0.0)).collect();
    Ok((svd.U().to_owned(), sv, svd.V().to_owned()))
}

/// Singular values, descending.
///
/// # Panics
/// If the SVD iteration fails to converge, which does not happen for finite input.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let mut sv = a.as_faer().singular_values().expect("SVD of a finite matrix converges");
    for s in &mut sv {
        *s = s.max(0.0);
    }
    sv
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// Sum of singular values.
    Nuclear,
    Frobenius,
    /// Largest singular value.
    Operator,
    /// Sum of absolute entries.
    L1,
    /// Sum of column ℓ2 norms.
    L21,
}

pub fn norm(a: &Mat, kind: NormKind) -> f64 {
    match kind {
        NormKind::Nuclear => singular_values(a).iter().sum(),
        NormKind::Frobenius => a.frobenius(),
        NormKind::Operator => singular_values(a).first().copied().unwrap_or(0.0),
        NormKind::L1 => (0..a.cols()).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).sum(),
        NormKind::L21 => (0..a.cols()).map(|j| column_norm(a.column(j))).sum(),
    }
}

pub(crate) fn column_norm(col: &[f64]) -> f64 {
    faer::ColRef::from_slice(col).norm_l2()
}

/// Number of singular values strictly above `rel_tol·σ_max`; zero for the zero matrix.
pub fn numerical_rank(a: &Mat, rel_tol: f64) -> usize {
    rank_from_singular_values(&singular_values(a), rel_tol)
}

fn rank_from_singular_values(sv: &[f64], rel_tol: f64) -> usize {
    let cutoff = rel_tol * sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Orthogonal projector `V_r·V_rᵀ` onto the row space of `x`, where `V_r` holds the
/// right singular vectors above [`DEFAULT_RANK_TOL`].
///
/// # Panics
/// If the SVD iteration fails to converge, which does not happen for finite input.
pub fn row_space_projector(x: &Mat) -> Mat {
    let n = x.cols();
    let (_, sv, v) = thin_svd(x.as_faer()).expect("SVD of a finite matrix converges");
    let r = rank_from_singular_values(&sv, DEFAULT_RANK_TOL);
    if r == 0 {
        return Mat::zeros(n, n);
    }
    let vr = v.as_ref().get(.., 0..r);
    let p = vr * vr.transpose();
    Mat::from_faer_unchecked(symmetrize(p.as_ref()))
}
