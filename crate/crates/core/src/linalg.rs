//! Thin dense-linear-algebra layer over `faer`.
//!
//! Everything in the solvers is expressed through these helpers so that the
//! numerical kernels (LU, SVD, eigen, generalized eigen) have one entry point.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

pub fn from_rows(rows: &[Vec<c64>]) -> CMat {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(m, n, |i, j| rows[i][j])
}

pub fn from_diag(d: &[c64]) -> CMat {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { c64::new(0.0, 0.0) })
}

pub fn column(a: MatRef<'_, c64>, j: usize) -> Vec<c64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

pub fn row(a: MatRef<'_, c64>, i: usize) -> Vec<c64> {
    (0..a.ncols()).map(|j| a[(i, j)]).collect()
}

pub fn col_matrix(v: &[c64]) -> CMat {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn row_matrix(v: &[c64]) -> CMat {
    Mat::from_fn(1, v.len(), |_, j| v[j])
}

pub fn scaled(a: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn adjoint(a: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn matmul(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    a * b
}

/// `dst += s * src`
pub fn axpy(dst: &mut CMat, s: c64, src: MatRef<'_, c64>) {
    debug_assert_eq!((dst.nrows(), dst.ncols()), (src.nrows(), src.ncols()));
    for j in 0..dst.ncols() {
        for i in 0..dst.nrows() {
            dst[(i, j)] += s * src[(i, j)];
        }
    }
}

pub fn sub(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

pub fn fro_norm(a: MatRef<'_, c64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|a^* b| / (‖a‖ ‖b‖)`, 1 when the vectors are collinear.
pub fn collinearity(a: &[c64], b: &[c64]) -> f64 {
    let inner: c64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    inner.norm() / (vec_norm(a) * vec_norm(b))
}

pub fn hstack(blocks: &[CMat]) -> CMat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows);
        out.as_mut()
            .submatrix_mut(0, off, rows, b.ncols())
            .copy_from(b.as_ref());
        off += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[CMat]) -> CMat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols);
        out.as_mut()
            .submatrix_mut(off, 0, b.nrows(), cols)
            .copy_from(b.as_ref());
        off += b.nrows();
    }
    out
}

pub fn is_finite(a: MatRef<'_, c64>) -> bool {
    (0..a.ncols())
        .all(|j| (0..a.nrows()).all(|i| a[(i, j)].re.is_finite() && a[(i, j)].im.is_finite()))
}

/// LU factorization with partial pivoting plus a cheap singularity test on the
/// pivots of `U`.
pub struct DenseLu {
    lu: PartialPivLu<c64>,
    min_pivot: f64,
    max_pivot: f64,
}

impl DenseLu {
    pub fn new(a: MatRef<'_, c64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "LU of a non-square {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        if !is_finite(a) {
            return Err(Error::LinAlg("matrix has non-finite entries".into()));
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..u.nrows() {
            let p = u[(i, i)].norm();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        Ok(Self {
            lu,
            min_pivot: lo,
            max_pivot: hi,
        })
    }

    /// Ratio of smallest to largest pivot magnitude; a crude reciprocal condition estimate.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot == 0.0 {
            0.0
        } else {
            self.min_pivot / self.max_pivot
        }
    }

    pub fn is_singular(&self) -> bool {
        self.is_singular_relative(0.0)
    }

    /// Singular to working precision when the smallest pivot is below a few
    /// ulps of `max(largest pivot, scale)`; `scale` is the size of the terms that
    /// were summed to form the matrix.
    pub fn is_singular_relative(&self, scale: f64) -> bool {
        let n = self.lu.U().nrows().max(1) as f64;
        !(self.min_pivot > 8.0 * n * f64::EPSILON * self.max_pivot.max(scale))
    }

    /// `A^{-1} B`
    pub fn solve(&self, b: MatRef<'_, c64>) -> CMat {
        self.lu.solve(b)
    }

    /// `B A^{-1}`
    pub fn rsolve(&self, b: MatRef<'_, c64>) -> CMat {
        self.lu.rsolve(b)
    }
}

/// Reduced SVD `A = U diag(s) V^*` with singular values in non-increasing order.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

impl ThinSvd {
    pub fn new(a: MatRef<'_, c64>) -> Result<Self> {
        if !is_finite(a) {
            return Err(Error::LinAlg(
                "SVD of a matrix with non-finite entries".into(),
            ));
        }
        let svd = a
            .thin_svd()
            .map_err(|e| Error::LinAlg(format!("SVD failed: {e:?}")))?;
        let s: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
        Ok(Self {
            u: svd.U().to_owned(),
            s,
            v: svd.V().to_owned(),
        })
    }

    /// Leading `k` triplets.
    pub fn truncate(&self, k: usize) -> (CMat, Vec<f64>, CMat) {
        let u = self.u.as_ref().subcols(0, k).to_owned();
        let v = self.v.as_ref().subcols(0, k).to_owned();
        (u, self.s[..k].to_vec(), v)
    }
}

pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(a) {
        return Err(Error::LinAlg(
            "SVD of a matrix with non-finite entries".into(),
        ));
    }
    a.singular_values()
        .map_err(|e| Error::LinAlg(format!("SVD failed: {e:?}")))
}

/// Eigenvalues and right eigenvectors of a square complex matrix.
pub fn eig(a: MatRef<'_, c64>) -> Result<(Vec<c64>, CMat)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    if !is_finite(a) {
        return Err(Error::LinAlg(
            "eigendecomposition of a matrix with non-finite entries".into(),
        ));
    }
    let e = a
        .eigen()
        .map_err(|e| Error::LinAlg(format!("eigendecomposition failed: {e:?}")))?;
    let vals = e.S().column_vector().iter().copied().collect();
    Ok((vals, e.U().to_owned()))
}

/// Generalized eigenproblem `A u = λ B u`; eigenvalues are returned as `(α, β)` pairs
/// with `λ = α / β`.
pub fn generalized_eig(
    a: MatRef<'_, c64>,
    b: MatRef<'_, c64>,
) -> Result<(Vec<c64>, Vec<c64>, CMat)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), Vec::new(), zeros(0, 0)));
    }
    if !is_finite(a) || !is_finite(b) {
        return Err(Error::LinAlg("pencil has non-finite entries".into()));
    }
    if a.nrows() == 1 {
        // faer under-allocates its workspace for 1×1 pencils
        return Ok((vec![a[(0, 0)]], vec![b[(0, 0)]], identity(1)));
    }
    let g = a
        .generalized_eigen(b)
        .map_err(|e| Error::LinAlg(format!("generalized eigendecomposition failed: {e:?}")))?;
    let alpha = g.S_a().column_vector().iter().copied().collect();
    let beta = g.S_b().column_vector().iter().copied().collect();
    Ok((alpha, beta, g.U().to_owned()))
}

/// 2-norm condition number of the column-normalized matrix.
pub fn column_scaled_condition(a: MatRef<'_, c64>) -> Result<f64> {
    if a.ncols() == 0 {
        return Ok(1.0);
    }
    let scaled = Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let nrm = (0..a.nrows())
            .map(|k| a[(k, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if nrm > 0.0 {
            a[(i, j)] / nrm
        } else {
            a[(i, j)]
        }
    });
    let s = singular_values(scaled.as_ref())?;
    let lo = s.last().copied().unwrap_or(0.0);
    Ok(if lo == 0.0 { f64::INFINITY } else { s[0] / lo })
}

/// Sort key used wherever eigenvalues are reported: ascending real part, then imaginary.
pub fn eig_order(vals: &[c64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| {
        vals[a]
            .re
            .total_cmp(&vals[b].re)
            .then(vals[a].im.total_cmp(&vals[b].im))
    });
    idx
}

pub fn select_columns(a: MatRef<'_, c64>, idx: &[usize]) -> CMat {
    Mat::from_fn(a.nrows(), idx.len(), |i, j| a[(i, idx[j])])
}

pub fn select_rows(a: MatRef<'_, c64>, idx: &[usize]) -> CMat {
    Mat::from_fn(idx.len(), a.ncols(), |i, j| a[(idx[i], j)])
}
