use faer::MatRef;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, DenseLu};

/// Black-box matrix-valued function `T(z)` of size `n × n`.
///
/// Implementors supply either a dense `matrix(z)` (everything else then has a
/// default) or their own `apply`/`solve` pair.
pub trait NlevpProblem: Send + Sync {
    fn dim(&self) -> usize;

    /// Dense `T(z)` when it is cheap to assemble.
    fn matrix(&self, _z: c64) -> Option<CMat> {
        None
    }

    /// `T(z) V`
    fn apply(&self, z: c64, v: MatRef<'_, c64>) -> Result<CMat> {
        let t = self.matrix(z).ok_or_else(|| {
            Error::InvalidArgument("problem provides neither apply nor matrix".into())
        })?;
        check_rows(self.dim(), v.nrows())?;
        Ok(linalg::matmul(t.as_ref(), v))
    }

    /// `T(z)^{-1} B`
    fn solve(&self, z: c64, b: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), b.nrows())?;
        Ok(self.factor(z)?.solve(b))
    }

    /// `X T(z)^{-1}` for a row block `X` with `n` columns.
    fn solve_left(&self, z: c64, x: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), x.ncols())?;
        Ok(self.factor(z)?.rsolve(x))
    }

    /// `T'(z) V`, if the problem knows its derivative.
    fn apply_derivative(&self, _z: c64, _v: MatRef<'_, c64>) -> Option<Result<CMat>> {
        None
    }

    /// `(L^* T(z)^{-1}, T(z)^{-1} R)`, sharing one factorization where possible.
    fn probe(&self, z: c64, l: MatRef<'_, c64>, r: MatRef<'_, c64>) -> Result<(CMat, CMat)> {
        check_rows(self.dim(), l.nrows())?;
        check_rows(self.dim(), r.nrows())?;
        if self.matrix(z).is_some() {
            let lu = self.factor(z)?;
            Ok((lu.rsolve(linalg::adjoint(l).as_ref()), lu.solve(r)))
        } else {
            let ql = self.solve_left(z, linalg::adjoint(l).as_ref())?;
            let qr = self.solve(z, r)?;
            Ok((ql, qr))
        }
    }

    /// `‖T(z)‖_F` when `T(z)` can be assembled.
    fn norm_fro(&self, z: c64) -> Option<f64> {
        self.matrix(z).map(|t| linalg::fro_norm(t.as_ref()))
    }

    /// Size of the individual terms that make up `T(z)`, used to judge whether a
    /// small pivot is cancellation noise.
    fn magnitude(&self, _z: c64) -> Option<f64> {
        None
    }

    /// LU of the dense `T(z)`, failing on a numerically singular matrix.
    fn factor(&self, z: c64) -> Result<DenseLu> {
        let t = self.matrix(z).ok_or_else(|| {
            Error::InvalidArgument("problem provides neither solve nor matrix".into())
        })?;
        let lu = DenseLu::new(t.as_ref()).map_err(|_| Error::PointSingular { point: z })?;
        if lu.is_singular_relative(self.magnitude(z).unwrap_or(0.0)) {
            return Err(Error::PointSingular { point: z });
        }
        Ok(lu)
    }
}

pub(crate) fn check_rows(n: usize, got: usize) -> Result<()> {
    if n != got {
        return Err(Error::DimensionMismatch(format!(
            "expected {n} rows, got {got}"
        )));
    }
    Ok(())
}

/// Problem given by a closure that assembles `T(z)` densely, with an optional derivative.
pub struct DenseProblem<F>
where
    F: Fn(c64) -> CMat + Send + Sync,
{
    n: usize,
    f: F,
    df: Option<Box<dyn Fn(c64) -> CMat + Send + Sync>>,
}

impl<F> DenseProblem<F>
where
    F: Fn(c64) -> CMat + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f, df: None }
    }

    pub fn with_derivative(mut self, df: impl Fn(c64) -> CMat + Send + Sync + 'static) -> Self {
        self.df = Some(Box::new(df));
        self
    }
}

impl<F> NlevpProblem for DenseProblem<F>
where
    F: Fn(c64) -> CMat + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn matrix(&self, z: c64) -> Option<CMat> {
        Some((self.f)(z))
    }

    fn apply_derivative(&self, z: c64, v: MatRef<'_, c64>) -> Option<Result<CMat>> {
        self.df.as_ref().map(|df| {
            check_rows(self.n, v.nrows())?;
            Ok(linalg::matmul(df(z).as_ref(), v))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;

    fn diag_problem() -> impl NlevpProblem {
        DenseProblem::new(2, |z| linalg::from_diag(&[z - 1.0, z - 3.0]))
    }

    #[test]
    fn diagonal_inverse_at_zero() {
        let p = diag_problem();
        let x = p
            .solve(c64::new(0.0, 0.0), linalg::identity(2).as_ref())
            .unwrap();
        assert!((x[(0, 0)] + 1.0).norm() < 1e-15);
        assert!((x[(1, 1)] + 1.0 / 3.0).norm() < 1e-15);
        assert!(x[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn solve_then_apply_round_trips() {
        let p = DenseProblem::new(2, |z| {
            linalg::from_rows(&[
                vec![z * z + 1.0, c64::new(0.5, 0.0)],
                vec![c64::new(0.0, 1.0), z - 2.0],
            ])
        });
        let z = c64::new(0.3, 0.7);
        let b = Mat::from_fn(2, 3, |i, j| c64::new(i as f64 + 1.0, j as f64));
        let x = p.solve(z, b.as_ref()).unwrap();
        let back = p.apply(z, x.as_ref()).unwrap();
        assert!(linalg::fro_norm(linalg::sub(back.as_ref(), b.as_ref()).as_ref()) < 1e-13);
        let (ql, qr) = p.probe(z, b.as_ref(), b.as_ref()).unwrap();
        let lhs = linalg::matmul(linalg::adjoint(b.as_ref()).as_ref(), qr.as_ref());
        let rhs = linalg::matmul(ql.as_ref(), b.as_ref());
        assert!(linalg::fro_norm(linalg::sub(lhs.as_ref(), rhs.as_ref()).as_ref()) < 1e-13);
    }

    #[test]
    fn singular_point_is_reported() {
        let p = diag_problem();
        let err = p
            .solve(c64::new(1.0, 0.0), linalg::identity(2).as_ref())
            .unwrap_err();
        assert!(matches!(err, Error::PointSingular { .. }));
    }
}
