//! Rank selection and SVD-projected realization shared by every backend.

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{self, CMat, DenseLu, ThinSvd};
use crate::problem::NlevpProblem;
use crate::residual::{residual_report, EigenSolution, Method};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankPolicy {
    pub rel_tol: f64,
    pub abs_floor: f64,
    #[serde(default)]
    pub forced: Option<usize>,
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_floor: 1e-12,
            forced: None,
        }
    }
}

impl RankPolicy {
    /// Looser relative threshold suited to quadrature data.
    pub fn quadrature() -> Self {
        Self {
            rel_tol: 1e-8,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn forced(rank: usize) -> Self {
        Self {
            forced: Some(rank),
            ..Self::default()
        }
    }

    /// Largest `k` with `σ_k ≥ max(rel_tol·σ₁, abs_floor)`, or the forced rank
    /// (clamped to the number of values).
    pub fn select(&self, s: &[f64]) -> usize {
        if let Some(k) = self.forced {
            return k.min(s.len());
        }
        let Some(&s1) = s.first() else { return 0 };
        let thresh = (self.rel_tol * s1).max(self.abs_floor);
        s.iter().take_while(|&&x| x >= thresh).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularValueReport {
    pub values: Vec<f64>,
    pub suggested_rank: usize,
    /// `σ_{k+1}/σ_k`
    pub gap_ratios: Vec<f64>,
}

pub fn singular_value_report_of(values: Vec<f64>, policy: &RankPolicy) -> SingularValueReport {
    let gap_ratios = values
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let suggested_rank = policy.select(&values);
    SingularValueReport {
        values,
        suggested_rank,
        gap_ratios,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `B = X^* S Y Σ^{-1}`; right vectors `C Y Σ^{-1} s_j`; left rows `S^{-1} X^* 𝔹`.
    Hankel,
    /// `B = Σ^{-1} X^* S Y`; right vectors `C Y s_j`; left rows `−S^{-1} Σ^{-1} X^* 𝔹`.
    Loewner,
}

/// Eigen-data of an SVD-projected pencil before residual evaluation.
#[derive(Clone, Debug)]
pub struct Realization {
    pub eigenvalues: Vec<c64>,
    /// Eigenvectors of `B`, columns ordered like `eigenvalues`.
    pub s: CMat,
    pub b: CMat,
    pub x: CMat,
    pub sigma: Vec<f64>,
    pub y: CMat,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Unnormalized right vectors, one column per eigenvalue.
    pub right: CMat,
    /// Unnormalized left rows, one row per eigenvalue.
    pub left_rows: CMat,
    pub eigvec_condition: f64,
    pub warnings: Vec<String>,
}

pub const EIGVEC_COND_LIMIT: f64 = 1e10;

/// SVD-truncate `base`, project `shifted`, diagonalize, and lift eigenvectors with
/// the one-sided data (`right_data` has `base.ncols()` columns, `left_data` has
/// `base.nrows()` rows).
pub fn realize(
    base: MatRef<'_, c64>,
    shifted: MatRef<'_, c64>,
    right_data: MatRef<'_, c64>,
    left_data: MatRef<'_, c64>,
    projection: Projection,
    policy: &RankPolicy,
) -> Result<Realization> {
    if base.nrows() != shifted.nrows() || base.ncols() != shifted.ncols() {
        return invalid("pencil matrices differ in shape");
    }
    if right_data.ncols() != base.ncols() || left_data.nrows() != base.nrows() {
        return invalid("one-sided data does not match the pencil shape");
    }
    let svd = ThinSvd::new(base)?;
    let singular_values = svd.s.clone();
    let rank = policy.select(&singular_values);
    let mut warnings = Vec::new();
    if rank == 0 {
        return Ok(Realization {
            eigenvalues: Vec::new(),
            s: Mat::zeros(0, 0),
            b: Mat::zeros(0, 0),
            x: Mat::zeros(base.nrows(), 0),
            sigma: Vec::new(),
            y: Mat::zeros(base.ncols(), 0),
            singular_values,
            rank: 0,
            right: Mat::zeros(right_data.nrows(), 0),
            left_rows: Mat::zeros(0, left_data.ncols()),
            eigvec_condition: 1.0,
            warnings,
        });
    }
    let (x, sig, y) = svd.truncate(rank);
    if sig.contains(&0.0) {
        return invalid("forced rank exceeds the number of nonzero singular values");
    }
    let xs = linalg::matmul(linalg::adjoint(x.as_ref()).as_ref(), shifted);
    let xsy = linalg::matmul(xs.as_ref(), y.as_ref());
    let b = match projection {
        Projection::Hankel => Mat::from_fn(rank, rank, |i, j| xsy[(i, j)] / sig[j]),
        Projection::Loewner => Mat::from_fn(rank, rank, |i, j| xsy[(i, j)] / sig[i]),
    };
    let (vals, vecs) = linalg::eig(b.as_ref())?;
    let order = linalg::eig_order(&vals);
    let eigenvalues: Vec<c64> = order.iter().map(|&i| vals[i]).collect();
    let s = linalg::select_columns(vecs.as_ref(), &order);
    let eigvec_condition = linalg::column_scaled_condition(s.as_ref())?;
    if eigvec_condition > EIGVEC_COND_LIMIT {
        warnings.push(format!(
            "projected matrix is close to defective (eigenvector condition {eigvec_condition:.2e})"
        ));
    }
    let cy = linalg::matmul(right_data, y.as_ref());
    let lift = match projection {
        Projection::Hankel => Mat::from_fn(rank, rank, |i, j| s[(i, j)] / sig[i]),
        Projection::Loewner => s.clone(),
    };
    let right = linalg::matmul(cy.as_ref(), lift.as_ref());
    let xb = linalg::matmul(linalg::adjoint(x.as_ref()).as_ref(), left_data);
    let xb = match projection {
        Projection::Hankel => xb,
        Projection::Loewner => Mat::from_fn(rank, xb.ncols(), |i, j| -xb[(i, j)] / sig[i]),
    };
    let lu = DenseLu::new(s.as_ref())?;
    let left_rows = lu.solve(xb.as_ref());
    Ok(Realization {
        eigenvalues,
        s,
        b,
        x,
        sigma: sig,
        y,
        singular_values,
        rank,
        right,
        left_rows,
        eigvec_condition,
        warnings,
    })
}

/// Options shared by the solver backends when turning a realization into an [`EigenSolution`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub left_eigenvectors: bool,
}

pub(crate) fn normalize_columns(a: MatRef<'_, c64>) -> CMat {
    let mut out = a.to_owned();
    for j in 0..out.ncols() {
        let nrm = linalg::vec_norm(&linalg::column(out.as_ref(), j));
        if nrm > 0.0 {
            for i in 0..out.nrows() {
                out[(i, j)] /= nrm;
            }
        }
    }
    out
}

/// Residuals from the problem (if given), normalization, and packaging.
pub fn finish_solution(
    problem: Option<&dyn NlevpProblem>,
    real: Realization,
    method: Method,
    options: &SolveOptions,
) -> Result<EigenSolution> {
    let n = real.right.nrows();
    if real.rank == 0 {
        return Ok(EigenSolution::empty(method, n, real.singular_values));
    }
    let left = options
        .left_eigenvectors
        .then(|| normalize_columns(linalg::adjoint(real.left_rows.as_ref()).as_ref()));
    let m = real.eigenvalues.len();
    let (vectors, residuals, relative) = match problem {
        Some(p) => {
            let rep = residual_report(p, &real.eigenvalues, real.right.as_ref())?;
            (rep.eigenvectors, rep.residuals, rep.relative_residuals)
        }
        None => (
            normalize_columns(real.right.as_ref()),
            vec![f64::NAN; m],
            None,
        ),
    };
    Ok(EigenSolution {
        method,
        eigenvalues: real.eigenvalues,
        right_eigenvectors: vectors,
        left_eigenvectors: left,
        residuals,
        relative_residuals: relative,
        singular_values: real.singular_values,
        rank_used: real.rank,
        eigvec_condition: real.eigvec_condition,
        warnings: real.warnings,
        boundary_flags: vec![false; m],
        dropped: 0,
        infinite_discarded: 0,
        approximate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_policy_thresholds() {
        let s = [1.0, 1e-3, 1e-9, 1e-11, 1e-16];
        assert_eq!(RankPolicy::default().select(&s), 3);
        assert_eq!(RankPolicy::quadrature().select(&s), 2);
        assert_eq!(RankPolicy::forced(4).select(&s), 4);
        assert_eq!(RankPolicy::forced(9).select(&s), 5);
        assert_eq!(RankPolicy::default().select(&[1e-13, 1e-14]), 0);
        assert_eq!(RankPolicy::default().select(&[]), 0);
    }

    #[test]
    fn report_gaps() {
        let r = singular_value_report_of(vec![2.0, 1.0, 1e-15], &RankPolicy::default());
        assert_eq!(r.suggested_rank, 2);
        assert_eq!(r.gap_ratios.len(), 2);
        assert!((r.gap_ratios[0] - 0.5).abs() < 1e-15);
    }
}
