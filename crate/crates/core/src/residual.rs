use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::contour::{ContourQuadrature, Membership};
use crate::error::{invalid, Result};
use crate::linalg::{self, CMat};
use crate::problem::NlevpProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hankel,
    Loewner1,
    #[serde(rename = "loewnerN", alias = "loewner_n")]
    LoewnerN,
    Direct,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hankel => "hankel",
            Method::Loewner1 => "loewner1",
            Method::LoewnerN => "loewnerN",
            Method::Direct => "direct",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hankel" => Ok(Method::Hankel),
            "loewner1" | "single" => Ok(Method::Loewner1),
            "loewnern" | "multi" => Ok(Method::LoewnerN),
            "direct" => Ok(Method::Direct),
            _ => invalid(format!(
                "unknown method '{s}' (hankel, loewner1, loewnerN, direct)"
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub method: Method,
    pub eigenvalues: Vec<c64>,
    /// Unit 2-norm columns.
    pub right_eigenvectors: CMat,
    /// Unit 2-norm columns, when requested.
    pub left_eigenvectors: Option<CMat>,
    pub residuals: Vec<f64>,
    /// Residual divided by `‖T(λ)‖_F`, when the problem can report that norm.
    pub relative_residuals: Option<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub rank_used: usize,
    /// Condition number of the eigenvector matrix of the projected pencil.
    pub eigvec_condition: f64,
    pub warnings: Vec<String>,
    pub boundary_flags: Vec<bool>,
    pub dropped: usize,
    pub infinite_discarded: usize,
    /// Results without an in-region guarantee (direct rational approximation).
    pub approximate: bool,
}

impl EigenSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn empty(method: Method, n: usize, singular_values: Vec<f64>) -> Self {
        Self {
            method,
            eigenvalues: Vec::new(),
            right_eigenvectors: Mat::zeros(n, 0),
            left_eigenvectors: None,
            residuals: Vec::new(),
            relative_residuals: None,
            singular_values,
            rank_used: 0,
            eigvec_condition: 1.0,
            warnings: vec!["no singular value above the rank threshold; empty spectrum".into()],
            boundary_flags: Vec::new(),
            dropped: 0,
            infinite_discarded: 0,
            approximate: false,
        }
    }

    /// Subset of eigenpairs, keeping everything else.
    pub fn select(&self, idx: &[usize]) -> Self {
        let mut out = self.clone();
        out.eigenvalues = idx.iter().map(|&i| self.eigenvalues[i]).collect();
        out.right_eigenvectors = linalg::select_columns(self.right_eigenvectors.as_ref(), idx);
        out.left_eigenvectors = self
            .left_eigenvectors
            .as_ref()
            .map(|l| linalg::select_columns(l.as_ref(), idx));
        out.residuals = idx.iter().map(|&i| self.residuals[i]).collect();
        out.relative_residuals = self
            .relative_residuals
            .as_ref()
            .map(|r| idx.iter().map(|&i| r[i]).collect());
        out.boundary_flags = idx
            .iter()
            .map(|&i| self.boundary_flags.get(i).copied().unwrap_or(false))
            .collect();
        out
    }
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub eigenvectors: CMat,
    pub residuals: Vec<f64>,
    pub relative_residuals: Option<Vec<f64>>,
    pub max_residual: f64,
}

/// Normalizes each column to unit 2-norm and evaluates `‖T(λ_j) v_j‖₂` from the problem.
pub fn residual_report(
    problem: &dyn NlevpProblem,
    eigenvalues: &[c64],
    eigenvectors: MatRef<'_, c64>,
) -> Result<ResidualReport> {
    if eigenvectors.ncols() != eigenvalues.len() {
        return invalid(format!(
            "{} eigenvalues but {} eigenvector columns",
            eigenvalues.len(),
            eigenvectors.ncols()
        ));
    }
    let n = eigenvectors.nrows();
    let mut v = eigenvectors.to_owned();
    for j in 0..v.ncols() {
        let nrm = linalg::vec_norm(&linalg::column(v.as_ref(), j));
        if !(nrm > 0.0) || !nrm.is_finite() {
            return invalid(format!("eigenvector {j} is zero or not finite"));
        }
        for i in 0..n {
            v[(i, j)] /= nrm;
        }
    }
    let mut residuals = Vec::with_capacity(eigenvalues.len());
    let mut relative = Some(Vec::with_capacity(eigenvalues.len()));
    for (j, &lam) in eigenvalues.iter().enumerate() {
        let col = v.as_ref().subcols(j, 1);
        let tv = problem.apply(lam, col)?;
        let res = linalg::fro_norm(tv.as_ref());
        residuals.push(res);
        match (problem.norm_fro(lam), relative.as_mut()) {
            (Some(t), Some(r)) => r.push(if t > 0.0 { res / t } else { res }),
            _ => relative = None,
        }
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ResidualReport {
        eigenvectors: v,
        residuals,
        relative_residuals: relative,
        max_residual,
    })
}

/// Drops eigenpairs outside the closed region unless `keep_all`; boundary values are
/// kept and flagged.
pub fn filter_eigenvalues_to_domain(
    solution: &EigenSolution,
    contour: &ContourQuadrature,
    keep_all: bool,
) -> EigenSolution {
    let membership: Vec<Membership> = solution
        .eigenvalues
        .iter()
        .map(|&z| contour.membership(z))
        .collect();
    let mut out = if keep_all {
        solution.clone()
    } else {
        let keep: Vec<usize> = (0..membership.len())
            .filter(|&i| membership[i] != Membership::Outside)
            .collect();
        let mut s = solution.select(&keep);
        s.dropped = solution.dropped + (membership.len() - keep.len());
        s
    };
    let kept_membership: Vec<Membership> = out
        .eigenvalues
        .iter()
        .map(|&z| contour.membership(z))
        .collect();
    out.boundary_flags = kept_membership
        .iter()
        .map(|m| *m == Membership::Boundary)
        .collect();
    let on_boundary = out.boundary_flags.iter().filter(|b| **b).count();
    if on_boundary > 0 {
        out.warnings.push(format!(
            "{on_boundary} eigenvalue(s) on the contour boundary"
        ));
    }
    out
}
