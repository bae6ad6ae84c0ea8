//! Problems of the form `T(z) = Σ_i f_i(z) A_i` with scalar coefficient functions.

use std::path::{Path, PathBuf};

use faer::MatRef;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::matrix_market::read_matrix_market_file;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::problem::{check_rows, NlevpProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CoefficientFn {
    One,
    Z,
    /// `i √(z − α²)`, principal branch.
    SqrtShift {
        alpha: f64,
    },
    /// `c e^{-τz}`
    ExpScale {
        c: f64,
        tau: f64,
    },
    /// `Σ_k a_k z^k`
    Polynomial {
        coefficients: Vec<c64>,
    },
}

impl CoefficientFn {
    pub fn eval(&self, z: c64) -> c64 {
        match self {
            CoefficientFn::One => c64::new(1.0, 0.0),
            CoefficientFn::Z => z,
            CoefficientFn::SqrtShift { alpha } => c64::i() * (z - alpha * alpha).sqrt(),
            CoefficientFn::ExpScale { c, tau } => *c * (-tau * z).exp(),
            CoefficientFn::Polynomial { coefficients } => coefficients
                .iter()
                .rev()
                .fold(c64::new(0.0, 0.0), |acc, a| acc * z + a),
        }
    }

    pub fn derivative(&self, z: c64) -> c64 {
        match self {
            CoefficientFn::One => c64::new(0.0, 0.0),
            CoefficientFn::Z => c64::new(1.0, 0.0),
            CoefficientFn::SqrtShift { alpha } => c64::i() * 0.5 / (z - alpha * alpha).sqrt(),
            CoefficientFn::ExpScale { c, tau } => -c * tau * (-tau * z).exp(),
            CoefficientFn::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(c64::new(0.0, 0.0), |acc, (k, a)| acc * z + a * k as f64),
        }
    }

    /// Sum of the absolute values of the summands making up `eval(z)`.
    pub fn magnitude(&self, z: c64) -> f64 {
        match self {
            CoefficientFn::Polynomial { coefficients } => coefficients
                .iter()
                .rev()
                .fold(0.0, |acc, a| acc * z.norm() + a.norm()),
            other => other.eval(z).norm(),
        }
    }

    /// True when `z` sits on the branch cut of a principal square root.
    pub fn on_branch_cut(&self, z: c64) -> bool {
        match self {
            CoefficientFn::SqrtShift { alpha } => {
                let w = z - alpha * alpha;
                w.im.abs() <= 1e-14 * w.norm().max(1.0) && w.re <= 0.0
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CombinedProblem {
    pub terms: Vec<(CoefficientFn, CMat)>,
}

impl CombinedProblem {
    pub fn new(terms: Vec<(CoefficientFn, CMat)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return invalid("combiner needs at least one term");
        };
        let n = first.nrows();
        if n == 0 {
            return invalid("combiner matrices must be non-empty");
        }
        for (i, (_, a)) in terms.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "term {i} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
        }
        Ok(Self { terms })
    }

    /// `T(z) = Σ_k z^k A_k`
    pub fn polynomial(coeffs: Vec<CMat>) -> Result<Self> {
        Self::new(
            coeffs
                .into_iter()
                .enumerate()
                .map(|(k, a)| {
                    let mut c = vec![c64::new(0.0, 0.0); k + 1];
                    c[k] = c64::new(1.0, 0.0);
                    (CoefficientFn::Polynomial { coefficients: c }, a)
                })
                .collect(),
        )
    }

    /// Scalar polynomial `Σ_k a_k z^k` as a 1×1 problem.
    pub fn scalar_polynomial(coefficients: &[c64]) -> Result<Self> {
        Self::new(vec![(
            CoefficientFn::Polynomial {
                coefficients: coefficients.to_vec(),
            },
            linalg::identity(1),
        )])
    }

    /// `zI − A`
    pub fn linear(a: CMat) -> Result<Self> {
        let n = a.nrows();
        Self::new(vec![
            (CoefficientFn::Z, linalg::identity(n)),
            (
                CoefficientFn::One,
                linalg::scaled(a.as_ref(), c64::new(-1.0, 0.0)),
            ),
        ])
    }

    /// Indices of terms whose coefficient function has a branch cut through `z`.
    pub fn branch_cut_terms(&self, z: c64) -> Vec<usize> {
        (0..self.terms.len())
            .filter(|&i| self.terms[i].0.on_branch_cut(z))
            .collect()
    }
}

impl NlevpProblem for CombinedProblem {
    fn dim(&self) -> usize {
        self.terms[0].1.nrows()
    }

    fn matrix(&self, z: c64) -> Option<CMat> {
        let n = self.dim();
        let mut t = linalg::zeros(n, n);
        for (f, a) in &self.terms {
            linalg::axpy(&mut t, f.eval(z), a.as_ref());
        }
        Some(t)
    }

    fn magnitude(&self, z: c64) -> Option<f64> {
        Some(
            self.terms
                .iter()
                .map(|(f, a)| f.magnitude(z) * linalg::fro_norm(a.as_ref()))
                .sum(),
        )
    }

    fn apply_derivative(&self, z: c64, v: MatRef<'_, c64>) -> Option<Result<CMat>> {
        Some(check_rows(self.dim(), v.nrows()).map(|_| {
            let n = self.dim();
            let mut t = linalg::zeros(n, n);
            for (f, a) in &self.terms {
                linalg::axpy(&mut t, f.derivative(z), a.as_ref());
            }
            linalg::matmul(t.as_ref(), v)
        }))
    }
}

/// One combiner term in a problem manifest: a coefficient function and either a
/// Matrix Market file or the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub function: CoefficientFn,
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Multiplies the matrix; `[re, im]`.
    #[serde(default = "one")]
    pub scale: c64,
    /// Use the identity of this size instead of a file.
    #[serde(default)]
    pub identity: Option<usize>,
}

fn one() -> c64 {
    c64::new(1.0, 0.0)
}

/// Build `Σ f_i(z) A_i` from Matrix Market files; relative paths resolve against `base`.
pub fn load_matrix_problem(terms: &[TermSpec], base: Option<&Path>) -> Result<CombinedProblem> {
    if terms.is_empty() {
        return invalid("combiner needs at least one term");
    }
    let mut out = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        let a = match (&t.file, t.identity) {
            (Some(f), None) => {
                let path = match base {
                    Some(b) if f.is_relative() => b.join(f),
                    _ => f.clone(),
                };
                read_matrix_market_file(&path)?
            }
            (None, Some(n)) => linalg::identity(n),
            _ => {
                return invalid(format!(
                    "term {i} needs exactly one of 'file' or 'identity'"
                ))
            }
        };
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "term {i} matrix is not square"
            )));
        }
        out.push((t.function.clone(), linalg::scaled(a.as_ref(), t.scale)));
    }
    CombinedProblem::new(out)
}
