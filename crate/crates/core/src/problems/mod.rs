//! Benchmark problems and their ground-truth oracles.

pub mod combiner;
pub mod delay;
pub mod matrix_market;
pub mod planted;

use std::path::Path;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::NlevpProblem;

pub use combiner::{load_matrix_problem, CoefficientFn, CombinedProblem, TermSpec};
pub use delay::{
    default_delay_contour, delay_eigen_oracle, make_delay_problem, DelayOracle, DelayProblem,
};
pub use matrix_market::{read_matrix_market, read_matrix_market_file};
pub use planted::{
    make_planted_problem, Dependency, PlantedProblem, PlantedSpec, Remainder, Spectrum,
};

/// Problem description as it appears in a run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSpec {
    Delay {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_tau")]
        tau: f64,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_emin")]
        e_min_mag: f64,
        #[serde(default = "default_emax")]
        e_max_mag: f64,
    },
    Planted(PlantedSpec),
    Matrix {
        terms: Vec<TermSpec>,
    },
    /// `T(z) = Σ_k z^k A_k` with dense coefficients given as rows of `[re, im]`.
    Polynomial {
        coefficients: Vec<Vec<Vec<c64>>>,
    },
}

fn default_c() -> f64 {
    delay::DEFAULT_C
}
fn default_tau() -> f64 {
    delay::DEFAULT_TAU
}
fn default_n() -> usize {
    50
}
fn default_emin() -> f64 {
    1e-4
}
fn default_emax() -> f64 {
    1e10
}

/// Concrete problem built from a manifest entry.
pub enum BuiltProblem {
    Delay(DelayProblem),
    Planted(PlantedProblem),
    Combined(CombinedProblem),
}

impl BuiltProblem {
    pub fn as_dyn(&self) -> &dyn NlevpProblem {
        match self {
            BuiltProblem::Delay(p) => p,
            BuiltProblem::Planted(p) => p,
            BuiltProblem::Combined(p) => p,
        }
    }
}

impl ProblemSpec {
    /// Relative file paths resolve against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<BuiltProblem> {
        Ok(match self {
            ProblemSpec::Delay {
                c,
                tau,
                n,
                e_min_mag,
                e_max_mag,
            } => BuiltProblem::Delay(make_delay_problem(*c, *tau, *n, *e_min_mag, *e_max_mag)?),
            ProblemSpec::Planted(spec) => {
                BuiltProblem::Planted(make_planted_problem(spec.clone())?)
            }
            ProblemSpec::Matrix { terms } => {
                BuiltProblem::Combined(load_matrix_problem(terms, base)?)
            }
            ProblemSpec::Polynomial { coefficients } => {
                let mats = coefficients
                    .iter()
                    .map(|rows| crate::quadrature::rows_matrix(rows))
                    .collect::<Result<Vec<_>>>()?;
                BuiltProblem::Combined(CombinedProblem::polynomial(mats)?)
            }
        })
    }
}
