//! Contour-integral eigensolvers for nonlinear eigenvalue problems `T(λ)v = 0`:
//! block Hankel on Markov moments, single- and multi-point Loewner realizations,
//! filter diagnostics, and modal truncation of LTI systems.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod error;
pub mod filters;
pub mod hankel;
pub mod io;
pub mod linalg;
pub mod loewner_multi;
pub mod loewner_single;
pub mod modal;
pub mod moments;
pub mod probing;
pub mod problem;
pub mod problems;
pub mod quadrature;
pub mod realize;
pub mod residual;
pub mod solver;

pub use error::{Error, Result};
