use num_complex::Complex64 as c64;

/// Errors raised by the contour-integral solvers and their plumbing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// `T(z)` could not be solved at a quadrature node: the contour passes through
    /// (or numerically on top of) an eigenvalue.
    #[error("T(z) is singular at quadrature node {index} (z = {node}); the contour passes through an eigenvalue")]
    NodeSingular { index: usize, node: c64 },

    /// `T(z)` is singular at an interpolation or evaluation point.
    #[error("T(z) is singular at point z = {point}")]
    PointSingular { point: c64 },

    /// A sampling point coincides with quadrature node `index`, so `1/(point - node)` blows up.
    #[error("point {point} coincides with quadrature node {index} ({node})")]
    NodeCoincidence { index: usize, node: c64, point: c64 },

    /// A rational function (filter, interpolant) was evaluated at one of its poles.
    #[error("evaluation at a pole: z = {z}")]
    Pole { z: c64 },

    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
