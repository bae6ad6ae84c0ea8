//! Python bindings: problems, the contour solvers, the delay oracle, filters and modal truncation.

use std::path::PathBuf;

use nlevp_contour::contour::ContourQuadrature;
use nlevp_contour::filters::{eval_hankel_filter, eval_loewner_filter};
use nlevp_contour::linalg::{self, CMat};
use nlevp_contour::loewner_multi::InterpolationScheme;
use nlevp_contour::modal::{self, LtiTransferSource};
use nlevp_contour::probing::ProbingConfig;
use nlevp_contour::problem::NlevpProblem;
use nlevp_contour::problems::delay::{DEFAULT_C, DEFAULT_TAU};
use nlevp_contour::problems::{
    default_delay_contour, delay_eigen_oracle, make_delay_problem, make_planted_problem,
    BuiltProblem, CombinedProblem, PlantedSpec, Spectrum,
};
use nlevp_contour::realize::RankPolicy;
use nlevp_contour::residual::{EigenSolution, Method};
use nlevp_contour::solver::{self, MethodParams, RunConfig};
use nlevp_contour::Error;
use num_complex::Complex64 as c64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_)
        | Error::DimensionMismatch(_)
        | Error::Parse(_)
        | Error::Json(_) => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows_of(m: &CMat) -> Vec<Vec<c64>> {
    (0..m.nrows()).map(|i| linalg::row(m.as_ref(), i)).collect()
}

fn matrix_of(rows: &[Vec<c64>]) -> PyResult<CMat> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err(
            "expected a non-empty rectangular matrix (list of equal-length rows)",
        ));
    }
    Ok(linalg::from_rows(rows))
}

fn circle(center: c64, radius: f64, n: usize) -> PyResult<ContourQuadrature> {
    ContourQuadrature::circle(center, radius, n).map_err(to_py)
}

/// A nonlinear eigenvalue problem `T(z)`.
#[pyclass(frozen, module = "nlevp_contour")]
struct Problem {
    inner: BuiltProblem,
}

impl Problem {
    fn dyn_ref(&self) -> &dyn NlevpProblem {
        self.inner.as_dyn()
    }
}

#[pymethods]
impl Problem {
    /// Planted problem with known eigenvalues. `eigenvalues` overrides the random spectrum.
    #[staticmethod]
    #[pyo3(signature = (n, m, seed = 0, eigenvalues = None))]
    fn planted(n: usize, m: usize, seed: u64, eigenvalues: Option<Vec<c64>>) -> PyResult<Self> {
        let mut spec = PlantedSpec::standard(n, m, seed);
        if let Some(values) = eigenvalues {
            spec.spectrum = Spectrum::Given { values };
        }
        let p = make_planted_problem(spec).map_err(to_py)?;
        Ok(Self {
            inner: BuiltProblem::Planted(p),
        })
    }

    /// Diagonal delay problem. The defaults give the benchmark instance.
    #[staticmethod]
    #[pyo3(signature = (c = DEFAULT_C, tau = DEFAULT_TAU, n = 50, e_min = 1e-4, e_max = 1e10))]
    fn delay(c: f64, tau: f64, n: usize, e_min: f64, e_max: f64) -> PyResult<Self> {
        let p = make_delay_problem(c, tau, n, e_min, e_max).map_err(to_py)?;
        Ok(Self {
            inner: BuiltProblem::Delay(p),
        })
    }

    /// `T(z) = Σ_k z^k A_k` from a list of square matrices.
    #[staticmethod]
    fn polynomial(coefficients: Vec<Vec<Vec<c64>>>) -> PyResult<Self> {
        let mats = coefficients
            .iter()
            .map(|a| matrix_of(a))
            .collect::<PyResult<Vec<_>>>()?;
        let p = CombinedProblem::polynomial(mats).map_err(to_py)?;
        Ok(Self {
            inner: BuiltProblem::Combined(p),
        })
    }

    /// Problem from the `problem` entry of a JSON manifest. Relative paths resolve against `base_dir`.
    #[staticmethod]
    #[pyo3(signature = (manifest, base_dir = None))]
    fn from_json(manifest: &str, base_dir: Option<PathBuf>) -> PyResult<Self> {
        let cfg = RunConfig::from_json_str(manifest).map_err(to_py)?;
        let spec = cfg
            .problem
            .ok_or_else(|| PyValueError::new_err("manifest has no problem entry"))?;
        let inner = spec.build(base_dir.as_deref()).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.dyn_ref().dim()
    }

    /// Known eigenvalues: the planted spectrum, or the oracle roots for the delay problem inside its default contour.
    fn known_eigenvalues(&self) -> Option<Vec<c64>> {
        match &self.inner {
            BuiltProblem::Planted(p) => Some(p.lambda.clone()),
            BuiltProblem::Delay(p) => default_delay_contour(64)
                .ok()
                .map(|q| delay_eigen_oracle(p, &q).eigenvalues()),
            BuiltProblem::Combined(_) => None,
        }
    }

    /// Dense `T(z)` as a list of rows.
    fn matrix(&self, z: c64) -> PyResult<Vec<Vec<c64>>> {
        let t = self
            .dyn_ref()
            .matrix(z)
            .ok_or_else(|| PyRuntimeError::new_err("problem cannot assemble a dense matrix"))?;
        Ok(rows_of(&t))
    }

    fn __repr__(&self) -> String {
        let kind = match &self.inner {
            BuiltProblem::Delay(_) => "delay",
            BuiltProblem::Planted(_) => "planted",
            BuiltProblem::Combined(_) => "combined",
        };
        format!("Problem(kind={kind}, dim={})", self.dim())
    }
}

/// Eigenvalues, eigenvectors and diagnostics of one solve.
#[pyclass(frozen, module = "nlevp_contour")]
struct Solution {
    inner: EigenSolution,
}

#[pymethods]
impl Solution {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<c64> {
        self.inner.eigenvalues.clone()
    }

    /// Right eigenvectors, one list per eigenvalue.
    #[getter]
    fn eigenvectors(&self) -> Vec<Vec<c64>> {
        let v = &self.inner.right_eigenvectors;
        (0..v.ncols())
            .map(|j| linalg::column(v.as_ref(), j))
            .collect()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.residuals.clone()
    }

    #[getter]
    fn singular_values(&self) -> Vec<f64> {
        self.inner.singular_values.clone()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank_used
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    #[getter]
    fn approximate(&self) -> bool {
        self.inner.approximate
    }

    #[getter]
    fn max_residual(&self) -> f64 {
        self.inner.max_residual()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(method={}, count={}, rank={}, max_residual={:.3e})",
            self.method(),
            self.inner.len(),
            self.inner.rank_used,
            self.inner.max_residual()
        )
    }
}

/// Eigenvalues of `problem` inside the circle `|z - center| = radius`.
///
/// `method` is one of hankel, loewner1, loewnerN, direct. `ell` and `r` default to `min(dim, 8)`.
#[pyfunction]
#[pyo3(signature = (problem, center, radius, n = 64, method = "hankel", k = 1, sigma = None, ell = None, r = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &Problem,
    center: c64,
    radius: f64,
    n: usize,
    method: &str,
    k: usize,
    sigma: Option<c64>,
    ell: Option<usize>,
    r: Option<usize>,
    seed: u64,
) -> PyResult<Solution> {
    let method: Method = method.parse().map_err(to_py)?;
    let contour = circle(center, radius, n)?;
    let dim = problem.dyn_ref().dim();
    let probes = ProbingConfig::random(
        dim,
        ell.unwrap_or(dim.min(8)),
        r.unwrap_or(dim.min(8)),
        seed,
    )
    .map_err(to_py)?;
    let mut params = MethodParams::new(method).with_k(k);
    if let Some(s) = sigma {
        params = params.with_sigma(s);
    }
    let p = problem.dyn_ref();
    let inner = py
        .detach(|| solver::solve(p, &contour, &probes, &params))
        .map_err(to_py)?;
    Ok(Solution { inner })
}

/// Runs the solve described by a complete JSON manifest.
#[pyfunction]
#[pyo3(signature = (manifest, base_dir = None))]
fn solve_config(py: Python<'_>, manifest: &str, base_dir: Option<PathBuf>) -> PyResult<Solution> {
    let cfg = RunConfig::from_json_str(manifest).map_err(to_py)?;
    let spec = cfg
        .problem
        .as_ref()
        .ok_or_else(|| PyValueError::new_err("manifest has no problem entry"))?;
    let built = spec.build(base_dir.as_deref()).map_err(to_py)?;
    let p = built.as_dyn();
    let contour = cfg.contour_quadrature().map_err(to_py)?;
    let probes = cfg.probes(p.dim(), p.dim()).map_err(to_py)?;
    let inner = py
        .detach(|| solver::solve(p, &contour, &probes, &cfg.params))
        .map_err(to_py)?;
    Ok(Solution { inner })
}

/// Center and radius of the circle enclosing the 11 rightmost delay eigenvalues.
#[pyfunction]
fn delay_contour() -> PyResult<(c64, f64)> {
    let q = default_delay_contour(64).map_err(to_py)?;
    Ok((q.center(), q.scale()))
}

/// Root-oracle eigenvalues of a delay problem inside the given circle.
#[pyfunction]
#[pyo3(signature = (problem, center = None, radius = None))]
fn delay_oracle(problem: &Problem, center: Option<c64>, radius: Option<f64>) -> PyResult<Vec<c64>> {
    let BuiltProblem::Delay(p) = &problem.inner else {
        return Err(PyValueError::new_err("the oracle needs a delay problem"));
    };
    let q = match (center, radius) {
        (Some(c), Some(r)) => circle(c, r, 64)?,
        (None, None) => default_delay_contour(64).map_err(to_py)?,
        _ => {
            return Err(PyValueError::new_err(
                "give both center and radius, or neither",
            ))
        }
    };
    Ok(delay_eigen_oracle(p, &q).eigenvalues())
}

/// Filter values at `points`: `b_k` for the Hankel moments, or `b_{σ,k}` when `sigma` is given.
#[pyfunction]
#[pyo3(signature = (center, radius, n, k, points, sigma = None))]
fn filter_values(
    center: c64,
    radius: f64,
    n: usize,
    k: usize,
    points: Vec<c64>,
    sigma: Option<c64>,
) -> PyResult<Vec<c64>> {
    let q = circle(center, radius, n)?;
    points
        .into_iter()
        .map(|z| match sigma {
            Some(s) => eval_loewner_filter(&q, s, k, z),
            None => eval_hankel_filter(&q, k, z),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)
}

/// Pole-residue reduced model `Σ_j c_j b_j^* / (z − p_j)`.
#[pyclass(frozen, module = "nlevp_contour")]
struct ModalRom {
    inner: modal::ModalRom,
}

#[pymethods]
impl ModalRom {
    #[getter]
    fn poles(&self) -> Vec<c64> {
        self.inner.poles().to_vec()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank
    }

    #[getter]
    fn singular_values(&self) -> Vec<f64> {
        self.inner.singular_values.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    /// Transfer function of the reduced model at `z`, as a list of rows.
    fn eval(&self, z: c64) -> PyResult<Vec<Vec<c64>>> {
        if self.inner.rank == 0 {
            return Err(PyRuntimeError::new_err(
                "the reduced model retains no poles",
            ));
        }
        Ok(rows_of(&self.inner.eval(z)))
    }

    fn __repr__(&self) -> String {
        format!(
            "ModalRom(rank={}, poles={:?})",
            self.inner.rank,
            self.inner.poles()
        )
    }
}

/// Modal truncation of `C(zI − A)^{-1}B` to the poles inside the circle.
///
/// Samples lie on a concentric circle at `ratio` times the radius.
#[pyfunction]
#[pyo3(signature = (a, b, c, center, radius, n = 128, points = 3, directions = None, ratio = 4.0 / 3.0, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn modal_truncate(
    py: Python<'_>,
    a: Vec<Vec<c64>>,
    b: Vec<Vec<c64>>,
    c: Vec<Vec<c64>>,
    center: c64,
    radius: f64,
    n: usize,
    points: usize,
    directions: Option<usize>,
    ratio: f64,
    seed: u64,
) -> PyResult<ModalRom> {
    let source = LtiTransferSource::state_space(matrix_of(&a)?, matrix_of(&b)?, matrix_of(&c)?)
        .map_err(to_py)?;
    let contour = circle(center, radius, n)?;
    let (n_out, n_in) = (source.n_out(), source.n_in());
    let dirs = directions.unwrap_or(n_out.min(n_in));
    let probes = ProbingConfig::random_rect(n_out, n_in, dirs, dirs, seed).map_err(to_py)?;
    let scheme =
        InterpolationScheme::concentric(&contour, points, dirs, ratio, true).map_err(to_py)?;
    let inner = py
        .detach(|| {
            modal::modal_truncate(
                &source,
                &contour,
                &scheme,
                &probes,
                &RankPolicy::quadrature(),
            )
        })
        .map_err(to_py)?;
    Ok(ModalRom { inner })
}

#[pymodule]
#[pyo3(name = "nlevp_contour")]
pub fn nlevp_contour_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Solution>()?;
    m.add_class::<ModalRom>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_config, m)?)?;
    m.add_function(wrap_pyfunction!(delay_contour, m)?)?;
    m.add_function(wrap_pyfunction!(delay_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(filter_values, m)?)?;
    m.add_function(wrap_pyfunction!(modal_truncate, m)?)?;
    Ok(())
}
