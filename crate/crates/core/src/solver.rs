//! Method dispatch over precomputed quadrature tensors, parameter sweeps, and the
//! run configuration shared by the command line and the Python bindings.

use std::path::Path;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::contour::{build_contour, ContourKind, ContourQuadrature, Membership};
use crate::error::{invalid, Result};
use crate::hankel::{build_hankel, solve_hankel};
use crate::loewner_multi::{
    build_multipoint_from_data, direct_resolvent_pencil, solve_multipoint, InterpolationScheme,
};
use crate::loewner_single::{build_single_point_pencil, solve_single_point};
use crate::moments::{markov_moments, markov_moments_scaled, sigma_moments};
use crate::probing::ProbingConfig;
use crate::problem::NlevpProblem;
use crate::problems::ProblemSpec;
use crate::quadrature::{compute_quadrature_data, QuadratureDataTensors};
use crate::realize::{RankPolicy, SolveOptions};
use crate::residual::{filter_eigenvalues_to_domain, EigenSolution, Method};

/// Ratio of the default interpolation-point circle radius to the contour radius.
pub const DEFAULT_POINT_RATIO: f64 = 4.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SchemeSpec {
    /// Points on a concentric circle; `points` defaults to K, `directions` to
    /// `min(ℓ, r)`, `ratio` to 4/3.
    Concentric {
        #[serde(default)]
        points: Option<usize>,
        #[serde(default)]
        directions: Option<usize>,
        #[serde(default)]
        ratio: Option<f64>,
        #[serde(default = "default_true")]
        hermite: bool,
    },
    /// `count` distinct points, point `p` using direction `p mod directions`.
    Cyclic {
        count: usize,
        #[serde(default)]
        directions: Option<usize>,
        #[serde(default)]
        ratio: Option<f64>,
        #[serde(default = "default_true")]
        hermite: bool,
    },
    Explicit(InterpolationScheme),
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    pub method: Method,
    /// Block count for the moment methods, point count for the multi-point default scheme.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Expansion point for `loewner1`; defaults to `center + 4/3·radius`.
    #[serde(default)]
    pub sigma: Option<c64>,
    #[serde(default)]
    pub scheme: Option<SchemeSpec>,
    #[serde(default = "RankPolicy::quadrature")]
    pub rank: RankPolicy,
    /// Markov parameters in `(z − c)/ρ` rather than `z`.
    #[serde(default = "default_true")]
    pub scaled_moments: bool,
    #[serde(default)]
    pub keep_outside: bool,
    #[serde(default)]
    pub left_eigenvectors: bool,
}

fn default_k() -> usize {
    1
}

impl MethodParams {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            k: 1,
            sigma: None,
            scheme: None,
            rank: RankPolicy::quadrature(),
            scaled_moments: true,
            keep_outside: false,
            left_eigenvectors: false,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_sigma(mut self, sigma: c64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_scheme(mut self, scheme: SchemeSpec) -> Self {
        self.scheme = Some(scheme);
        self
    }

    pub fn with_rank(mut self, rank: RankPolicy) -> Self {
        self.rank = rank;
        self
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            left_eigenvectors: self.left_eigenvectors,
        }
    }

    /// Resolves the interpolation scheme against a contour and probe counts.
    pub fn resolve_scheme(
        &self,
        contour: &ContourQuadrature,
        ell: usize,
        r: usize,
    ) -> Result<InterpolationScheme> {
        let direct = self.method == Method::Direct;
        let spec = self.scheme.clone().unwrap_or(SchemeSpec::Concentric {
            points: None,
            directions: None,
            ratio: None,
            hermite: !direct,
        });
        match spec {
            SchemeSpec::Explicit(s) => Ok(s),
            SchemeSpec::Cyclic {
                count,
                directions,
                ratio,
                hermite,
            } => InterpolationScheme::cyclic(
                contour,
                count,
                directions.unwrap_or(ell.min(r)),
                ratio.unwrap_or(DEFAULT_POINT_RATIO),
                hermite,
            ),
            SchemeSpec::Concentric {
                points,
                directions,
                ratio,
                hermite,
            } => InterpolationScheme::concentric(
                contour,
                points.unwrap_or(self.k),
                directions.unwrap_or(ell.min(r)),
                ratio.unwrap_or(DEFAULT_POINT_RATIO),
                hermite,
            ),
        }
    }
}

/// Runs a contour method on precomputed tensors. `problem` supplies residuals.
pub fn solve_with_data(
    problem: Option<&dyn NlevpProblem>,
    data: &QuadratureDataTensors,
    params: &MethodParams,
) -> Result<EigenSolution> {
    if params.k == 0 {
        return invalid("K must be at least 1");
    }
    let contour = &data.contour;
    let sol = match params.method {
        Method::Hankel => {
            let kmax = 2 * params.k - 1;
            let moments = if params.scaled_moments {
                markov_moments_scaled(data, kmax, contour.center(), contour.scale())?
            } else {
                markov_moments(data, kmax)
            };
            let (pair, one) = build_hankel(&moments, params.k)?;
            solve_hankel(problem, &pair, &one, &params.rank, &params.options())?
        }
        Method::Loewner1 => {
            let sigma = params.sigma.unwrap_or_else(|| contour.default_sigma());
            let moments = sigma_moments(data, sigma, 2 * params.k - 1)?;
            let pencil = build_single_point_pencil(&moments, params.k)?;
            let mut sol = solve_single_point(problem, &pencil, &params.rank, &params.options())?;
            sol.warnings.extend(moments.warnings);
            sol
        }
        Method::LoewnerN => {
            let scheme = params.resolve_scheme(contour, data.ell(), data.r_count())?;
            let loewner = build_multipoint_from_data(data, &scheme)?;
            solve_multipoint(problem, &loewner, &params.rank, &params.options())?
        }
        Method::Direct => return invalid("the direct method does not use quadrature data"),
    };
    Ok(filter_eigenvalues_to_domain(
        &sol,
        contour,
        params.keep_outside,
    ))
}

/// Computes the tensors (unless the method is direct) and solves.
pub fn solve(
    problem: &dyn NlevpProblem,
    contour: &ContourQuadrature,
    probes: &ProbingConfig,
    params: &MethodParams,
) -> Result<EigenSolution> {
    if params.k == 0 {
        return invalid("K must be at least 1");
    }
    if params.method == Method::Direct {
        let scheme = params.resolve_scheme(contour, probes.ell(), probes.r_count())?;
        let out = direct_resolvent_pencil(problem, &scheme, probes)?;
        return Ok(filter_eigenvalues_to_domain(
            &out.solution,
            contour,
            params.keep_outside,
        ));
    }
    let data = compute_quadrature_data(problem, contour, probes)?;
    solve_with_data(Some(problem), &data, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// σ for single-point sweeps, the point-circle ratio for multi-point sweeps, N for N-sweeps.
    pub value: c64,
    pub skipped: bool,
    pub rank: usize,
    pub count: usize,
    pub max_residual: f64,
    #[serde(default)]
    pub note: Option<String>,
}

impl SweepRow {
    fn skipped(value: c64, note: String) -> Self {
        Self {
            value,
            skipped: true,
            rank: 0,
            count: 0,
            max_residual: f64::NAN,
            note: Some(note),
        }
    }

    fn from_solution(value: c64, sol: &EigenSolution) -> Self {
        Self {
            value,
            skipped: false,
            rank: sol.rank_used,
            count: sol.len(),
            max_residual: sol.max_residual(),
            note: None,
        }
    }
}

/// Single-point sweep over σ values on one set of tensors; points inside the closed
/// region or on a node are reported as skipped rows.
pub fn sweep_sigma(
    problem: Option<&dyn NlevpProblem>,
    data: &QuadratureDataTensors,
    params: &MethodParams,
    sigmas: &[c64],
) -> Vec<SweepRow> {
    sigmas
        .iter()
        .map(|&s| {
            if data.contour.membership(s) != Membership::Outside {
                return SweepRow::skipped(s, "point not outside the contour".into());
            }
            let p = MethodParams {
                method: Method::Loewner1,
                sigma: Some(s),
                ..params.clone()
            };
            match solve_with_data(problem, data, &p) {
                Ok(sol) => SweepRow::from_solution(s, &sol),
                Err(e) => SweepRow::skipped(s, e.to_string()),
            }
        })
        .collect()
}

/// Multi-point sweep over the point-circle radius ratio; ratios ≤ 1 are skipped.
pub fn sweep_ratio(
    problem: Option<&dyn NlevpProblem>,
    data: &QuadratureDataTensors,
    params: &MethodParams,
    ratios: &[f64],
) -> Vec<SweepRow> {
    let (points, directions, hermite) = match &params.scheme {
        Some(SchemeSpec::Concentric {
            points,
            directions,
            hermite,
            ..
        }) => (*points, *directions, *hermite),
        _ => (None, None, true),
    };
    ratios
        .iter()
        .map(|&ratio| {
            let v = c64::new(ratio, 0.0);
            if ratio <= 1.0 {
                return SweepRow::skipped(v, "point circle not outside the contour".into());
            }
            let p = MethodParams {
                method: Method::LoewnerN,
                scheme: Some(SchemeSpec::Concentric {
                    points,
                    directions,
                    ratio: Some(ratio),
                    hermite,
                }),
                ..params.clone()
            };
            match solve_with_data(problem, data, &p) {
                Ok(sol) => SweepRow::from_solution(v, &sol),
                Err(e) => SweepRow::skipped(v, e.to_string()),
            }
        })
        .collect()
}

/// Convergence study over node counts; tensors are recomputed per N.
pub fn sweep_nodes(
    problem: &dyn NlevpProblem,
    kind: &ContourKind,
    probes: &ProbingConfig,
    params: &MethodParams,
    ns: &[usize],
) -> Vec<SweepRow> {
    ns.iter()
        .map(|&n| {
            let v = c64::new(n as f64, 0.0);
            let run =
                build_contour(kind.clone(), n).and_then(|q| solve(problem, &q, probes, params));
            match run {
                Ok(sol) => SweepRow::from_solution(v, &sol),
                Err(e) => SweepRow::skipped(v, e.to_string()),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbingSpec {
    pub ell: usize,
    pub r: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SweepSpec {
    Sigma { values: Vec<c64> },
    Ratio { values: Vec<f64> },
    Nodes { values: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FilterSpec {
    /// `count` points on the segment from `start` to `end`.
    Line {
        kind: crate::filters::FilterKind,
        start: c64,
        end: c64,
        count: usize,
    },
    Points {
        kind: crate::filters::FilterKind,
        points: Vec<c64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalSpec {
    /// Matrix Market files for `A`, `B`, `C`.
    pub a: String,
    pub b: String,
    pub c: String,
}

/// One-file run description. Relative paths resolve against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: Option<ProblemSpec>,
    pub contour: ContourKind,
    #[serde(default = "default_nodes")]
    pub n: usize,
    #[serde(default)]
    pub probing: Option<ProbingSpec>,
    #[serde(flatten)]
    pub params: MethodParams,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub filter: Option<FilterSpec>,
    #[serde(default)]
    pub modal: Option<ModalSpec>,
}

fn default_nodes() -> usize {
    64
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn contour_quadrature(&self) -> Result<ContourQuadrature> {
        build_contour(self.contour.clone(), self.n)
    }

    /// Probing matrices for an `n_out × n_in` operator; defaults to `ℓ = r = 1`, seed 0.
    pub fn probes(&self, n_out: usize, n_in: usize) -> Result<ProbingConfig> {
        let p = self.probing.clone().unwrap_or(ProbingSpec {
            ell: 1,
            r: 1,
            seed: 0,
        });
        ProbingConfig::random_rect(n_out, n_in, p.ell, p.r, p.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_planted_problem, PlantedSpec, Spectrum};

    fn planted() -> crate::problems::PlantedProblem {
        let mut spec = PlantedSpec::standard(8, 2, 5);
        spec.spectrum = Spectrum::Given {
            values: vec![c64::new(0.5, 0.0), c64::new(0.0, -0.3)],
        };
        make_planted_problem(spec).unwrap()
    }

    #[test]
    fn all_methods_agree_on_planted_pair() {
        let p = planted();
        let q = ContourQuadrature::circle(c64::new(0.0, 0.0), 1.0, 128).unwrap();
        let probes = ProbingConfig::random(8, 2, 2, 11).unwrap();
        let expected = [c64::new(0.0, -0.3), c64::new(0.5, 0.0)];
        for m in [Method::Hankel, Method::Loewner1, Method::LoewnerN] {
            let sol = solve(&p, &q, &probes, &MethodParams::new(m)).unwrap();
            assert_eq!(sol.len(), 2, "{m:?}");
            for (a, b) in sol.eigenvalues.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-8, "{m:?}: {a} vs {b}");
            }
            assert!(sol.max_residual() < 1e-8);
        }
    }

    #[test]
    fn sigma_sweep_skips_interior_points() {
        let p = planted();
        let q = ContourQuadrature::circle(c64::new(0.0, 0.0), 1.0, 64).unwrap();
        let probes = ProbingConfig::random(8, 2, 2, 11).unwrap();
        let data = compute_quadrature_data(&p, &q, &probes).unwrap();
        let rows = sweep_sigma(
            Some(&p),
            &data,
            &MethodParams::new(Method::Loewner1),
            &[c64::new(1.5, 0.0), c64::new(0.2, 0.0), c64::new(0.0, 2.0)],
        );
        assert_eq!(rows.len(), 3);
        assert!(!rows[0].skipped && rows[1].skipped && !rows[2].skipped);
        assert!(rows[0].max_residual < 1e-8 && rows[2].max_residual < 1e-8);
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{
            "problem": {"type": "delay"},
            "contour": {"type": "circle", "center": [-0.0625, 0.0], "radius": 0.07},
            "n": 32,
            "probing": {"ell": 11, "r": 11, "seed": 1},
            "method": "hankel",
            "k": 5
        }"#;
        let cfg = RunConfig::from_json_str(json).unwrap();
        assert_eq!(cfg.params.k, 5);
        assert_eq!(cfg.params.method, Method::Hankel);
        assert!(cfg.params.scaled_moments);
        let again = RunConfig::from_json_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }
}
