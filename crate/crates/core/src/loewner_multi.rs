//! Multi-point Loewner realization: tangential samples at distinct exterior points,
//! Hermite entries where left and right points coincide, the reduced interpolant,
//! and direct rational approximation of `T(z)^{-1}` without a contour.

use faer::Mat;
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::ContourQuadrature;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat, DenseLu};
use crate::moments::{check_exterior_point, hermite_unchecked, sample_unchecked, Side};
use crate::probing::ProbingConfig;
use crate::problem::NlevpProblem;
use crate::quadrature::QuadratureDataTensors;
use crate::realize::{
    finish_solution, normalize_columns, realize, singular_value_report_of, Projection, RankPolicy,
    SingularValueReport, SolveOptions,
};
use crate::residual::{residual_report, EigenSolution, Method};

/// Left points `θ_i` with direction indices into the left probes, right points `σ_j`
/// with indices into the right probes. The two sides have equal length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationScheme {
    pub theta: Vec<c64>,
    pub left_dirs: Vec<usize>,
    pub sigma: Vec<c64>,
    pub right_dirs: Vec<usize>,
}

impl InterpolationScheme {
    pub fn new(
        theta: Vec<c64>,
        left_dirs: Vec<usize>,
        sigma: Vec<c64>,
        right_dirs: Vec<usize>,
    ) -> Result<Self> {
        if theta.len() != left_dirs.len() || sigma.len() != right_dirs.len() {
            return invalid("each interpolation point needs exactly one direction");
        }
        if theta.len() != sigma.len() {
            return invalid("left and right sides must have the same number of points");
        }
        if theta.is_empty() {
            return invalid("interpolation scheme is empty");
        }
        Ok(Self {
            theta,
            left_dirs,
            sigma,
            right_dirs,
        })
    }

    /// `K` points equally spaced on the circle concentric with the contour at
    /// `ratio × radius`, each carrying directions `0..r_dirs`; entry `p·r_dirs + d`
    /// uses point `p` and direction `d`. With `hermite`, `θ = σ`; otherwise the left
    /// points are rotated by half a step.
    pub fn concentric(
        contour: &ContourQuadrature,
        k_points: usize,
        r_dirs: usize,
        ratio: f64,
        hermite: bool,
    ) -> Result<Self> {
        if k_points == 0 || r_dirs == 0 {
            return invalid("need at least one point and one direction");
        }
        if !(ratio > 1.0) {
            return invalid(format!("point circle ratio must exceed 1, got {ratio}"));
        }
        let c = contour.center();
        let rho = ratio * contour.scale();
        let step = 2.0 * std::f64::consts::PI / k_points as f64;
        let pt = |p: usize, phase: f64| c + c64::from_polar(rho, step * p as f64 + phase);
        let mut theta = Vec::new();
        let mut sigma = Vec::new();
        let mut dirs = Vec::new();
        for p in 0..k_points {
            for d in 0..r_dirs {
                sigma.push(pt(p, 0.0));
                theta.push(if hermite {
                    pt(p, 0.0)
                } else {
                    pt(p, 0.5 * step)
                });
                dirs.push(d);
            }
        }
        Self::new(theta, dirs.clone(), sigma, dirs)
    }

    /// `count` points equally spaced on the concentric circle at `ratio × radius`,
    /// point `p` using direction `p mod r_dirs`.
    pub fn cyclic(
        contour: &ContourQuadrature,
        count: usize,
        r_dirs: usize,
        ratio: f64,
        hermite: bool,
    ) -> Result<Self> {
        if count == 0 || r_dirs == 0 {
            return invalid("need at least one point and one direction");
        }
        if !(ratio > 1.0) {
            return invalid(format!("point circle ratio must exceed 1, got {ratio}"));
        }
        let c = contour.center();
        let rho = ratio * contour.scale();
        let step = 2.0 * std::f64::consts::PI / count as f64;
        let sigma: Vec<c64> = (0..count)
            .map(|p| c + c64::from_polar(rho, step * p as f64))
            .collect();
        let theta: Vec<c64> = if hermite {
            sigma.clone()
        } else {
            (0..count)
                .map(|p| c + c64::from_polar(rho, step * (p as f64 + 0.5)))
                .collect()
        };
        let dirs: Vec<usize> = (0..count).map(|p| p % r_dirs).collect();
        Self::new(theta, dirs.clone(), sigma, dirs)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// All `(i, j)` with `θ_i = σ_j`.
    pub fn hermite_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, t) in self.theta.iter().enumerate() {
            for (j, s) in self.sigma.iter().enumerate() {
                if t == s {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Source of tangential samples of a transfer function `H`.
pub trait TangentialSampler: Sync {
    fn n_in(&self) -> usize;
    fn n_out(&self) -> usize;
    fn n_left_dirs(&self) -> usize;
    fn n_right_dirs(&self) -> usize;
    /// `ℓ_a`, length n_out
    fn left_direction(&self, a: usize) -> Vec<c64>;
    /// `r_b`, length n_in
    fn right_direction(&self, b: usize) -> Vec<c64>;
    /// `ℓ_a^* H(θ)`, length n_in
    fn left(&self, theta: c64, a: usize) -> Result<Vec<c64>>;
    /// `H(σ) r_b`, length n_out
    fn right(&self, sigma: c64, b: usize) -> Result<Vec<c64>>;
    /// `ℓ_a^* H'(σ) r_b`
    fn derivative(&self, sigma: c64, a: usize, b: usize) -> Result<c64>;
    /// Validates a point and optionally returns a warning.
    fn check_point(&self, _z: c64) -> Result<Option<String>> {
        Ok(None)
    }
}

/// Samples by contour quadrature on precomputed tensors.
pub struct QuadratureSampler<'a> {
    pub data: &'a QuadratureDataTensors,
}

impl<'a> QuadratureSampler<'a> {
    pub fn new(data: &'a QuadratureDataTensors) -> Self {
        Self { data }
    }
}

impl TangentialSampler for QuadratureSampler<'_> {
    fn n_in(&self) -> usize {
        self.data.n_in()
    }
    fn n_out(&self) -> usize {
        self.data.n_out()
    }
    fn n_left_dirs(&self) -> usize {
        self.data.ell()
    }
    fn n_right_dirs(&self) -> usize {
        self.data.r_count()
    }
    fn left_direction(&self, a: usize) -> Vec<c64> {
        linalg::column(self.data.probes.l.as_ref(), a)
    }
    fn right_direction(&self, b: usize) -> Vec<c64> {
        linalg::column(self.data.probes.r.as_ref(), b)
    }
    fn left(&self, theta: c64, a: usize) -> Result<Vec<c64>> {
        Ok(sample_unchecked(self.data, theta, Side::Left, a))
    }
    fn right(&self, sigma: c64, b: usize) -> Result<Vec<c64>> {
        Ok(sample_unchecked(self.data, sigma, Side::Right, b))
    }
    fn derivative(&self, sigma: c64, a: usize, b: usize) -> Result<c64> {
        Ok(hermite_unchecked(self.data, sigma, a, b))
    }
    fn check_point(&self, z: c64) -> Result<Option<String>> {
        check_exterior_point(&self.data.contour, z)
    }
}

type MatFn<'a> = Box<dyn Fn(c64) -> CMat + Send + Sync + 'a>;

/// Samples of a dense evaluator `H(z)` (and optionally `H'(z)`), e.g. closed-form oracles.
pub struct FunctionSampler<'a> {
    h: MatFn<'a>,
    dh: Option<MatFn<'a>>,
    probes: ProbingConfig,
}

impl<'a> FunctionSampler<'a> {
    pub fn new(
        h: impl Fn(c64) -> CMat + Send + Sync + 'a,
        dh: Option<Box<dyn Fn(c64) -> CMat + Send + Sync + 'a>>,
        probes: ProbingConfig,
    ) -> Self {
        Self {
            h: Box::new(h),
            dh,
            probes,
        }
    }
}

impl TangentialSampler for FunctionSampler<'_> {
    fn n_in(&self) -> usize {
        self.probes.n_in()
    }
    fn n_out(&self) -> usize {
        self.probes.n_out()
    }
    fn n_left_dirs(&self) -> usize {
        self.probes.ell()
    }
    fn n_right_dirs(&self) -> usize {
        self.probes.r_count()
    }
    fn left_direction(&self, a: usize) -> Vec<c64> {
        linalg::column(self.probes.l.as_ref(), a)
    }
    fn right_direction(&self, b: usize) -> Vec<c64> {
        linalg::column(self.probes.r.as_ref(), b)
    }
    fn left(&self, theta: c64, a: usize) -> Result<Vec<c64>> {
        let h = (self.h)(theta);
        let l = self.left_direction(a);
        Ok((0..h.ncols())
            .map(|j| (0..h.nrows()).map(|i| l[i].conj() * h[(i, j)]).sum())
            .collect())
    }
    fn right(&self, sigma: c64, b: usize) -> Result<Vec<c64>> {
        let h = (self.h)(sigma);
        let r = self.right_direction(b);
        Ok((0..h.nrows())
            .map(|i| (0..h.ncols()).map(|j| h[(i, j)] * r[j]).sum())
            .collect())
    }
    fn derivative(&self, sigma: c64, a: usize, b: usize) -> Result<c64> {
        let dh = self.dh.as_ref().ok_or_else(|| {
            Error::InvalidArgument("sampler has no derivative; Hermite data unavailable".into())
        })?;
        let d = dh(sigma);
        let l = self.left_direction(a);
        let r = self.right_direction(b);
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                acc += l[i].conj() * d[(i, j)] * r[j];
            }
        }
        Ok(acc)
    }
}

/// Samples of `T(z)^{-1}` itself through the problem's solves.
pub struct DirectSampler<'a> {
    pub problem: &'a dyn NlevpProblem,
    pub probes: &'a ProbingConfig,
}

impl TangentialSampler for DirectSampler<'_> {
    fn n_in(&self) -> usize {
        self.problem.dim()
    }
    fn n_out(&self) -> usize {
        self.problem.dim()
    }
    fn n_left_dirs(&self) -> usize {
        self.probes.ell()
    }
    fn n_right_dirs(&self) -> usize {
        self.probes.r_count()
    }
    fn left_direction(&self, a: usize) -> Vec<c64> {
        linalg::column(self.probes.l.as_ref(), a)
    }
    fn right_direction(&self, b: usize) -> Vec<c64> {
        linalg::column(self.probes.r.as_ref(), b)
    }
    fn left(&self, theta: c64, a: usize) -> Result<Vec<c64>> {
        let l = linalg::row_matrix(
            &self
                .left_direction(a)
                .iter()
                .map(|x| x.conj())
                .collect::<Vec<_>>(),
        );
        let x = self
            .problem
            .solve_left(theta, l.as_ref())
            .map_err(|_| Error::PointSingular { point: theta })?;
        Ok(linalg::row(x.as_ref(), 0))
    }
    fn right(&self, sigma: c64, b: usize) -> Result<Vec<c64>> {
        let r = linalg::col_matrix(&self.right_direction(b));
        let x = self
            .problem
            .solve(sigma, r.as_ref())
            .map_err(|_| Error::PointSingular { point: sigma })?;
        Ok(linalg::column(x.as_ref(), 0))
    }
    fn derivative(&self, _sigma: c64, _a: usize, _b: usize) -> Result<c64> {
        invalid("direct sampling does not provide Hermite data; use distinct left and right points")
    }
}

#[derive(Clone, Debug)]
pub struct MultiPointLoewner {
    pub lmat: CMat,
    pub ls: CMat,
    /// Rows `ld_i^* = ℓ_i^* H(θ_i)`, r × n_in
    pub ldm: CMat,
    /// Columns `rd_j = H(σ_j) r_j`, n_out × r
    pub rdm: CMat,
    /// Selected left directions as columns, n_out × r
    pub left_dirs: CMat,
    /// Selected right directions as columns, n_in × r
    pub right_dirs: CMat,
    pub scheme: InterpolationScheme,
    pub warnings: Vec<String>,
}

pub fn build_multipoint(
    sampler: &dyn TangentialSampler,
    scheme: &InterpolationScheme,
) -> Result<MultiPointLoewner> {
    let r = scheme.len();
    for (&a, &b) in scheme.left_dirs.iter().zip(&scheme.right_dirs) {
        if a >= sampler.n_left_dirs() || b >= sampler.n_right_dirs() {
            return invalid(format!("direction index out of range ({a}, {b})"));
        }
    }
    let mut warnings = Vec::new();
    for &z in scheme.theta.iter().chain(&scheme.sigma) {
        if let Some(w) = sampler.check_point(z)? {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
    }
    let left: Vec<Vec<c64>> = (0..r)
        .into_par_iter()
        .map(|i| sampler.left(scheme.theta[i], scheme.left_dirs[i]))
        .collect::<Result<_>>()?;
    let right: Vec<Vec<c64>> = (0..r)
        .into_par_iter()
        .map(|j| sampler.right(scheme.sigma[j], scheme.right_dirs[j]))
        .collect::<Result<_>>()?;
    let ldirs: Vec<Vec<c64>> = scheme
        .left_dirs
        .iter()
        .map(|&a| sampler.left_direction(a))
        .collect();
    let rdirs: Vec<Vec<c64>> = scheme
        .right_dirs
        .iter()
        .map(|&b| sampler.right_direction(b))
        .collect();

    let hermite = scheme.hermite_pairs();
    let derivs: Vec<((usize, usize), c64)> = hermite
        .par_iter()
        .map(|&(i, j)| {
            sampler
                .derivative(scheme.sigma[j], scheme.left_dirs[i], scheme.right_dirs[j])
                .map(|d| ((i, j), d))
        })
        .collect::<Result<_>>()?;

    let mut lmat = Mat::zeros(r, r);
    let mut ls = Mat::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            let (t, s) = (scheme.theta[i], scheme.sigma[j]);
            // ℓ_i^* rd_j
            let lrd: c64 = ldirs[i]
                .iter()
                .zip(&right[j])
                .map(|(l, x)| l.conj() * x)
                .sum();
            if t == s {
                let d = derivs
                    .iter()
                    .find(|(p, _)| *p == (i, j))
                    .map(|(_, d)| *d)
                    .expect("hermite entry");
                lmat[(i, j)] = d;
                ls[(i, j)] = s * d + lrd;
            } else {
                // ld_i^* r_j
                let ldr: c64 = left[i].iter().zip(&rdirs[j]).map(|(x, r)| x * r).sum();
                lmat[(i, j)] = (ldr - lrd) / (t - s);
                ls[(i, j)] = (t * ldr - s * lrd) / (t - s);
            }
        }
    }
    Ok(MultiPointLoewner {
        lmat,
        ls,
        ldm: linalg::from_rows(&left),
        rdm: Mat::from_fn(sampler.n_out(), r, |i, j| right[j][i]),
        left_dirs: Mat::from_fn(sampler.n_out(), r, |i, j| ldirs[j][i]),
        right_dirs: Mat::from_fn(sampler.n_in(), r, |i, j| rdirs[j][i]),
        scheme: scheme.clone(),
        warnings,
    })
}

/// Multi-point pencil from contour quadrature data.
pub fn build_multipoint_from_data(
    data: &QuadratureDataTensors,
    scheme: &InterpolationScheme,
) -> Result<MultiPointLoewner> {
    build_multipoint(&QuadratureSampler::new(data), scheme)
}

impl MultiPointLoewner {
    /// Relative residuals of `𝕃_s − 𝕃 diag(σ) = 𝕐 R` and `𝕃_s − diag(θ) 𝕃 = L^* ℤ`.
    pub fn sylvester_residuals(&self) -> (f64, f64) {
        let r = self.scheme.len();
        let ls_norm = linalg::fro_norm(self.ls.as_ref()).max(f64::MIN_POSITIVE);
        let yr = linalg::matmul(self.ldm.as_ref(), self.right_dirs.as_ref());
        let lz = linalg::matmul(
            linalg::adjoint(self.left_dirs.as_ref()).as_ref(),
            self.rdm.as_ref(),
        );
        let e1 = Mat::from_fn(r, r, |i, j| {
            self.ls[(i, j)] - self.lmat[(i, j)] * self.scheme.sigma[j] - yr[(i, j)]
        });
        let e2 = Mat::from_fn(r, r, |i, j| {
            self.ls[(i, j)] - self.scheme.theta[i] * self.lmat[(i, j)] - lz[(i, j)]
        });
        (
            linalg::fro_norm(e1.as_ref()) / ls_norm,
            linalg::fro_norm(e2.as_ref()) / ls_norm,
        )
    }

    pub fn singular_value_report(&self, policy: &RankPolicy) -> Result<SingularValueReport> {
        Ok(singular_value_report_of(
            linalg::singular_values(self.lmat.as_ref())?,
            policy,
        ))
    }
}

/// `B = Σ^{-1} X^* 𝕃_s Y` with eigenvectors `ℤ Y s_j`.
pub fn solve_multipoint(
    problem: Option<&dyn NlevpProblem>,
    loewner: &MultiPointLoewner,
    policy: &RankPolicy,
    options: &SolveOptions,
) -> Result<EigenSolution> {
    let real = realize(
        loewner.lmat.as_ref(),
        loewner.ls.as_ref(),
        loewner.rdm.as_ref(),
        loewner.ldm.as_ref(),
        Projection::Loewner,
        policy,
    )?;
    let mut sol = finish_solution(problem, real, Method::LoewnerN, options)?;
    sol.warnings.extend(loewner.warnings.iter().cloned());
    Ok(sol)
}

/// Rational evaluator `G(z) = C (A − z E)^{-1} B`.
#[derive(Clone, Debug)]
pub struct InterpolantRom {
    pub c: CMat,
    pub a: CMat,
    pub e: CMat,
    pub b: CMat,
    pub truncated: bool,
}

/// Without a policy, the full-rank form `ℤ (𝕃_s − z𝕃)^{-1} 𝕐`; with one,
/// `(ℤY)(X^*𝕃_sY − zΣ)^{-1}(X^*𝕐)` at the selected rank.
pub fn build_interpolant_rom(
    loewner: &MultiPointLoewner,
    policy: Option<&RankPolicy>,
) -> Result<InterpolantRom> {
    match policy {
        None => Ok(InterpolantRom {
            c: loewner.rdm.clone(),
            a: loewner.ls.clone(),
            e: loewner.lmat.clone(),
            b: loewner.ldm.clone(),
            truncated: false,
        }),
        Some(p) => {
            let svd = linalg::ThinSvd::new(loewner.lmat.as_ref())?;
            let k = p.select(&svd.s);
            if k == 0 {
                return invalid("Loewner matrix has numerical rank 0");
            }
            let (x, s, y) = svd.truncate(k);
            let xa = linalg::adjoint(x.as_ref());
            let a = linalg::matmul(
                linalg::matmul(xa.as_ref(), loewner.ls.as_ref()).as_ref(),
                y.as_ref(),
            );
            Ok(InterpolantRom {
                c: linalg::matmul(loewner.rdm.as_ref(), y.as_ref()),
                a,
                e: linalg::from_diag(&s.iter().map(|&v| c64::new(v, 0.0)).collect::<Vec<_>>()),
                b: linalg::matmul(xa.as_ref(), loewner.ldm.as_ref()),
                truncated: true,
            })
        }
    }
}

/// Pole-residue form `Σ_j c_j b_j^* / (z − λ_j)` with `‖b_j‖ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleResidue {
    pub poles: Vec<c64>,
    pub c: Vec<Vec<c64>>,
    pub b: Vec<Vec<c64>>,
}

impl PoleResidue {
    pub fn eval(&self, z: c64) -> CMat {
        let n_out = self.c.first().map_or(0, |c| c.len());
        let n_in = self.b.first().map_or(0, |b| b.len());
        let mut g = Mat::zeros(n_out, n_in);
        for (j, &l) in self.poles.iter().enumerate() {
            let f = 1.0 / (z - l);
            for r in 0..n_out {
                for s in 0..n_in {
                    g[(r, s)] += f * self.c[j][r] * self.b[j][s].conj();
                }
            }
        }
        g
    }
}

impl InterpolantRom {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    fn pencil_lu(&self, z: c64) -> Result<DenseLu> {
        let m = linalg::sub(self.a.as_ref(), linalg::scaled(self.e.as_ref(), z).as_ref());
        let lu = DenseLu::new(m.as_ref()).map_err(|_| Error::Pole { z })?;
        if lu.is_singular() {
            return Err(Error::Pole { z });
        }
        Ok(lu)
    }

    pub fn eval(&self, z: c64) -> Result<CMat> {
        let x = self.pencil_lu(z)?.solve(self.b.as_ref());
        Ok(linalg::matmul(self.c.as_ref(), x.as_ref()))
    }

    /// `G'(z) = C (A − zE)^{-1} E (A − zE)^{-1} B`
    pub fn derivative(&self, z: c64) -> Result<CMat> {
        let lu = self.pencil_lu(z)?;
        let x = lu.solve(self.b.as_ref());
        let ex = linalg::matmul(self.e.as_ref(), x.as_ref());
        let y = lu.solve(ex.as_ref());
        Ok(linalg::matmul(self.c.as_ref(), y.as_ref()))
    }

    /// Finite eigenvalues of the pencil `(A, E)`.
    pub fn poles(&self) -> Result<Vec<c64>> {
        let (alpha, beta, _) = linalg::generalized_eig(self.a.as_ref(), self.e.as_ref())?;
        let (finite, _) = finite_ratios(&alpha, &beta);
        let vals: Vec<c64> = finite.iter().map(|&i| alpha[i] / beta[i]).collect();
        let order = linalg::eig_order(&vals);
        Ok(order.iter().map(|&i| vals[i]).collect())
    }

    /// Rank-one residue factors; requires `E` invertible.
    pub fn pole_residue(&self) -> Result<PoleResidue> {
        let lu = DenseLu::new(self.e.as_ref())?;
        if lu.is_singular() {
            return invalid("pencil matrix E is singular; truncate the interpolant first");
        }
        let bt = lu.solve(self.a.as_ref());
        let (vals, vecs) = linalg::eig(bt.as_ref())?;
        let order = linalg::eig_order(&vals);
        let s = linalg::select_columns(vecs.as_ref(), &order);
        let poles: Vec<c64> = order.iter().map(|&i| vals[i]).collect();
        let cs = linalg::matmul(self.c.as_ref(), s.as_ref());
        let eb = lu.solve(self.b.as_ref());
        let rows = DenseLu::new(s.as_ref())?.solve(eb.as_ref());
        let mut c = Vec::with_capacity(poles.len());
        let mut b = Vec::with_capacity(poles.len());
        for j in 0..poles.len() {
            // b_j^* = −row_j
            let bj: Vec<c64> = linalg::row(rows.as_ref(), j)
                .iter()
                .map(|x| -x.conj())
                .collect();
            let nb = linalg::vec_norm(&bj);
            let cj: Vec<c64> = linalg::column(cs.as_ref(), j)
                .iter()
                .map(|x| x * nb)
                .collect();
            c.push(cj);
            b.push(bj.iter().map(|x| x / nb).collect());
        }
        Ok(PoleResidue { poles, c, b })
    }
}

fn finite_ratios(alpha: &[c64], beta: &[c64]) -> (Vec<usize>, usize) {
    let scale = alpha
        .iter()
        .chain(beta)
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    let tiny = 1e3 * f64::EPSILON * scale;
    let mut keep = Vec::new();
    for i in 0..alpha.len() {
        let ok = beta[i].norm() > tiny && (alpha[i] / beta[i]).is_finite();
        if ok {
            keep.push(i);
        }
    }
    let dropped = alpha.len() - keep.len();
    (keep, dropped)
}

/// Output of the contour-free rational approximation of `T(z)^{-1}`.
#[derive(Clone, Debug)]
pub struct DirectPencil {
    pub loewner: MultiPointLoewner,
    /// `Â = −𝕃_s`
    pub a_hat: CMat,
    /// `Ê = −𝕃`
    pub e_hat: CMat,
    pub solution: EigenSolution,
}

/// Interpolates `T(z)^{-1}` at the scheme's points directly and reads approximate
/// eigenpairs `(λ, ℤ z)` off the generalized eigenproblem of `(Â, Ê)`.
pub fn direct_resolvent_pencil(
    problem: &dyn NlevpProblem,
    scheme: &InterpolationScheme,
    probes: &ProbingConfig,
) -> Result<DirectPencil> {
    if !scheme.hermite_pairs().is_empty() {
        return invalid("direct rational approximation needs θ_i ≠ σ_j for all pairs");
    }
    if probes.n_in() != problem.dim() || probes.n_out() != problem.dim() {
        return Err(Error::DimensionMismatch(
            "probe rows must equal the problem dimension".into(),
        ));
    }
    let sampler = DirectSampler { problem, probes };
    let loewner = build_multipoint(&sampler, scheme)?;
    let a_hat = linalg::scaled(loewner.ls.as_ref(), c64::new(-1.0, 0.0));
    let e_hat = linalg::scaled(loewner.lmat.as_ref(), c64::new(-1.0, 0.0));
    let (alpha, beta, z) = linalg::generalized_eig(a_hat.as_ref(), e_hat.as_ref())?;
    let (finite, discarded) = finite_ratios(&alpha, &beta);
    let vals: Vec<c64> = finite.iter().map(|&i| alpha[i] / beta[i]).collect();
    let order = linalg::eig_order(&vals);
    let eigenvalues: Vec<c64> = order.iter().map(|&i| vals[i]).collect();
    let cols: Vec<usize> = order.iter().map(|&i| finite[i]).collect();
    let zsel = linalg::select_columns(z.as_ref(), &cols);
    let vecs = linalg::matmul(loewner.rdm.as_ref(), zsel.as_ref());
    let m = eigenvalues.len();
    let mut warnings = loewner.warnings.clone();
    if discarded > 0 {
        warnings.push(format!(
            "{discarded} infinite or indeterminate eigenvalue(s) discarded"
        ));
    }
    let (vectors, residuals, relative) = if m > 0 {
        let rep = residual_report(problem, &eigenvalues, vecs.as_ref())?;
        (rep.eigenvectors, rep.residuals, rep.relative_residuals)
    } else {
        (normalize_columns(vecs.as_ref()), Vec::new(), None)
    };
    let solution = EigenSolution {
        method: Method::Direct,
        eigenvalues,
        right_eigenvectors: vectors,
        left_eigenvectors: None,
        residuals,
        relative_residuals: relative,
        singular_values: linalg::singular_values(loewner.lmat.as_ref())?,
        rank_used: m,
        eigvec_condition: linalg::column_scaled_condition(zsel.as_ref()).unwrap_or(f64::INFINITY),
        warnings,
        boundary_flags: vec![false; m],
        dropped: 0,
        infinite_discarded: discarded,
        approximate: true,
    };
    Ok(DirectPencil {
        loewner,
        a_hat,
        e_hat,
        solution,
    })
}

/// Pole-residue record list for JSON export.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoleResidueJson {
    pub schema: u32,
    pub poles: Vec<c64>,
    pub residues: Vec<ResidueTriplet>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidueTriplet {
    pub pole: c64,
    pub c: Vec<c64>,
    pub b: Vec<c64>,
}

impl From<&PoleResidue> for PoleResidueJson {
    fn from(p: &PoleResidue) -> Self {
        PoleResidueJson {
            schema: 1,
            poles: p.poles.clone(),
            residues: (0..p.poles.len())
                .map(|j| ResidueTriplet {
                    pole: p.poles[j],
                    c: p.c[j].clone(),
                    b: p.b[j].clone(),
                })
                .collect(),
        }
    }
}

impl From<PoleResidueJson> for PoleResidue {
    fn from(j: PoleResidueJson) -> Self {
        PoleResidue {
            poles: j.residues.iter().map(|t| t.pole).collect(),
            c: j.residues.iter().map(|t| t.c.clone()).collect(),
            b: j.residues.iter().map(|t| t.b.clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::CombinedProblem;

    fn scalar_sampler(lambda: f64) -> FunctionSampler<'static> {
        let probes = ProbingConfig::canonical(1, 1, 1).unwrap();
        FunctionSampler::new(
            move |z| Mat::from_fn(1, 1, |_, _| 1.0 / (z - lambda)),
            Some(Box::new(move |z: c64| {
                Mat::from_fn(1, 1, |_, _| -1.0 / ((z - lambda) * (z - lambda)))
            })),
            probes,
        )
    }

    fn pt(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    #[test]
    fn scalar_divided_differences() {
        let s = InterpolationScheme::new(vec![pt(2.0)], vec![0], vec![pt(0.0)], vec![0]).unwrap();
        let l = build_multipoint(&scalar_sampler(1.0), &s).unwrap();
        assert!((l.lmat[(0, 0)] - 1.0).norm() < 1e-15);
        assert!((l.ls[(0, 0)] - 1.0).norm() < 1e-15);
        let sol =
            solve_multipoint(None, &l, &RankPolicy::default(), &SolveOptions::default()).unwrap();
        assert!((sol.eigenvalues[0] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn scalar_hermite_entries() {
        let s = InterpolationScheme::new(vec![pt(2.0)], vec![0], vec![pt(2.0)], vec![0]).unwrap();
        assert_eq!(s.hermite_pairs(), vec![(0, 0)]);
        let l = build_multipoint(&scalar_sampler(1.0), &s).unwrap();
        assert!((l.lmat[(0, 0)] + 1.0).norm() < 1e-15);
        assert!((l.ls[(0, 0)] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn direct_linear_problem_is_exact() {
        let a = linalg::from_diag(&[pt(1.0), pt(3.0)]);
        let p = CombinedProblem::linear(a).unwrap();
        let probes = ProbingConfig::canonical(2, 2, 2).unwrap();
        let s = InterpolationScheme::new(
            vec![pt(5.0), c64::new(0.0, 4.0)],
            vec![0, 1],
            vec![pt(-2.0), c64::new(2.0, -3.0)],
            vec![0, 1],
        )
        .unwrap();
        let d = direct_resolvent_pencil(&p, &s, &probes).unwrap();
        assert!(d.solution.approximate);
        assert_eq!(d.solution.eigenvalues.len(), 2);
        assert!((d.solution.eigenvalues[0] - 1.0).norm() < 1e-12);
        assert!((d.solution.eigenvalues[1] - 3.0).norm() < 1e-12);
        assert!(d.solution.max_residual() < 1e-12);
    }

    #[test]
    fn direct_scalar_pencil_entries() {
        let p = CombinedProblem::scalar_polynomial(&[pt(-1.0), pt(1.0)]).unwrap();
        let probes = ProbingConfig::canonical(1, 1, 1).unwrap();
        let s = InterpolationScheme::new(vec![pt(2.0)], vec![0], vec![pt(0.0)], vec![0]).unwrap();
        let d = direct_resolvent_pencil(&p, &s, &probes).unwrap();
        assert!((d.e_hat[(0, 0)] + 1.0).norm() < 1e-15);
        assert!((d.a_hat[(0, 0)] + 1.0).norm() < 1e-15);
        assert!((d.solution.eigenvalues[0] - 1.0).norm() < 1e-15);
        let h = InterpolationScheme::new(vec![pt(2.0)], vec![0], vec![pt(2.0)], vec![0]).unwrap();
        assert!(direct_resolvent_pencil(&p, &h, &probes).is_err());
    }

    #[test]
    fn concentric_scheme_layout() {
        let q = ContourQuadrature::circle(pt(1.0), 2.0, 16).unwrap();
        let s = InterpolationScheme::concentric(&q, 3, 2, 4.0 / 3.0, true).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.right_dirs, vec![0, 1, 0, 1, 0, 1]);
        assert!(s
            .sigma
            .iter()
            .all(|z| ((z - 1.0).norm() - 8.0 / 3.0).abs() < 1e-14));
        assert_eq!(s.hermite_pairs().len(), 12);
        let n = InterpolationScheme::concentric(&q, 3, 2, 4.0 / 3.0, false).unwrap();
        assert!(n.hermite_pairs().is_empty());
        let c = InterpolationScheme::cyclic(&q, 3, 2, 2.0, true).unwrap();
        assert_eq!(c.left_dirs, vec![0, 1, 0]);
        assert_eq!(c.hermite_pairs(), vec![(0, 0), (1, 1), (2, 2)]);
    }
}
