//! Data-driven modal truncation: contour-filtered transfer-function samples feed the
//! multi-point Loewner pencil, whose realization retains only the enclosed poles.

use std::path::Path;

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::contour::{ContourQuadrature, Membership};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat, DenseLu};
use crate::loewner_multi::{
    build_interpolant_rom, build_multipoint_from_data, InterpolationScheme, MultiPointLoewner,
    PoleResidue,
};
use crate::probing::{complex_gaussian, ProbingConfig};
use crate::problems::read_matrix_market_file;
use crate::quadrature::QuadratureDataTensors;
use crate::realize::RankPolicy;

type TransferFn<'a> = Box<dyn Fn(c64) -> Result<CMat> + Send + Sync + 'a>;

/// `G(z) = C (zI − A)^{-1} B`, or any black-box evaluator of an n_out × n_in transfer function.
pub enum LtiTransferSource<'a> {
    StateSpace {
        a: CMat,
        b: CMat,
        c: CMat,
    },
    BlackBox {
        n_out: usize,
        n_in: usize,
        eval: TransferFn<'a>,
    },
}

impl<'a> LtiTransferSource<'a> {
    pub fn state_space(a: CMat, b: CMat, c: CMat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}×{}, B is {}×{}, C is {}×{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Self::StateSpace { a, b, c })
    }

    pub fn black_box(
        n_out: usize,
        n_in: usize,
        eval: impl Fn(c64) -> Result<CMat> + Send + Sync + 'a,
    ) -> Self {
        Self::BlackBox {
            n_out,
            n_in,
            eval: Box::new(eval),
        }
    }

    /// Reads `A`, `B`, `C` from Matrix Market files.
    pub fn from_matrix_market(
        a: impl AsRef<Path>,
        b: impl AsRef<Path>,
        c: impl AsRef<Path>,
    ) -> Result<Self> {
        Self::state_space(
            read_matrix_market_file(a)?,
            read_matrix_market_file(b)?,
            read_matrix_market_file(c)?,
        )
    }

    pub fn n_out(&self) -> usize {
        match self {
            Self::StateSpace { c, .. } => c.nrows(),
            Self::BlackBox { n_out, .. } => *n_out,
        }
    }

    pub fn n_in(&self) -> usize {
        match self {
            Self::StateSpace { b, .. } => b.ncols(),
            Self::BlackBox { n_in, .. } => *n_in,
        }
    }

    /// State dimension, i.e. the number of poles, when known.
    pub fn pole_count(&self) -> Option<usize> {
        match self {
            Self::StateSpace { a, .. } => Some(a.nrows()),
            Self::BlackBox { .. } => None,
        }
    }

    pub fn eval(&self, z: c64) -> Result<CMat> {
        let g = match self {
            Self::StateSpace { a, b, c } => {
                let n = a.nrows();
                let m = Mat::from_fn(n, n, |i, j| if i == j { z - a[(i, j)] } else { -a[(i, j)] });
                let lu = DenseLu::new(m.as_ref()).map_err(|_| Error::PointSingular { point: z })?;
                if lu.is_singular_relative(linalg::fro_norm(a.as_ref()) + z.norm()) {
                    return Err(Error::PointSingular { point: z });
                }
                linalg::matmul(c.as_ref(), lu.solve(b.as_ref()).as_ref())
            }
            Self::BlackBox { eval, .. } => eval(z)?,
        };
        if g.nrows() != self.n_out() || g.ncols() != self.n_in() {
            return Err(Error::DimensionMismatch(
                "transfer evaluator returned the wrong shape".into(),
            ));
        }
        Ok(g)
    }
}

/// Tensors of `L^* G(ζ_k)` and `G(ζ_k) R`, and the Loewner pencil built from them.
#[derive(Clone, Debug)]
pub struct RetainedSamples {
    pub data: QuadratureDataTensors,
    pub loewner: MultiPointLoewner,
    pub warnings: Vec<String>,
}

/// Ratio over the median sample magnitude above which a nearby truncated pole is suspected.
pub const SAMPLE_OUTLIER_RATIO: f64 = 1e3;

/// Quadrature of `ℓ_i^* G` and `G r_j` against `1/(θ_i − z)` and `1/(σ_j − z)`, which
/// are tangential samples of the retained part `G_r`.
pub fn sample_retained(
    source: &LtiTransferSource<'_>,
    contour: &ContourQuadrature,
    scheme: &InterpolationScheme,
    probes: &ProbingConfig,
) -> Result<RetainedSamples> {
    if probes.n_out() != source.n_out() || probes.n_in() != source.n_in() {
        return Err(Error::DimensionMismatch(
            "probe rows must match the transfer function shape".into(),
        ));
    }
    let slabs: Vec<(CMat, CMat)> = contour
        .nodes
        .par_iter()
        .enumerate()
        .map(|(k, &z)| {
            let g = source.eval(z).map_err(|e| match e {
                Error::PointSingular { .. } | Error::LinAlg(_) => {
                    Error::NodeSingular { index: k, node: z }
                }
                other => other,
            })?;
            if !linalg::is_finite(g.as_ref()) {
                return Err(Error::NodeSingular { index: k, node: z });
            }
            let ql = linalg::matmul(linalg::adjoint(probes.l.as_ref()).as_ref(), g.as_ref());
            let qr = linalg::matmul(g.as_ref(), probes.r.as_ref());
            Ok((ql, qr))
        })
        .collect::<Result<_>>()?;
    let (ql, qr) = slabs.into_iter().unzip();
    let data = QuadratureDataTensors::from_slabs(contour.clone(), probes.clone(), ql, qr)?;
    let loewner = build_multipoint_from_data(&data, scheme)?;
    let mut warnings = loewner.warnings.clone();
    let mut mags: Vec<f64> = (0..scheme.len())
        .map(|i| linalg::vec_norm(&linalg::row(loewner.ldm.as_ref(), i)))
        .chain(
            (0..scheme.len()).map(|j| linalg::vec_norm(&linalg::column(loewner.rdm.as_ref(), j))),
        )
        .collect();
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    if median > 0.0
        && mags
            .last()
            .is_some_and(|&m| m > SAMPLE_OUTLIER_RATIO * median)
    {
        let msg = format!(
            "a sample exceeds {SAMPLE_OUTLIER_RATIO:.0e} times the median sample magnitude; an interpolation point may be close to a truncated pole"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(RetainedSamples {
        data,
        loewner,
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct ModalRom {
    pub rom: PoleResidue,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Poles whose signed distance places them outside the contour beyond tolerance.
    pub outside: Vec<bool>,
    pub warnings: Vec<String>,
}

impl ModalRom {
    pub fn poles(&self) -> &[c64] {
        &self.rom.poles
    }

    pub fn eval(&self, z: c64) -> CMat {
        self.rom.eval(z)
    }
}

/// Relative clustering threshold for the distinct-pole check.
pub const POLE_CLUSTER_RTOL: f64 = 1e-8;

/// Builds the retained-part Loewner pencil, truncates it by `policy`, and returns
/// the pole-residue form with `‖b_j‖ = 1`.
pub fn modal_truncate(
    source: &LtiTransferSource<'_>,
    contour: &ContourQuadrature,
    scheme: &InterpolationScheme,
    probes: &ProbingConfig,
    policy: &RankPolicy,
) -> Result<ModalRom> {
    let samples = sample_retained(source, contour, scheme, probes)?;
    let mut warnings = samples.warnings;
    let singular_values = linalg::singular_values(samples.loewner.lmat.as_ref())?;
    let rank = policy.select(&singular_values);
    if rank == 0 {
        warnings.push("Loewner matrix has numerical rank 0; no poles retained".into());
        return Ok(ModalRom {
            rom: PoleResidue {
                poles: Vec::new(),
                c: Vec::new(),
                b: Vec::new(),
            },
            singular_values,
            rank,
            outside: Vec::new(),
            warnings,
        });
    }
    if rank == scheme.len() {
        warnings.push(format!(
            "Loewner matrix has full rank {rank}; the scheme may be under-resolved (more retained poles than directions)"
        ));
    }
    if let LtiTransferSource::StateSpace { a, .. } = source {
        let (vals, _) = linalg::eig(a.as_ref())?;
        let m = vals
            .iter()
            .filter(|&&l| contour.membership(l) == Membership::Inside)
            .count();
        if rank < m {
            warnings.push(format!(
                "rank {rank} is below the {m} enclosed poles; the ROM is partial"
            ));
        }
    }
    let rom = build_interpolant_rom(&samples.loewner, Some(policy))?.pole_residue()?;
    let tol = 1e-8 * contour.scale();
    let outside: Vec<bool> = rom
        .poles
        .iter()
        .map(|&p| contour.signed_distance(p) < -tol)
        .collect();
    if outside.iter().any(|&o| o) {
        warnings.push("recovered poles outside the contour were flagged".into());
    }
    let scale = rom
        .poles
        .iter()
        .map(|p| p.norm())
        .fold(contour.scale(), f64::max);
    for i in 0..rom.poles.len() {
        for j in i + 1..rom.poles.len() {
            if (rom.poles[i] - rom.poles[j]).norm() <= POLE_CLUSTER_RTOL * scale {
                warnings.push(format!(
                    "poles {} and {} cluster; repeated poles are not supported",
                    rom.poles[i], rom.poles[j]
                ));
            }
        }
    }
    Ok(ModalRom {
        rom,
        singular_values,
        rank,
        outside,
        warnings,
    })
}

/// Eigendecomposition-based truncation of a state-space system to the poles inside the contour.
pub fn spectral_truncation(
    a: &CMat,
    b: &CMat,
    c: &CMat,
    contour: &ContourQuadrature,
) -> Result<PoleResidue> {
    let (vals, s) = linalg::eig(a.as_ref())?;
    let sib = DenseLu::new(s.as_ref())?.solve(b.as_ref());
    let cs = linalg::matmul(c.as_ref(), s.as_ref());
    let mut keep: Vec<usize> = (0..vals.len())
        .filter(|&i| contour.membership(vals[i]) == Membership::Inside)
        .collect();
    let ordered: Vec<c64> = keep.iter().map(|&i| vals[i]).collect();
    keep = linalg::eig_order(&ordered)
        .into_iter()
        .map(|k| keep[k])
        .collect();
    let mut out = PoleResidue {
        poles: Vec::new(),
        c: Vec::new(),
        b: Vec::new(),
    };
    for &j in &keep {
        let bj: Vec<c64> = linalg::row(sib.as_ref(), j)
            .iter()
            .map(|x| x.conj())
            .collect();
        let nb = linalg::vec_norm(&bj);
        out.poles.push(vals[j]);
        out.c.push(
            linalg::column(cs.as_ref(), j)
                .iter()
                .map(|x| x * nb)
                .collect(),
        );
        out.b.push(bj.iter().map(|x| x / nb).collect());
    }
    Ok(out)
}

/// Random diagonalizable system `A = S diag(poles) S^{-1}` with Gaussian `S`, `B`, `C`.
pub fn random_system(
    poles: &[c64],
    n_in: usize,
    n_out: usize,
    seed: u64,
) -> Result<(CMat, CMat, CMat)> {
    let n = poles.len();
    if n == 0 || n_in == 0 || n_out == 0 {
        return invalid("system dimensions must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = complex_gaussian(&mut rng, n, n);
    let sd = Mat::from_fn(n, n, |i, j| s[(i, j)] * poles[j]);
    let lu = DenseLu::new(s.as_ref())?;
    let a = lu.rsolve(sd.as_ref());
    let b = complex_gaussian(&mut rng, n, n_in);
    let c = complex_gaussian(&mut rng, n_out, n);
    Ok((a, b, c))
}

/// Stable pole set: `inside` poles uniformly in the disk of radius `0.7ρ` around the
/// contour center, the rest at distance between `2ρ` and `6ρ`, all with negative real part.
pub fn random_stable_poles(
    center: c64,
    radius: f64,
    inside: usize,
    total: usize,
    seed: u64,
) -> Result<Vec<c64>> {
    if center.re + radius >= 0.0 {
        return invalid("the retained disk must lie in the open left half-plane");
    }
    if inside > total {
        return invalid("more enclosed poles than poles");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut poles = Vec::with_capacity(total);
    while poles.len() < inside {
        let z = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if z.norm() < 1.0 {
            poles.push(center + 0.7 * radius * z);
        }
    }
    while poles.len() < total {
        let d = rng.random_range(2.0..6.0) * radius;
        let z = center + c64::from_polar(d, rng.random_range(0.0..std::f64::consts::TAU));
        if z.re < 0.0 {
            poles.push(z);
        }
    }
    Ok(poles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    fn two_pole_scalar() -> LtiTransferSource<'static> {
        LtiTransferSource::black_box(1, 1, |z| {
            Ok(Mat::from_fn(1, 1, |_, _| {
                1.0 / (z - 1.0) + 1.0 / (z - 10.0)
            }))
        })
    }

    #[test]
    fn scalar_sample_filters_tail_pole() {
        let q = ContourQuadrature::circle(r(0.0), 2.0, 64).unwrap();
        let probes = ProbingConfig::canonical(1, 1, 1).unwrap();
        let s = InterpolationScheme::new(vec![r(5.0)], vec![0], vec![r(-4.0)], vec![0]).unwrap();
        let out = sample_retained(&two_pole_scalar(), &q, &s, &probes).unwrap();
        assert!((out.loewner.ldm[(0, 0)] - 0.25).norm() < 1e-12);
        assert!((out.loewner.rdm[(0, 0)] + 0.2).norm() < 1e-12);
    }

    #[test]
    fn empty_region_samples_vanish() {
        let q = ContourQuadrature::circle(r(5.0), 1.0, 64).unwrap();
        let probes = ProbingConfig::canonical(1, 1, 1).unwrap();
        let s = InterpolationScheme::new(vec![r(7.0)], vec![0], vec![r(3.0)], vec![0]).unwrap();
        let out = sample_retained(&two_pole_scalar(), &q, &s, &probes).unwrap();
        assert!(out.loewner.ldm[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn diagonal_retains_first_pole() {
        let a = linalg::from_diag(&[r(1.0), r(10.0)]);
        let src =
            LtiTransferSource::state_space(a, linalg::identity(2), linalg::identity(2)).unwrap();
        let q = ContourQuadrature::circle(r(0.0), 2.0, 128).unwrap();
        let probes = ProbingConfig::random(2, 2, 2, 3).unwrap();
        let s = InterpolationScheme::concentric(&q, 2, 2, 4.0 / 3.0, true).unwrap();
        let rom = modal_truncate(&src, &q, &s, &probes, &RankPolicy::default()).unwrap();
        assert_eq!(rom.rank, 1);
        assert!((rom.poles()[0] - 1.0).norm() < 1e-10);
        let res = Mat::from_fn(2, 2, |i, j| rom.rom.c[0][i] * rom.rom.b[0][j].conj());
        let e11 = Mat::from_fn(2, 2, |i, j| r(if i == 0 && j == 0 { 1.0 } else { 0.0 }));
        assert!(linalg::fro_norm(linalg::sub(res.as_ref(), e11.as_ref()).as_ref()) < 1e-10);
        assert!((linalg::vec_norm(&rom.rom.b[0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn state_space_matches_formula() {
        let poles = random_stable_poles(r(-1.0), 0.5, 2, 6, 1).unwrap();
        let (a, b, c) = random_system(&poles, 2, 3, 9).unwrap();
        let src = LtiTransferSource::state_space(a.clone(), b.clone(), c.clone()).unwrap();
        let z = c64::new(0.3, 0.8);
        let g = src.eval(z).unwrap();
        let zi = Mat::from_fn(6, 6, |i, j| if i == j { z - a[(i, j)] } else { -a[(i, j)] });
        let x = faer::linalg::solvers::Solve::solve(&zi.as_ref().full_piv_lu(), b.as_ref());
        let direct = linalg::matmul(c.as_ref(), x.as_ref());
        assert!(
            linalg::fro_norm(linalg::sub(g.as_ref(), direct.as_ref()).as_ref())
                < 1e-10 * linalg::fro_norm(g.as_ref())
        );
    }
}
