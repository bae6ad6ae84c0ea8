//! Block Hankel eigensolver on Markov parameters.

use faer::Mat;

use crate::error::{invalid, Result};
use crate::linalg::{self, CMat};
use crate::moments::{Expansion, MomentSet};
use crate::problem::NlevpProblem;
use crate::realize::{
    finish_solution, realize, singular_value_report_of, Projection, RankPolicy,
    SingularValueReport, SolveOptions,
};
use crate::residual::{EigenSolution, Method};

#[derive(Clone, Debug)]
pub struct BlockHankelPair {
    /// Blocks `A_{i+j}`, ℓK × rK
    pub h: CMat,
    /// Blocks `A_{i+j+1}`
    pub hs: CMat,
    pub k: usize,
    pub expansion: Expansion,
}

#[derive(Clone, Debug)]
pub struct OneSidedData {
    /// `[L^* M_0; …; L^* M_{K−1}]`, ℓK × n_in
    pub bdata: CMat,
    /// `[M_0 R, …, M_{K−1} R]`, n_out × rK
    pub cdata: CMat,
}

/// Block matrix with block `(i, j)` equal to `blocks[i + j + offset]`.
pub(crate) fn block_hankel(blocks: &[CMat], k: usize, offset: usize) -> CMat {
    let (p, q) = (blocks[0].nrows(), blocks[0].ncols());
    Mat::from_fn(p * k, q * k, |a, b| {
        blocks[a / p + b / q + offset][(a % p, b % q)]
    })
}

pub(crate) fn one_sided(moments: &MomentSet, k: usize) -> OneSidedData {
    OneSidedData {
        bdata: linalg::vstack(&moments.left_blocks[..k]),
        cdata: linalg::hstack(&moments.right_blocks[..k]),
    }
}

pub fn build_hankel(moments: &MomentSet, k: usize) -> Result<(BlockHankelPair, OneSidedData)> {
    if k == 0 {
        return invalid("block count K must be at least 1");
    }
    if !matches!(moments.expansion, Expansion::Infinity { .. }) {
        return invalid("block Hankel assembly needs Markov parameters");
    }
    if moments.two_sided.len() < 2 * k {
        return invalid(format!(
            "K = {k} needs moments up to order {}, have {}",
            2 * k - 1,
            moments.k_max()
        ));
    }
    let pair = BlockHankelPair {
        h: block_hankel(&moments.two_sided, k, 0),
        hs: block_hankel(&moments.two_sided, k, 1),
        k,
        expansion: moments.expansion,
    };
    Ok((pair, one_sided(moments, k)))
}

pub fn singular_value_report(
    pair: &BlockHankelPair,
    policy: &RankPolicy,
) -> Result<SingularValueReport> {
    Ok(singular_value_report_of(
        linalg::singular_values(pair.h.as_ref())?,
        policy,
    ))
}

/// `B = X^* ℍ_s Y Σ^{-1}`; eigenvalues are mapped back from the scaled variable
/// when the moments were taken in one.
pub fn solve_hankel(
    problem: Option<&dyn NlevpProblem>,
    pair: &BlockHankelPair,
    data: &OneSidedData,
    policy: &RankPolicy,
    options: &SolveOptions,
) -> Result<EigenSolution> {
    let mut real = realize(
        pair.h.as_ref(),
        pair.hs.as_ref(),
        data.cdata.as_ref(),
        data.bdata.as_ref(),
        Projection::Hankel,
        policy,
    )?;
    if let Expansion::Infinity { center, scale } = pair.expansion {
        for l in real.eigenvalues.iter_mut() {
            *l = center + scale * *l;
        }
    }
    finish_solution(problem, real, Method::Hankel, options)
}

/// Upper-left `m × m` block of `X̂^* ℍ_s Ŷ Σ̂^+` from the full SVD.
pub fn ho_kalman_matrix(pair: &BlockHankelPair, m: usize) -> Result<CMat> {
    let svd = linalg::ThinSvd::new(pair.h.as_ref())?;
    let xs = linalg::matmul(linalg::adjoint(svd.u.as_ref()).as_ref(), pair.hs.as_ref());
    let xsy = linalg::matmul(xs.as_ref(), svd.v.as_ref());
    let pinv: Vec<f64> = svd
        .s
        .iter()
        .map(|&s| if s > 1e-14 * svd.s[0] { 1.0 / s } else { 0.0 })
        .collect();
    if m > pinv.len() {
        return invalid("requested block larger than the Hankel matrix");
    }
    Ok(Mat::from_fn(m, m, |i, j| xsy[(i, j)] * pinv[j]))
}
