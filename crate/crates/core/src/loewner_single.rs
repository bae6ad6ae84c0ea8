//! Single-point Loewner eigensolver on moments at an exterior point σ.

use faer::MatRef;
use num_complex::Complex64 as c64;

use crate::error::{invalid, Result};
use crate::hankel::{block_hankel, one_sided, OneSidedData};
use crate::linalg::{self, CMat};
use crate::moments::{Expansion, MomentSet};
use crate::problem::NlevpProblem;
use crate::realize::{
    finish_solution, realize, singular_value_report_of, Projection, RankPolicy,
    SingularValueReport, SolveOptions,
};
use crate::residual::{EigenSolution, Method};

#[derive(Clone, Debug)]
pub struct SinglePointPencil {
    pub sigma: c64,
    /// Blocks `L^* M_{i+j+1} R`
    pub lmat: CMat,
    /// Blocks `L^* M_{i+j} R`
    pub l0: CMat,
    /// `σ 𝕃 + 𝕃₀`
    pub ls: CMat,
    pub one_sided: OneSidedData,
    pub k: usize,
}

pub fn build_single_point_pencil(moments: &MomentSet, k: usize) -> Result<SinglePointPencil> {
    if k == 0 {
        return invalid("block count K must be at least 1");
    }
    let Expansion::Sigma(sigma) = moments.expansion else {
        return invalid("single-point pencil needs moments at a finite point σ");
    };
    if moments.two_sided.len() < 2 * k {
        return invalid(format!(
            "K = {k} needs moments up to order {}, have {}",
            2 * k - 1,
            moments.k_max()
        ));
    }
    let lmat = block_hankel(&moments.two_sided, k, 1);
    let l0 = block_hankel(&moments.two_sided, k, 0);
    let mut ls = linalg::scaled(lmat.as_ref(), sigma);
    linalg::axpy(&mut ls, c64::new(1.0, 0.0), l0.as_ref());
    Ok(SinglePointPencil {
        sigma,
        lmat,
        l0,
        ls,
        one_sided: one_sided(moments, k),
        k,
    })
}

pub fn singular_value_report(
    pencil: &SinglePointPencil,
    policy: &RankPolicy,
) -> Result<SingularValueReport> {
    Ok(singular_value_report_of(
        linalg::singular_values(pencil.lmat.as_ref())?,
        policy,
    ))
}

/// `B_σ = Σ^{-1} X^* 𝕃_s Y` with eigenvectors `ℂ Y s_j`.
pub fn solve_single_point(
    problem: Option<&dyn NlevpProblem>,
    pencil: &SinglePointPencil,
    policy: &RankPolicy,
    options: &SolveOptions,
) -> Result<EigenSolution> {
    let real = realize(
        pencil.lmat.as_ref(),
        pencil.ls.as_ref(),
        pencil.one_sided.cdata.as_ref(),
        pencil.one_sided.bdata.as_ref(),
        Projection::Loewner,
        policy,
    )?;
    finish_solution(problem, real, Method::Loewner1, options)
}

/// JSON-friendly dump of the pencil with complex entries as `[re, im]`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PencilDump {
    pub sigma: c64,
    pub k: usize,
    pub lmat: Vec<Vec<c64>>,
    pub l0: Vec<Vec<c64>>,
    pub ls: Vec<Vec<c64>>,
}

impl SinglePointPencil {
    pub fn dump(&self) -> PencilDump {
        let rows = |a: MatRef<'_, c64>| crate::quadrature::matrix_rows(a);
        PencilDump {
            sigma: self.sigma,
            k: self.k,
            lmat: rows(self.lmat.as_ref()),
            l0: rows(self.l0.as_ref()),
            ls: rows(self.ls.as_ref()),
        }
    }
}
