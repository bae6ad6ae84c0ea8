//! Contour-integral samplers built on the quadrature tensors: Markov parameters,
//! moments at a finite expansion point, tangential point values and derivatives,
//! and interior samples of the analytic remainder.

use num_complex::Complex64 as c64;

use crate::contour::{ContourQuadrature, Membership};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::quadrature::{QuadratureDataTensors, Slab};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Expansion {
    /// Markov parameters of `H` in the variable `(z − center)/scale`.
    Infinity { center: c64, scale: f64 },
    /// Taylor data `M_k = (−1)^k V (σI − Λ)^{-(k+1)} W^*`.
    Sigma(c64),
}

impl Expansion {
    pub const PLAIN: Expansion = Expansion::Infinity {
        center: c64::new(0.0, 0.0),
        scale: 1.0,
    };
}

#[derive(Clone, Debug)]
pub struct MomentSet {
    pub expansion: Expansion,
    /// `L^* M_k`, ℓ × n_in
    pub left_blocks: Vec<CMat>,
    /// `M_k R`, n_out × r
    pub right_blocks: Vec<CMat>,
    /// `L^* M_k R`, ℓ × r
    pub two_sided: Vec<CMat>,
    pub warnings: Vec<String>,
}

impl MomentSet {
    pub fn k_max(&self) -> usize {
        self.two_sided.len().saturating_sub(1)
    }

    fn from_weights(
        data: &QuadratureDataTensors,
        expansion: Expansion,
        k_max: usize,
        f: impl Fn(usize, c64) -> c64,
    ) -> Self {
        let mut left_blocks = Vec::with_capacity(k_max + 1);
        let mut right_blocks = Vec::with_capacity(k_max + 1);
        let mut two_sided = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            left_blocks.push(data.weighted_sum(Slab::Left, |z| f(k, z)));
            right_blocks.push(data.weighted_sum(Slab::Right, |z| f(k, z)));
            two_sided.push(data.weighted_sum(Slab::TwoSided, |z| f(k, z)));
        }
        Self {
            expansion,
            left_blocks,
            right_blocks,
            two_sided,
            warnings: Vec::new(),
        }
    }
}

/// `A_k = Σ_j w_j ζ_j^k QL_j R` and the matching one-sided blocks.
pub fn markov_moments(data: &QuadratureDataTensors, k_max: usize) -> MomentSet {
    MomentSet::from_weights(data, Expansion::PLAIN, k_max, |k, z| z.powi(k as i32))
}

/// Markov parameters in the shifted and scaled variable `(z − center)/scale`.
/// Eigenvalues `μ` recovered from these map back as `center + scale·μ`.
pub fn markov_moments_scaled(
    data: &QuadratureDataTensors,
    k_max: usize,
    center: c64,
    scale: f64,
) -> Result<MomentSet> {
    if !(scale > 0.0) || !scale.is_finite() {
        return invalid(format!("moment scale must be positive, got {scale}"));
    }
    Ok(MomentSet::from_weights(
        data,
        Expansion::Infinity { center, scale },
        k_max,
        |k, z| ((z - center) / scale).powi(k as i32),
    ))
}

const SEPARATION_RTOL: f64 = 1e-6;

/// Checks that `z` is not a node and lies strictly outside the closed region.
/// Returns a warning when `z` is within `1e-6·radius` of a node.
pub fn check_exterior_point(contour: &ContourQuadrature, z: c64) -> Result<Option<String>> {
    let warn = check_not_node(contour, z)?;
    if contour.membership(z) != Membership::Outside {
        return invalid(format!(
            "point {z} must lie strictly outside the contour region"
        ));
    }
    Ok(warn)
}

fn check_interior_point(contour: &ContourQuadrature, z: c64) -> Result<Option<String>> {
    let warn = check_not_node(contour, z)?;
    if contour.membership(z) != Membership::Inside {
        return invalid(format!(
            "point {z} must lie strictly inside the contour region"
        ));
    }
    Ok(warn)
}

fn check_not_node(contour: &ContourQuadrature, z: c64) -> Result<Option<String>> {
    let (k, d) = contour.min_node_distance(z);
    if d == 0.0 {
        return Err(Error::NodeCoincidence {
            index: k,
            node: contour.nodes[k],
            point: z,
        });
    }
    if d < SEPARATION_RTOL * contour.scale() {
        let msg = format!(
            "point {z} is within {d:.3e} of quadrature node {k}; samples may be inaccurate"
        );
        log::warn!("{msg}");
        return Ok(Some(msg));
    }
    Ok(None)
}

/// `M_k = (−1)^k Σ_j w_j (σ − ζ_j)^{-(k+1)} QL_j R` for σ outside the region.
pub fn sigma_moments(data: &QuadratureDataTensors, sigma: c64, k_max: usize) -> Result<MomentSet> {
    let warn = check_exterior_point(&data.contour, sigma)?;
    let mut m = MomentSet::from_weights(data, Expansion::Sigma(sigma), k_max, |k, z| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign / (sigma - z).powi(k as i32 + 1)
    });
    m.warnings.extend(warn);
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `ℓ_i^* H(θ)`, a row of length n_in
    Left,
    /// `H(σ) r_j`, a column of length n_out
    Right,
}

/// Tangential samples `Σ_k w_k/(z − ζ_k) · (row i of QL_k | column j of QR_k)`, one per point.
pub fn point_samples(
    data: &QuadratureDataTensors,
    points: &[c64],
    side: Side,
    direction_index: usize,
) -> Result<Vec<Vec<c64>>> {
    let limit = match side {
        Side::Left => data.ell(),
        Side::Right => data.r_count(),
    };
    if direction_index >= limit {
        return invalid(format!(
            "direction index {direction_index} out of range (< {limit})"
        ));
    }
    points
        .iter()
        .map(|&z| {
            check_exterior_point(&data.contour, z)?;
            Ok(sample_unchecked(data, z, side, direction_index))
        })
        .collect()
}

pub(crate) fn sample_unchecked(
    data: &QuadratureDataTensors,
    z: c64,
    side: Side,
    idx: usize,
) -> Vec<c64> {
    let len = match side {
        Side::Left => data.n_in(),
        Side::Right => data.n_out(),
    };
    let mut acc = vec![c64::new(0.0, 0.0); len];
    for k in 0..data.n_nodes() {
        let c = data.contour.weights[k] / (z - data.contour.nodes[k]);
        match side {
            Side::Left => {
                let q = &data.ql[k];
                for (j, a) in acc.iter_mut().enumerate() {
                    *a += c * q[(idx, j)];
                }
            }
            Side::Right => {
                let q = &data.qr[k];
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += c * q[(i, idx)];
                }
            }
        }
    }
    acc
}

/// `ℓ_i^* H'(σ) r_j = −Σ_k w_k (σ − ζ_k)^{-2} ℓ_i^* T(ζ_k)^{-1} r_j`.
pub fn hermite_sample(
    data: &QuadratureDataTensors,
    sigma: c64,
    left_index: usize,
    right_index: usize,
) -> Result<c64> {
    if left_index >= data.ell() || right_index >= data.r_count() {
        return invalid("direction index out of range");
    }
    check_exterior_point(&data.contour, sigma)?;
    Ok(hermite_unchecked(data, sigma, left_index, right_index))
}

pub(crate) fn hermite_unchecked(
    data: &QuadratureDataTensors,
    sigma: c64,
    i: usize,
    j: usize,
) -> c64 {
    (0..data.n_nodes()).fold(c64::new(0.0, 0.0), |acc, k| {
        let d = sigma - data.contour.nodes[k];
        acc - data.contour.weights[k] / (d * d) * data.qlr[k][(i, j)]
    })
}

/// Weighted sum `Σ_j w_j (σ − ζ_j)^{-(k+1)} QL_j R` for σ inside the region. The
/// poles of `H` cancel, leaving `(−1)^{k+1} L^* N^{(k)}(σ) R / k!`.
pub fn interior_remainder_sample(
    data: &QuadratureDataTensors,
    sigma: c64,
    k: usize,
) -> Result<CMat> {
    check_interior_point(&data.contour, sigma)?;
    Ok(data.weighted_sum(Slab::TwoSided, |z| 1.0 / (sigma - z).powi(k as i32 + 1)))
}

/// Taylor coefficient `L^* N^{(k)}(σ) R / k!` of the remainder, sign already removed.
pub fn interior_remainder_taylor(
    data: &QuadratureDataTensors,
    sigma: c64,
    k: usize,
) -> Result<CMat> {
    let raw = interior_remainder_sample(data, sigma, k)?;
    let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    Ok(linalg::scaled(raw.as_ref(), c64::new(sign, 0.0)))
}

/// `L^* H(σ) R = L^* T(σ)^{-1} R − L^* N(σ) R` at an interior point, given the
/// directly evaluated `L^* T(σ)^{-1} R`.
pub fn interior_rational_part(
    data: &QuadratureDataTensors,
    sigma: c64,
    direct: &CMat,
) -> Result<CMat> {
    let n0 = interior_remainder_taylor(data, sigma, 0)?;
    Ok(linalg::sub(direct.as_ref(), n0.as_ref()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probing::ProbingConfig;
    use crate::problems::CombinedProblem;
    use crate::quadrature::compute_quadrature_data;

    fn scalar_data(coeffs: &[f64], center: f64, radius: f64, n: usize) -> QuadratureDataTensors {
        let c: Vec<c64> = coeffs.iter().map(|&x| c64::new(x, 0.0)).collect();
        let p = CombinedProblem::scalar_polynomial(&c).unwrap();
        let q = ContourQuadrature::circle(c64::new(center, 0.0), radius, n).unwrap();
        compute_quadrature_data(&p, &q, &ProbingConfig::canonical(1, 1, 1).unwrap()).unwrap()
    }

    fn s(m: &CMat) -> c64 {
        m[(0, 0)]
    }

    #[test]
    fn markov_of_linear_scalar() {
        let d = scalar_data(&[-0.3, 1.0], 0.0, 1.0, 64);
        let m = markov_moments(&d, 2);
        assert!((s(&m.two_sided[0]) - 1.0).norm() < 1e-14);
        assert!((s(&m.two_sided[1]) - 0.3).norm() < 1e-14);
        assert!((s(&m.two_sided[2]) - 0.09).norm() < 1e-14);
    }

    #[test]
    fn markov_of_quadratic_scalar() {
        let d = scalar_data(&[2.0, -3.0, 1.0], 0.0, 1.5, 128);
        let m = markov_moments(&d, 1);
        assert!((s(&m.two_sided[0]) + 1.0).norm() < 1e-12);
        assert!((s(&m.two_sided[1]) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn sigma_moments_of_linear_scalar() {
        let d = scalar_data(&[-0.3, 1.0], 0.0, 1.0, 64);
        let m = sigma_moments(&d, c64::new(2.0, 0.0), 1).unwrap();
        assert!((s(&m.two_sided[0]) - 1.0 / 1.7).norm() < 1e-13);
        assert!((s(&m.two_sided[1]) + 1.0 / (1.7 * 1.7)).norm() < 1e-13);
        let m = sigma_moments(&d, c64::new(10.0, 0.0), 0).unwrap();
        assert!((s(&m.two_sided[0]) - 0.103_092_783_505_154_64).norm() < 1e-13);
    }

    #[test]
    fn sigma_must_be_exterior() {
        let d = scalar_data(&[-0.3, 1.0], 0.0, 1.0, 8);
        assert!(matches!(
            sigma_moments(&d, c64::new(0.5, 0.0), 0),
            Err(Error::InvalidArgument(_))
        ));
        let node = d.contour.nodes[3];
        assert!(matches!(
            sigma_moments(&d, node, 0),
            Err(Error::NodeCoincidence { index: 3, .. })
        ));
    }

    #[test]
    fn scalar_point_and_hermite_samples() {
        let d = scalar_data(&[-0.3, 1.0], 0.0, 1.0, 64);
        let r = point_samples(&d, &[c64::new(2.0, 0.0)], Side::Right, 0).unwrap();
        assert!((r[0][0] - 1.0 / 1.7).norm() < 1e-13);
        let l = point_samples(&d, &[c64::new(-2.0, 0.0)], Side::Left, 0).unwrap();
        assert!((l[0][0] + 1.0 / 2.3).norm() < 1e-13);
        let h = hermite_sample(&d, c64::new(2.0, 0.0), 0, 0).unwrap();
        assert!((h + 1.0 / (1.7 * 1.7)).norm() < 1e-13);
        let h = hermite_sample(&d, c64::new(10.0, 0.0), 0, 0).unwrap();
        assert!((h + 1.0 / (9.7 * 9.7)).norm() < 1e-13);
    }

    #[test]
    fn diagonal_point_sample_filters_exterior_eigenvalue() {
        let a = linalg::from_diag(&[c64::new(1.0, 0.0), c64::new(3.0, 0.0)]);
        let p = CombinedProblem::linear(a).unwrap();
        let q = ContourQuadrature::circle(c64::new(0.0, 0.0), 2.0, 128).unwrap();
        let r = faer::Mat::from_fn(2, 1, |_, _| c64::new(1.0, 0.0));
        let probes = ProbingConfig::new(linalg::identity(2), r).unwrap();
        let d = compute_quadrature_data(&p, &q, &probes).unwrap();
        let v = point_samples(&d, &[c64::new(5.0, 0.0)], Side::Right, 0).unwrap();
        assert!((v[0][0] - 0.25).norm() < 1e-12);
        assert!(v[0][1].norm() < 1e-12);
    }

    #[test]
    fn remainder_of_linear_problem_vanishes() {
        let d = scalar_data(&[-0.3, 1.0], 0.0, 1.0, 64);
        let n = interior_remainder_sample(&d, c64::new(-0.2, 0.1), 0).unwrap();
        assert!(s(&n).norm() < 1e-12);
    }

    #[test]
    fn remainder_of_quadratic() {
        // 1/T = 1/(z−2) − 1/(z−1); the pole at 1 is inside, so N(z) = 1/(z−2).
        let d = scalar_data(&[2.0, -3.0, 1.0], 0.0, 1.5, 256);
        let sigma = c64::new(0.5, 0.0);
        let raw = interior_remainder_sample(&d, sigma, 0).unwrap();
        assert!((s(&raw) - 2.0 / 3.0).norm() < 1e-12);
        let n0 = interior_remainder_taylor(&d, sigma, 0).unwrap();
        assert!((s(&n0) + 2.0 / 3.0).norm() < 1e-12);
        let h = 1e-4;
        let fd = (s(&interior_remainder_taylor(&d, sigma + h, 0).unwrap())
            - s(&interior_remainder_taylor(&d, sigma - h, 0).unwrap()))
            / (2.0 * h);
        let n1 = interior_remainder_taylor(&d, sigma, 1).unwrap();
        assert!((s(&n1) - fd).norm() < 1e-7);
        let direct = linalg::from_diag(&[c64::new(1.0 / 0.75, 0.0)]);
        let hval = interior_rational_part(&d, sigma, &direct).unwrap();
        assert!((s(&hval) - 2.0).norm() < 1e-12);
    }
}
