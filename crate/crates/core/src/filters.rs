//! Rational filter functions induced by a quadrature rule.

use std::io::Write;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::contour::ContourQuadrature;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FilterKind {
    Hankel { k: usize },
    Loewner { sigma: c64, k: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterProfile {
    pub contour: String,
    pub kind: FilterKind,
    pub grid: Vec<c64>,
    pub values: Vec<c64>,
}

fn check_off_nodes(rule: &ContourQuadrature, z: c64) -> Result<()> {
    let tol = 4.0 * f64::EPSILON * rule.scale().max(z.norm()).max(1.0);
    if rule.nodes.iter().any(|n| (n - z).norm() <= tol) {
        return Err(Error::Pole { z });
    }
    Ok(())
}

/// `b_k(z) = Σ w_j ζ_j^k / (ζ_j − z)`
pub fn eval_hankel_filter(rule: &ContourQuadrature, k: usize, z: c64) -> Result<c64> {
    check_off_nodes(rule, z)?;
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&n, &w)| w * n.powu(k as u32) / (n - z))
        .sum())
}

/// `b_{σ,k}(z) = Σ w_j / ((ζ_j − z)(σ − ζ_j)^{k+1})`
pub fn eval_loewner_filter(rule: &ContourQuadrature, sigma: c64, k: usize, z: c64) -> Result<c64> {
    check_off_nodes(rule, z)?;
    check_off_nodes(rule, sigma)?;
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&n, &w)| w / ((n - z) * (sigma - n).powu(k as u32 + 1)))
        .sum())
}

/// `1/(1 − z^N)`, the trapezoid `b_0` on the unit circle.
pub fn closed_form_b0_unit_circle(n: usize, z: c64) -> Result<c64> {
    let d = 1.0 - z.powu(n as u32);
    if d.norm() <= 1e-14 {
        return Err(Error::Pole { z });
    }
    Ok(1.0 / d)
}

/// `|b_{σ,k}(z) − b_{σ,0}(z)/(σ − z)^k|`, the deviation from the ideal Loewner shift
/// relation. Reported, never asserted: the trapezoid filter satisfies it only in the limit.
pub fn loewner_shift_deviation(
    rule: &ContourQuadrature,
    sigma: c64,
    k: usize,
    z: c64,
) -> Result<f64> {
    let bk = eval_loewner_filter(rule, sigma, k, z)?;
    let b0 = eval_loewner_filter(rule, sigma, 0, z)?;
    Ok((bk - b0 / (sigma - z).powu(k as u32)).norm())
}

pub fn eval_filter(rule: &ContourQuadrature, kind: FilterKind, z: c64) -> Result<c64> {
    match kind {
        FilterKind::Hankel { k } => eval_hankel_filter(rule, k, z),
        FilterKind::Loewner { sigma, k } => eval_loewner_filter(rule, sigma, k, z),
    }
}

pub fn filter_profile(
    rule: &ContourQuadrature,
    kind: FilterKind,
    grid: &[c64],
) -> Result<FilterProfile> {
    let values = grid
        .iter()
        .map(|&z| eval_filter(rule, kind, z))
        .collect::<Result<_>>()?;
    Ok(FilterProfile {
        contour: rule.describe(),
        kind,
        grid: grid.to_vec(),
        values,
    })
}

/// `count` points from `start` to `end` inclusive.
pub fn line_grid(start: c64, end: c64, count: usize) -> Vec<c64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (end - start) * (i as f64 / (count - 1) as f64))
            .collect(),
    }
}

impl FilterProfile {
    /// Columns `re_z, im_z, re_b, im_b, abs_b`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re_z,im_z,re_b,im_b,abs_b")?;
        for (z, b) in self.grid.iter().zip(&self.values) {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                z.re,
                z.im,
                b.re,
                b.im,
                b.norm()
            )?;
        }
        Ok(())
    }
}
