//! Diagonal delay problem `T(z) = zI + c e^{-τz} I − E₀`.

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::contour::ContourQuadrature;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat};
use crate::problem::{check_rows, NlevpProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayProblem {
    pub c: f64,
    pub tau: f64,
    pub e_values: Vec<f64>,
}

pub const DEFAULT_C: f64 = 0.015;
pub const DEFAULT_TAU: f64 = 8.0;

/// `e_values` are the negated log-spaced magnitudes from `e_min_mag` up to `e_max_mag`.
pub fn make_delay_problem(
    c: f64,
    tau: f64,
    n: usize,
    e_min_mag: f64,
    e_max_mag: f64,
) -> Result<DelayProblem> {
    if n == 0 {
        return invalid("delay problem needs n ≥ 1");
    }
    if !(e_min_mag > 0.0 && e_max_mag > 0.0) || !e_min_mag.is_finite() || !e_max_mag.is_finite() {
        return invalid("eigenvalue magnitudes must be positive and finite");
    }
    if e_min_mag > e_max_mag {
        return invalid("e_min_mag must not exceed e_max_mag");
    }
    let (a, b) = (e_min_mag.log10(), e_max_mag.log10());
    let e_values = (0..n)
        .map(|i| {
            let t = if n == 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            };
            -(10f64).powf(a + t * (b - a))
        })
        .collect();
    Ok(DelayProblem { c, tau, e_values })
}

impl Default for DelayProblem {
    fn default() -> Self {
        make_delay_problem(DEFAULT_C, DEFAULT_TAU, 50, 1e-4, 1e10).expect("valid defaults")
    }
}

impl DelayProblem {
    pub fn diagonal(&self, z: c64) -> Vec<c64> {
        let d = z + self.c * (-self.tau * z).exp();
        self.e_values.iter().map(|e| d - e).collect()
    }

    pub fn scalar(&self, i: usize, z: c64) -> c64 {
        z + self.c * (-self.tau * z).exp() - self.e_values[i]
    }

    pub fn scalar_derivative(&self, z: c64) -> c64 {
        1.0 - self.c * self.tau * (-self.tau * z).exp()
    }

    fn inverse_diagonal(&self, z: c64) -> Result<Vec<c64>> {
        let delay = self.c * (-self.tau * z).exp();
        self.e_values
            .iter()
            .map(|e| {
                let d = z + delay - e;
                let terms = z.norm() + delay.norm() + e.abs();
                let inv = 1.0 / d;
                if d.norm() <= 8.0 * f64::EPSILON * terms
                    || !inv.re.is_finite()
                    || !inv.im.is_finite()
                {
                    Err(Error::PointSingular { point: z })
                } else {
                    Ok(inv)
                }
            })
            .collect()
    }
}

fn scale_rows(d: &[c64], v: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(v.nrows(), v.ncols(), |i, j| d[i] * v[(i, j)])
}

fn scale_cols(d: &[c64], v: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * d[j])
}

impl NlevpProblem for DelayProblem {
    fn dim(&self) -> usize {
        self.e_values.len()
    }

    fn apply(&self, z: c64, v: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), v.nrows())?;
        Ok(scale_rows(&self.diagonal(z), v))
    }

    fn solve(&self, z: c64, b: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), b.nrows())?;
        Ok(scale_rows(&self.inverse_diagonal(z)?, b))
    }

    fn solve_left(&self, z: c64, x: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), x.ncols())?;
        Ok(scale_cols(&self.inverse_diagonal(z)?, x))
    }

    fn probe(&self, z: c64, l: MatRef<'_, c64>, r: MatRef<'_, c64>) -> Result<(CMat, CMat)> {
        check_rows(self.dim(), l.nrows())?;
        check_rows(self.dim(), r.nrows())?;
        let inv = self.inverse_diagonal(z)?;
        Ok((
            scale_cols(&inv, linalg::adjoint(l).as_ref()),
            scale_rows(&inv, r),
        ))
    }

    fn apply_derivative(&self, z: c64, v: MatRef<'_, c64>) -> Option<Result<CMat>> {
        Some(check_rows(self.dim(), v.nrows()).map(|_| {
            let d = self.scalar_derivative(z);
            Mat::from_fn(v.nrows(), v.ncols(), |i, j| d * v[(i, j)])
        }))
    }

    fn matrix(&self, z: c64) -> Option<CMat> {
        let d = self.diagonal(z);
        let n = d.len();
        Some(Mat::from_fn(n, n, |i, j| {
            if i == j {
                d[i]
            } else {
                c64::new(0.0, 0.0)
            }
        }))
    }

    fn norm_fro(&self, z: c64) -> Option<f64> {
        Some(
            self.diagonal(z)
                .iter()
                .map(|d| d.norm_sqr())
                .sum::<f64>()
                .sqrt(),
        )
    }
}

/// Eigenvalue of component `i` found by the root oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayRoot {
    pub component: usize,
    pub value: c64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DelayOracle {
    pub roots: Vec<DelayRoot>,
    /// Components whose Newton runs produced no accepted root even though a
    /// start converged toward the region.
    pub flagged: Vec<usize>,
}

impl DelayOracle {
    pub fn eigenvalues(&self) -> Vec<c64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

const ROOT_TOL: f64 = 1e-12;

fn newton(p: &DelayProblem, i: usize, start: c64) -> Option<c64> {
    let mut z = start;
    let mut f = p.scalar(i, z);
    for _ in 0..200 {
        if !f.re.is_finite() || !f.im.is_finite() {
            return None;
        }
        let df = p.scalar_derivative(z);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let zn = z - t * step;
            let fnew = p.scalar(i, zn);
            if fnew.norm() < f.norm() || fnew.norm() <= ROOT_TOL {
                z = zn;
                f = fnew;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || step.norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    // polish with a few undamped steps
    for _ in 0..3 {
        let df = p.scalar_derivative(z);
        let zn = z - p.scalar(i, z) / df;
        if p.scalar(i, zn).norm() <= p.scalar(i, z).norm() {
            z = zn;
        }
    }
    (p.scalar(i, z).norm() <= ROOT_TOL).then_some(z)
}

/// All roots of `λ + c e^{-τλ} − e_i` inside the closed contour region, for every
/// component, found by damped Newton from a grid of starts with deduplication.
pub fn delay_eigen_oracle(problem: &DelayProblem, region: &ContourQuadrature) -> DelayOracle {
    let center = region.center();
    let rad = region.scale();
    let grid = 24usize;
    let mut starts = Vec::with_capacity(grid * grid);
    for a in 0..grid {
        for b in 0..grid {
            let x = -1.0 + 2.0 * (a as f64 + 0.5) / grid as f64;
            let y = -1.0 + 2.0 * (b as f64 + 0.5) / grid as f64;
            starts.push(center + c64::new(x, y) * rad * 1.1);
        }
    }
    let mut out = DelayOracle::default();
    for i in 0..problem.dim() {
        let mut found: Vec<c64> = Vec::new();
        let mut near_miss = false;
        let mut component_starts = starts.clone();
        component_starts.push(c64::new(problem.e_values[i], 0.0));
        for &s in &component_starts {
            match newton(problem, i, s) {
                Some(z) if region.contains_closed(z) => {
                    if !found
                        .iter()
                        .any(|f| (f - z).norm() <= 1e-10 * z.norm().max(1.0))
                    {
                        found.push(z);
                    }
                }
                Some(_) => {}
                None => {
                    let f = problem.scalar(i, s);
                    if f.norm() < 1e-6 && region.contains_closed(s) {
                        near_miss = true;
                    }
                }
            }
        }
        if found.is_empty() && near_miss {
            out.flagged.push(i);
        }
        for z in found {
            out.roots.push(DelayRoot {
                component: i,
                value: z,
                residual: problem.scalar(i, z).norm(),
            });
        }
    }
    out.roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    out
}

/// Disk enclosing the eleven rightmost eigenvalues of the default delay problem.
pub fn default_delay_contour(n_nodes: usize) -> Result<ContourQuadrature> {
    ContourQuadrature::circle(
        c64::new(DELAY_CONTOUR_CENTER, 0.0),
        DELAY_CONTOUR_RADIUS,
        n_nodes,
    )
}

pub const DELAY_CONTOUR_CENTER: f64 = -0.0625;
pub const DELAY_CONTOUR_RADIUS: f64 = 0.07;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_span_log_range() {
        let p = DelayProblem::default();
        assert_eq!(p.dim(), 50);
        assert!((p.e_values[0] + 1e-4).abs() < 1e-18);
        assert!((p.e_values[49] + 1e10).abs() < 1e-3);
        assert!(p.e_values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn scalar_evaluation() {
        let p = DelayProblem {
            c: 0.015,
            tau: 8.0,
            e_values: vec![-1.0],
        };
        let t = p.scalar(0, c64::new(0.5, 0.0));
        assert!((t.re - (1.5 + 0.015 * (-4f64).exp())).abs() < 1e-15);
        assert!((t.re - 1.500_274_7).abs() < 1e-7);
    }

    #[test]
    fn undelayed_roots_are_the_diagonal() {
        let p = make_delay_problem(0.0, 8.0, 5, 0.1, 0.5).unwrap();
        let region = ContourQuadrature::circle(c64::new(0.0, 0.0), 1.0, 8).unwrap();
        let o = delay_eigen_oracle(&p, &region);
        assert_eq!(o.roots.len(), 5);
        let mut e = p.e_values.clone();
        e.sort_by(f64::total_cmp);
        for (r, e) in o.roots.iter().zip(e) {
            assert!((r.value - e).norm() < 1e-12);
        }
    }

    #[test]
    fn single_component_root_certified() {
        let p = DelayProblem {
            c: 0.015,
            tau: 8.0,
            e_values: vec![-0.1],
        };
        let region = ContourQuadrature::circle(c64::new(0.0, 0.0), 1.0, 8).unwrap();
        let o = delay_eigen_oracle(&p, &region);
        assert!(!o.roots.is_empty());
        assert!(o.roots.iter().all(|r| r.residual <= 1e-12));
        assert!(o.roots.iter().any(|r| r.value.im.abs() < 1e-12));
    }
}
