//! Synthetic problems with a planted spectrum, defined through
//! `T(z)^{-1} = V (zI − Λ)^{-1} W^* + N(z)`.

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat, DenseLu};
use crate::probing::complex_gaussian;
use crate::problem::{check_rows, NlevpProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Spectrum {
    Given {
        values: Vec<c64>,
    },
    /// `m` values drawn uniformly from the disk, at least `min_gap` apart.
    RandomDisk {
        center: c64,
        radius: f64,
        min_gap: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Dependency {
    Independent,
    /// `V` and `W` have rank `rank < m`.
    Dependent {
        rank: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Remainder {
    None,
    /// `Σ_{d ≤ degree} z^d N_d` with Gaussian `N_d` scaled by `scale`.
    Polynomial {
        degree: usize,
        scale: f64,
    },
    /// `Σ_p U_p U'_p^* / (z − p)` with rank-`rank` Gaussian factors.
    Rational {
        poles: Vec<c64>,
        rank: usize,
        scale: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub n: usize,
    pub m: usize,
    pub spectrum: Spectrum,
    pub dependency: Dependency,
    pub remainder: Remainder,
    pub seed: u64,
}

impl PlantedSpec {
    /// Eigenvalues in the disk of radius 0.6 at the origin, independent eigenvectors,
    /// quadratic remainder.
    pub fn standard(n: usize, m: usize, seed: u64) -> Self {
        Self {
            n,
            m,
            spectrum: Spectrum::RandomDisk {
                center: c64::new(0.0, 0.0),
                radius: 0.6,
                min_gap: 0.05,
            },
            dependency: Dependency::Independent,
            remainder: Remainder::Polynomial {
                degree: 2,
                scale: 1.0,
            },
            seed,
        }
    }
}

#[derive(Clone, Debug)]
enum RemainderData {
    None,
    Polynomial(Vec<CMat>),
    Rational(Vec<(c64, CMat, CMat)>),
}

#[derive(Clone, Debug)]
pub struct PlantedProblem {
    pub spec: PlantedSpec,
    pub lambda: Vec<c64>,
    pub v: CMat,
    pub w: CMat,
    remainder: RemainderData,
}

pub fn make_planted_problem(spec: PlantedSpec) -> Result<PlantedProblem> {
    let PlantedSpec { n, m, .. } = spec;
    if n == 0 || m == 0 {
        return invalid("planted problem needs n ≥ 1 and m ≥ 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lambda = match &spec.spectrum {
        Spectrum::Given { values } => {
            if values.len() != m {
                return invalid(format!(
                    "{} planted eigenvalues given, m = {m}",
                    values.len()
                ));
            }
            values.clone()
        }
        Spectrum::RandomDisk {
            center,
            radius,
            min_gap,
        } => {
            let mut vals: Vec<c64> = Vec::with_capacity(m);
            let mut tries = 0;
            while vals.len() < m {
                tries += 1;
                if tries > 100_000 {
                    return invalid("could not place planted eigenvalues with the requested gap");
                }
                let r = radius * rng.random::<f64>().sqrt();
                let t = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                let z = center + c64::from_polar(r, t);
                if vals.iter().all(|v| (v - z).norm() >= *min_gap) {
                    vals.push(z);
                }
            }
            vals
        }
    };
    for i in 0..m {
        for j in 0..i {
            if lambda[i] == lambda[j] {
                return invalid(format!("planted eigenvalues {j} and {i} coincide"));
            }
        }
    }
    let (v, w) = match spec.dependency {
        Dependency::Independent => (
            complex_gaussian(&mut rng, n, m),
            complex_gaussian(&mut rng, n, m),
        ),
        Dependency::Dependent { rank } => {
            if rank == 0 || rank >= m || rank > n {
                return invalid(format!(
                    "dependent mode needs 1 ≤ rank < m and rank ≤ n, got rank {rank}"
                ));
            }
            let v0 = complex_gaussian(&mut rng, n, rank);
            let cv = complex_gaussian(&mut rng, rank, m);
            let w0 = complex_gaussian(&mut rng, n, rank);
            let cw = complex_gaussian(&mut rng, rank, m);
            (
                linalg::matmul(v0.as_ref(), cv.as_ref()),
                linalg::matmul(w0.as_ref(), cw.as_ref()),
            )
        }
    };
    let remainder = match &spec.remainder {
        Remainder::None => RemainderData::None,
        Remainder::Polynomial { degree, scale } => RemainderData::Polynomial(
            (0..=*degree)
                .map(|_| {
                    linalg::scaled(
                        complex_gaussian(&mut rng, n, n).as_ref(),
                        c64::new(*scale, 0.0),
                    )
                })
                .collect(),
        ),
        Remainder::Rational { poles, rank, scale } => {
            if *rank == 0 {
                return invalid("rational remainder needs rank ≥ 1");
            }
            RemainderData::Rational(
                poles
                    .iter()
                    .map(|&p| {
                        let u = linalg::scaled(
                            complex_gaussian(&mut rng, n, *rank).as_ref(),
                            c64::new(*scale, 0.0),
                        );
                        let u2 = complex_gaussian(&mut rng, n, *rank);
                        (p, u, u2)
                    })
                    .collect(),
            )
        }
    };
    Ok(PlantedProblem {
        spec,
        lambda,
        v,
        w,
        remainder,
    })
}

impl PlantedProblem {
    pub fn m(&self) -> usize {
        self.lambda.len()
    }

    fn diag_scaled_w(&self, d: &[c64]) -> CMat {
        // diag(d) W^*
        let n = self.v.nrows();
        Mat::from_fn(self.m(), n, |i, j| d[i] * self.w[(j, i)].conj())
    }

    /// `V diag(d) W^*`
    fn v_diag_w(&self, d: &[c64]) -> CMat {
        linalg::matmul(self.v.as_ref(), self.diag_scaled_w(d).as_ref())
    }

    /// Rational part `H(z) = V (zI − Λ)^{-1} W^*`.
    pub fn h(&self, z: c64) -> CMat {
        let d: Vec<c64> = self.lambda.iter().map(|l| 1.0 / (z - l)).collect();
        self.v_diag_w(&d)
    }

    /// `H'(z) = −V (zI − Λ)^{-2} W^*`.
    pub fn h_derivative(&self, z: c64) -> CMat {
        let d: Vec<c64> = self
            .lambda
            .iter()
            .map(|l| -1.0 / ((z - l) * (z - l)))
            .collect();
        self.v_diag_w(&d)
    }

    /// Taylor coefficient `N^{(k)}(z)/k!` of the analytic remainder.
    pub fn remainder_taylor(&self, z: c64, k: usize) -> CMat {
        let n = self.v.nrows();
        let mut out = Mat::zeros(n, n);
        match &self.remainder {
            RemainderData::None => {}
            RemainderData::Polynomial(coeffs) => {
                for (d, c) in coeffs.iter().enumerate() {
                    if d >= k {
                        let f = binomial(d, k) * z.powi((d - k) as i32);
                        linalg::axpy(&mut out, f, c.as_ref());
                    }
                }
            }
            RemainderData::Rational(terms) => {
                for (p, u, u2) in terms {
                    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                    let f = sign / (z - p).powi(k as i32 + 1);
                    let uu = linalg::matmul(u.as_ref(), linalg::adjoint(u2.as_ref()).as_ref());
                    linalg::axpy(&mut out, f, uu.as_ref());
                }
            }
        }
        out
    }

    pub fn remainder(&self, z: c64) -> CMat {
        self.remainder_taylor(z, 0)
    }

    /// Dense `T(z)^{-1}`.
    pub fn resolvent(&self, z: c64) -> Result<CMat> {
        if self.lambda.contains(&z) {
            return Err(Error::PointSingular { point: z });
        }
        let mut r = self.h(z);
        linalg::axpy(&mut r, c64::new(1.0, 0.0), self.remainder(z).as_ref());
        if !linalg::is_finite(r.as_ref()) {
            return Err(Error::PointSingular { point: z });
        }
        Ok(r)
    }

    /// `T(z) = (N + V (zI − Λ)^{-1} W^*)^{-1}`, read off as the leading `n × n` block of the
    /// inverse of the bordered matrix `[[N, V], [W^*, −(zI − Λ)]]`. That matrix stays regular at
    /// the planted eigenvalues and needs no inverse of `N(z)`.
    pub fn t_matrix(&self, z: c64) -> Result<CMat> {
        let n = self.dim();
        let m = self.m();
        let nz = self.remainder(z);
        let bordered = Mat::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
            (true, true) => nz[(i, j)],
            (true, false) => self.v[(i, j - n)],
            (false, true) => self.w[(j, i - n)].conj(),
            (false, false) => {
                if i == j {
                    self.lambda[i - n] - z
                } else {
                    c64::new(0.0, 0.0)
                }
            }
        });
        let lu = DenseLu::new(bordered.as_ref())?;
        if lu.is_singular() {
            return Err(Error::PointSingular { point: z });
        }
        let rhs = Mat::from_fn(n + m, n, |i, j| {
            if i == j {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let x = lu.solve(rhs.as_ref());
        Ok(x.subrows(0, n).to_owned())
    }

    /// Exact `L^* V Λ^k W^* R`.
    pub fn exact_markov(&self, k: usize, l: MatRef<'_, c64>, r: MatRef<'_, c64>) -> CMat {
        let d: Vec<c64> = self.lambda.iter().map(|x| x.powi(k as i32)).collect();
        self.probe_both(&d, l, r)
    }

    /// Exact `M_k = (−1)^k V (σI − Λ)^{-(k+1)} W^*`, two-sided probed.
    pub fn exact_sigma_moment(
        &self,
        sigma: c64,
        k: usize,
        l: MatRef<'_, c64>,
        r: MatRef<'_, c64>,
    ) -> CMat {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let d: Vec<c64> = self
            .lambda
            .iter()
            .map(|x| sign / (sigma - x).powi(k as i32 + 1))
            .collect();
        self.probe_both(&d, l, r)
    }

    fn probe_both(&self, d: &[c64], l: MatRef<'_, c64>, r: MatRef<'_, c64>) -> CMat {
        let lv = linalg::matmul(linalg::adjoint(l).as_ref(), self.v.as_ref());
        let wr = linalg::matmul(self.diag_scaled_w(d).as_ref(), r);
        linalg::matmul(lv.as_ref(), wr.as_ref())
    }

    /// Observability/reachability factors of the block Hankel pair:
    /// `O = [L^*V; L^*VΛ; …]`, `ℛ = [W^*R, ΛW^*R, …]`.
    pub fn hankel_factors(&self, k: usize, l: MatRef<'_, c64>, r: MatRef<'_, c64>) -> (CMat, CMat) {
        let lv = linalg::matmul(linalg::adjoint(l).as_ref(), self.v.as_ref());
        let wr = linalg::matmul(linalg::adjoint(self.w.as_ref()).as_ref(), r);
        let blocks_o: Vec<CMat> = (0..k)
            .map(|i| {
                Mat::from_fn(lv.nrows(), self.m(), |a, b| {
                    lv[(a, b)] * self.lambda[b].powi(i as i32)
                })
            })
            .collect();
        let blocks_r: Vec<CMat> = (0..k)
            .map(|i| {
                Mat::from_fn(self.m(), wr.ncols(), |a, b| {
                    self.lambda[a].powi(i as i32) * wr[(a, b)]
                })
            })
            .collect();
        (linalg::vstack(&blocks_o), linalg::hstack(&blocks_r))
    }

    /// Factors with `𝕃 = −Oℛ` and `𝕃_s = −OΛℛ` for the single-point pencil at `σ`.
    pub fn single_point_factors(
        &self,
        sigma: c64,
        k: usize,
        l: MatRef<'_, c64>,
        r: MatRef<'_, c64>,
    ) -> (CMat, CMat) {
        let lv = linalg::matmul(linalg::adjoint(l).as_ref(), self.v.as_ref());
        let wr = linalg::matmul(linalg::adjoint(self.w.as_ref()).as_ref(), r);
        let d: Vec<c64> = self.lambda.iter().map(|x| 1.0 / (sigma - x)).collect();
        let sgn = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        let blocks_o: Vec<CMat> = (0..k)
            .map(|i| {
                Mat::from_fn(lv.nrows(), self.m(), |a, b| {
                    sgn(i) * lv[(a, b)] * d[b].powi(i as i32 + 1)
                })
            })
            .collect();
        let blocks_r: Vec<CMat> = (0..k)
            .map(|j| {
                Mat::from_fn(self.m(), wr.ncols(), |a, b| {
                    sgn(j) * d[a].powi(j as i32 + 1) * wr[(a, b)]
                })
            })
            .collect();
        (linalg::vstack(&blocks_o), linalg::hstack(&blocks_r))
    }

    /// Generalized factors for a multi-point scheme: rows `ℓ_i^* V (θ_i − Λ)^{-1}`,
    /// columns `(σ_j − Λ)^{-1} W^* r_j`, so that `𝕃 = −Oℛ`, `𝕃_s = −OΛℛ`.
    pub fn multipoint_factors(
        &self,
        theta: &[c64],
        left_dirs: MatRef<'_, c64>,
        sigma: &[c64],
        right_dirs: MatRef<'_, c64>,
    ) -> (CMat, CMat) {
        let lv = linalg::matmul(linalg::adjoint(left_dirs).as_ref(), self.v.as_ref());
        let wr = linalg::matmul(linalg::adjoint(self.w.as_ref()).as_ref(), right_dirs);
        let o = Mat::from_fn(theta.len(), self.m(), |i, b| {
            lv[(i, b)] / (theta[i] - self.lambda[b])
        });
        let r = Mat::from_fn(self.m(), sigma.len(), |a, j| {
            wr[(a, j)] / (sigma[j] - self.lambda[a])
        });
        (o, r)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl NlevpProblem for PlantedProblem {
    fn dim(&self) -> usize {
        self.v.nrows()
    }

    /// Dense `T(z)`, the inverse of the resolvent.
    fn matrix(&self, z: c64) -> Option<CMat> {
        self.t_matrix(z).ok()
    }

    fn apply(&self, z: c64, v: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), v.nrows())?;
        Ok(linalg::matmul(self.t_matrix(z)?.as_ref(), v))
    }

    fn solve(&self, z: c64, b: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), b.nrows())?;
        Ok(linalg::matmul(self.resolvent(z)?.as_ref(), b))
    }

    fn solve_left(&self, z: c64, x: MatRef<'_, c64>) -> Result<CMat> {
        check_rows(self.dim(), x.ncols())?;
        Ok(linalg::matmul(x, self.resolvent(z)?.as_ref()))
    }

    fn probe(&self, z: c64, l: MatRef<'_, c64>, r: MatRef<'_, c64>) -> Result<(CMat, CMat)> {
        check_rows(self.dim(), l.nrows())?;
        check_rows(self.dim(), r.nrows())?;
        let res = self.resolvent(z)?;
        Ok((
            linalg::matmul(linalg::adjoint(l).as_ref(), res.as_ref()),
            linalg::matmul(res.as_ref(), r),
        ))
    }
}
