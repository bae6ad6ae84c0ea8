use faer::Mat;
use num_complex::Complex64 as c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::CMat;

/// Left and right probing matrices `L` (n_out × ℓ) and `R` (n_in × r).
#[derive(Clone, Debug)]
pub struct ProbingConfig {
    pub l: CMat,
    pub r: CMat,
    pub seed: Option<u64>,
}

/// Matrix of i.i.d. standard complex Gaussians `(a + ib)/√2`, filled column by column.
pub fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Mat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            m[(i, j)] = c64::new(a * s, b * s);
        }
    }
    m
}

impl ProbingConfig {
    pub fn new(l: CMat, r: CMat) -> Result<Self> {
        check_columns(&l, "L")?;
        check_columns(&r, "R")?;
        Ok(Self { l, r, seed: None })
    }

    /// Square problems: both probes have `n` rows.
    pub fn random(n: usize, ell: usize, r: usize, seed: u64) -> Result<Self> {
        Self::random_rect(n, n, ell, r, seed)
    }

    pub fn random_rect(n_out: usize, n_in: usize, ell: usize, r: usize, seed: u64) -> Result<Self> {
        if ell == 0 || r == 0 {
            return invalid("probe counts must be at least 1");
        }
        if n_out == 0 || n_in == 0 {
            return invalid("probe dimension must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = complex_gaussian(&mut rng, n_out, ell);
        let r = complex_gaussian(&mut rng, n_in, r);
        Ok(Self {
            l,
            r,
            seed: Some(seed),
        })
    }

    /// Leading columns of the identity.
    pub fn canonical(n: usize, ell: usize, r: usize) -> Result<Self> {
        if ell == 0 || r == 0 || ell > n || r > n {
            return invalid(format!("canonical probes need 1 ≤ ℓ, r ≤ n = {n}"));
        }
        let e = |rows: usize, cols: usize| {
            Mat::from_fn(rows, cols, |i, j| {
                if i == j {
                    c64::new(1.0, 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            })
        };
        Ok(Self {
            l: e(n, ell),
            r: e(n, r),
            seed: None,
        })
    }

    pub fn ell(&self) -> usize {
        self.l.ncols()
    }

    pub fn r_count(&self) -> usize {
        self.r.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.l.nrows()
    }

    pub fn n_in(&self) -> usize {
        self.r.nrows()
    }
}

fn check_columns(m: &CMat, name: &str) -> Result<()> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!("probe {name} is empty")));
    }
    for j in 0..m.ncols() {
        if (0..m.nrows()).all(|i| m[(i, j)] == c64::new(0.0, 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "probe {name} has a zero column {j}"
            )));
        }
    }
    Ok(())
}
