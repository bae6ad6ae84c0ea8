//! Probed resolvent samples at the quadrature nodes, and their file formats.

use std::io::{Read, Write};

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{ContourKind, ContourQuadrature};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::probing::ProbingConfig;
use crate::problem::NlevpProblem;

/// Per-node slabs `QL_k = L^* T(ζ_k)^{-1}` (ℓ × n_in) and `QR_k = T(ζ_k)^{-1} R` (n_out × r),
/// plus the two-sided products `QL_k R` (ℓ × r).
#[derive(Clone, Debug)]
pub struct QuadratureDataTensors {
    pub contour: ContourQuadrature,
    pub probes: ProbingConfig,
    pub ql: Vec<CMat>,
    pub qr: Vec<CMat>,
    pub qlr: Vec<CMat>,
}

pub fn compute_quadrature_data(
    problem: &dyn NlevpProblem,
    contour: &ContourQuadrature,
    probes: &ProbingConfig,
) -> Result<QuadratureDataTensors> {
    let n = problem.dim();
    if probes.n_out() != n || probes.n_in() != n {
        return Err(Error::DimensionMismatch(format!(
            "probes have {}/{} rows, problem dimension is {n}",
            probes.n_out(),
            probes.n_in()
        )));
    }
    let slabs: Vec<Result<(CMat, CMat)>> = contour
        .nodes
        .par_iter()
        .enumerate()
        .map(|(k, &z)| {
            let (ql, qr) = problem
                .probe(z, probes.l.as_ref(), probes.r.as_ref())
                .map_err(|e| node_error(e, k, z))?;
            if !linalg::is_finite(ql.as_ref()) || !linalg::is_finite(qr.as_ref()) {
                return Err(Error::NodeSingular { index: k, node: z });
            }
            Ok((ql, qr))
        })
        .collect();
    let mut ql = Vec::with_capacity(slabs.len());
    let mut qr = Vec::with_capacity(slabs.len());
    for s in slabs {
        let (a, b) = s?;
        ql.push(a);
        qr.push(b);
    }
    QuadratureDataTensors::from_slabs(contour.clone(), probes.clone(), ql, qr)
}

fn node_error(e: Error, index: usize, node: c64) -> Error {
    match e {
        Error::PointSingular { .. } | Error::LinAlg(_) => Error::NodeSingular { index, node },
        other => other,
    }
}

impl QuadratureDataTensors {
    pub fn from_slabs(
        contour: ContourQuadrature,
        probes: ProbingConfig,
        ql: Vec<CMat>,
        qr: Vec<CMat>,
    ) -> Result<Self> {
        let nn = contour.len();
        if ql.len() != nn || qr.len() != nn {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes but {} / {} slabs",
                nn,
                ql.len(),
                qr.len()
            )));
        }
        for k in 0..nn {
            if ql[k].nrows() != probes.ell() || ql[k].ncols() != probes.n_in() {
                return Err(Error::DimensionMismatch(format!(
                    "left slab {k} has wrong shape"
                )));
            }
            if qr[k].nrows() != probes.n_out() || qr[k].ncols() != probes.r_count() {
                return Err(Error::DimensionMismatch(format!(
                    "right slab {k} has wrong shape"
                )));
            }
        }
        let qlr = ql
            .iter()
            .map(|q| linalg::matmul(q.as_ref(), probes.r.as_ref()))
            .collect();
        Ok(Self {
            contour,
            probes,
            ql,
            qr,
            qlr,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.contour.len()
    }

    pub fn n_in(&self) -> usize {
        self.probes.n_in()
    }

    pub fn n_out(&self) -> usize {
        self.probes.n_out()
    }

    pub fn ell(&self) -> usize {
        self.probes.ell()
    }

    pub fn r_count(&self) -> usize {
        self.probes.r_count()
    }

    /// Largest relative mismatch `‖L^* QR_k − QL_k R‖_F / ‖QL_k R‖_F` over the nodes.
    pub fn consistency_error(&self) -> f64 {
        let la = linalg::adjoint(self.probes.l.as_ref());
        (0..self.n_nodes())
            .map(|k| {
                let lhs = linalg::matmul(la.as_ref(), self.qr[k].as_ref());
                let d = linalg::fro_norm(linalg::sub(lhs.as_ref(), self.qlr[k].as_ref()).as_ref());
                let s = linalg::fro_norm(self.qlr[k].as_ref());
                if s > 0.0 {
                    d / s
                } else {
                    d
                }
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_k f(ζ_k) w_k QL_k`, `Σ_k f(ζ_k) w_k QR_k` or `Σ_k f(ζ_k) w_k QL_k R`, summed in node order.
    pub fn weighted_sum(&self, which: Slab, f: impl Fn(c64) -> c64) -> CMat {
        let slabs = match which {
            Slab::Left => &self.ql,
            Slab::Right => &self.qr,
            Slab::TwoSided => &self.qlr,
        };
        let mut acc = Mat::zeros(slabs[0].nrows(), slabs[0].ncols());
        for (k, s) in slabs.iter().enumerate() {
            let c = self.contour.weights[k] * f(self.contour.nodes[k]);
            linalg::axpy(&mut acc, c, s.as_ref());
        }
        acc
    }

    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [
            self.n_in() as u64,
            self.n_out() as u64,
            self.ell() as u64,
            self.r_count() as u64,
            self.n_nodes() as u64,
            self.probes.seed.unwrap_or(u64::MAX),
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        match &self.contour.kind {
            ContourKind::Circle { center, radius } => {
                w.write_all(&[1u8])?;
                write_f64s(w, &[center.re, center.im, *radius])?;
            }
            ContourKind::Ellipse {
                center,
                semi_axes: (a, b),
            } => {
                w.write_all(&[2u8])?;
                write_f64s(w, &[center.re, center.im, *a, *b])?;
            }
            ContourKind::Custom { .. } => w.write_all(&[3u8])?,
        }
        write_complex(w, &self.contour.nodes)?;
        write_complex(w, &self.contour.weights)?;
        write_matrix(w, self.probes.l.as_ref())?;
        write_matrix(w, self.probes.r.as_ref())?;
        for q in &self.ql {
            write_matrix(w, q.as_ref())?;
        }
        for q in &self.qr {
            write_matrix(w, q.as_ref())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse(
                "not a quadrature data file (bad magic)".into(),
            ));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Parse(format!(
                "unsupported quadrature data version {version}"
            )));
        }
        let mut dims = [0u64; 6];
        for d in dims.iter_mut() {
            *d = read_u64(r)?;
        }
        let [n_in, n_out, ell, rr, nn, seed] = dims;
        let (n_in, n_out, ell, rr, nn) = (
            n_in as usize,
            n_out as usize,
            ell as usize,
            rr as usize,
            nn as usize,
        );
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let params = match tag[0] {
            1 => read_f64s(r, 3)?,
            2 => read_f64s(r, 4)?,
            3 => Vec::new(),
            t => return Err(Error::Parse(format!("unknown contour tag {t}"))),
        };
        let nodes = read_complex(r, nn)?;
        let weights = read_complex(r, nn)?;
        let kind = match tag[0] {
            1 => ContourKind::Circle {
                center: c64::new(params[0], params[1]),
                radius: params[2],
            },
            2 => ContourKind::Ellipse {
                center: c64::new(params[0], params[1]),
                semi_axes: (params[2], params[3]),
            },
            _ => ContourKind::Custom {
                nodes: nodes.clone(),
                weights: weights.clone(),
            },
        };
        let contour = ContourQuadrature {
            kind,
            nodes,
            weights,
        };
        let l = read_matrix(r, n_out, ell)?;
        let rm = read_matrix(r, n_in, rr)?;
        let ql = (0..nn)
            .map(|_| read_matrix(r, ell, n_in))
            .collect::<Result<Vec<_>>>()?;
        let qr = (0..nn)
            .map(|_| read_matrix(r, n_out, rr))
            .collect::<Result<Vec<_>>>()?;
        let probes = ProbingConfig {
            l,
            r: rm,
            seed: (seed != u64::MAX).then_some(seed),
        };
        Self::from_slabs(contour, probes, ql, qr)
    }

    pub fn to_json(&self) -> TensorsJson {
        TensorsJson {
            schema: 1,
            contour: self.contour.clone(),
            seed: self.probes.seed,
            l: matrix_rows(self.probes.l.as_ref()),
            r: matrix_rows(self.probes.r.as_ref()),
            ql: self.ql.iter().map(|q| matrix_rows(q.as_ref())).collect(),
            qr: self.qr.iter().map(|q| matrix_rows(q.as_ref())).collect(),
        }
    }

    pub fn from_json(j: TensorsJson) -> Result<Self> {
        let probes = ProbingConfig {
            l: rows_matrix(&j.l)?,
            r: rows_matrix(&j.r)?,
            seed: j.seed,
        };
        let ql =
            j.ql.iter()
                .map(|q| rows_matrix(q))
                .collect::<Result<Vec<_>>>()?;
        let qr =
            j.qr.iter()
                .map(|q| rows_matrix(q))
                .collect::<Result<Vec<_>>>()?;
        Self::from_slabs(j.contour, probes, ql, qr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slab {
    Left,
    Right,
    TwoSided,
}

/// JSON form of the tensors; matrices are lists of rows of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorsJson {
    pub schema: u32,
    pub contour: ContourQuadrature,
    pub seed: Option<u64>,
    pub l: Vec<Vec<c64>>,
    pub r: Vec<Vec<c64>>,
    pub ql: Vec<Vec<Vec<c64>>>,
    pub qr: Vec<Vec<Vec<c64>>>,
}

pub fn matrix_rows(a: MatRef<'_, c64>) -> Vec<Vec<c64>> {
    (0..a.nrows()).map(|i| linalg::row(a, i)).collect()
}

pub fn rows_matrix(rows: &[Vec<c64>]) -> Result<CMat> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(linalg::from_rows(rows))
}

const MAGIC: &[u8; 4] = b"CEQD";
const VERSION: u32 = 1;

fn write_f64s(w: &mut impl Write, v: &[f64]) -> Result<()> {
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn write_complex(w: &mut impl Write, v: &[c64]) -> Result<()> {
    for z in v {
        write_f64s(w, &[z.re, z.im])?;
    }
    Ok(())
}

fn write_matrix(w: &mut impl Write, a: MatRef<'_, c64>) -> Result<()> {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            write_f64s(w, &[a[(i, j)].re, a[(i, j)].im])?;
        }
    }
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}

fn read_complex(r: &mut impl Read, n: usize) -> Result<Vec<c64>> {
    let v = read_f64s(r, 2 * n)?;
    Ok(v.chunks(2).map(|p| c64::new(p[0], p[1])).collect())
}

fn read_matrix(r: &mut impl Read, rows: usize, cols: usize) -> Result<CMat> {
    let v = read_complex(r, rows * cols)?;
    Ok(Mat::from_fn(rows, cols, |i, j| v[i * cols + j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::DenseProblem;
    use crate::problems::CombinedProblem;

    fn scalar(lambda: f64) -> impl NlevpProblem {
        CombinedProblem::scalar_polynomial(&[c64::new(-lambda, 0.0), c64::new(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn scalar_resolvent_slabs() {
        let q = ContourQuadrature::circle(c64::new(0.0, 0.0), 1.0, 4).unwrap();
        let probes = ProbingConfig::canonical(1, 1, 1).unwrap();
        let data = compute_quadrature_data(&scalar(2.0), &q, &probes).unwrap();
        for k in 0..4 {
            let expect = 1.0 / (q.nodes[k] - 2.0);
            assert!((data.qr[k][(0, 0)] - expect).norm() < 1e-15);
        }
        // the node ζ = 1 is the last one
        assert!((data.qr[3][(0, 0)] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn node_on_eigenvalue_is_reported() {
        let q = ContourQuadrature::circle(c64::new(0.0, 0.0), 1.0, 4).unwrap();
        let probes = ProbingConfig::canonical(1, 1, 1).unwrap();
        let err = compute_quadrature_data(&scalar(1.0), &q, &probes).unwrap_err();
        match err {
            Error::NodeSingular { index, node } => {
                assert_eq!(index, 3);
                assert!((node - 1.0).norm() < 1e-15);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn binary_round_trip() {
        let q = ContourQuadrature::circle(c64::new(0.5, -0.25), 1.0, 6).unwrap();
        let p = DenseProblem::new(3, |z| {
            Mat::from_fn(3, 3, |i, j| {
                if i == j {
                    z - (i as f64) * 0.9
                } else {
                    c64::new(0.1 * (i + j) as f64, 0.2)
                }
            })
        });
        let probes = ProbingConfig::random(3, 2, 2, 9).unwrap();
        let data = compute_quadrature_data(&p, &q, &probes).unwrap();
        assert!(data.consistency_error() < 1e-12);
        let mut buf = Vec::new();
        data.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"CEQD");
        let back = QuadratureDataTensors::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back.contour, data.contour);
        assert_eq!(back.probes.seed, Some(9));
        for k in 0..6 {
            assert_eq!(back.ql[k], data.ql[k]);
            assert_eq!(back.qr[k], data.qr[k]);
        }
        let json = serde_json::to_string(&data.to_json()).unwrap();
        let back = QuadratureDataTensors::from_json(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.qr[2], data.qr[2]);
    }
}
