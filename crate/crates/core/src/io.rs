//! CSV and JSON exports of solver results.

use std::io::Write;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::residual::EigenSolution;
use crate::solver::SweepRow;

/// Columns `index, re, im, residual`.
pub fn write_eigenvalues_csv<W: Write>(sol: &EigenSolution, mut out: W) -> Result<()> {
    writeln!(out, "index,re,im,residual")?;
    for (i, l) in sol.eigenvalues.iter().enumerate() {
        let r = sol.residuals.get(i).copied().unwrap_or(f64::NAN);
        writeln!(out, "{i},{:e},{:e},{:e}", l.re, l.im, r)?;
    }
    Ok(())
}

/// Columns `index, residual, relative_residual` (empty when unavailable).
pub fn write_residuals_csv<W: Write>(sol: &EigenSolution, mut out: W) -> Result<()> {
    writeln!(out, "index,residual,relative_residual")?;
    for (i, r) in sol.residuals.iter().enumerate() {
        let rel = sol
            .relative_residuals
            .as_ref()
            .map(|v| format!("{:e}", v[i]))
            .unwrap_or_default();
        writeln!(out, "{i},{r:e},{rel}")?;
    }
    Ok(())
}

/// Columns `index, value`.
pub fn write_singular_values_csv<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:e}")?;
    }
    Ok(())
}

/// Columns `value_re, value_im, skipped, rank, count, max_residual, note`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(
        out,
        "value_re,value_im,skipped,rank,count,max_residual,note"
    )?;
    for r in rows {
        let note = r.note.as_deref().unwrap_or("").replace(['"', ','], " ");
        writeln!(
            out,
            "{:e},{:e},{},{},{},{:e},{}",
            r.value.re, r.value.im, r.skipped, r.rank, r.count, r.max_residual, note
        )?;
    }
    Ok(())
}

/// Versioned run summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub method: String,
    pub contour: String,
    pub n_nodes: usize,
    pub rank: usize,
    pub count: usize,
    pub max_residual: f64,
    pub eigenvalues: Vec<c64>,
    pub singular_values: Vec<f64>,
    pub eigvec_condition: f64,
    pub approximate: bool,
    pub dropped: usize,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

pub const SUMMARY_SCHEMA: u32 = 1;

impl RunSummary {
    pub fn new(sol: &EigenSolution, contour: String, n_nodes: usize, wall_time_s: f64) -> Self {
        Self {
            schema: SUMMARY_SCHEMA,
            method: sol.method.as_str().to_string(),
            contour,
            n_nodes,
            rank: sol.rank_used,
            count: sol.len(),
            max_residual: sol.max_residual(),
            eigenvalues: sol.eigenvalues.clone(),
            singular_values: sol.singular_values.clone(),
            eigvec_condition: sol.eigvec_condition,
            approximate: sol.approximate,
            dropped: sol.dropped,
            warnings: sol.warnings.clone(),
            wall_time_s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::Method;

    #[test]
    fn eigenvalue_csv_layout() {
        let mut sol = EigenSolution::empty(Method::Hankel, 2, vec![1.0]);
        sol.eigenvalues = vec![c64::new(0.5, -1.0)];
        sol.residuals = vec![1e-12];
        let mut buf = Vec::new();
        write_eigenvalues_csv(&sol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,re,im,residual");
        let f: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f, vec![0.0, 0.5, -1.0, 1e-12]);
    }

    #[test]
    fn summary_is_versioned() {
        let sol = EigenSolution::empty(Method::Loewner1, 3, vec![]);
        let s = RunSummary::new(&sol, "circle".into(), 32, 0.0);
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["schema"], 1);
        assert_eq!(j["method"], "loewner1");
    }
}
