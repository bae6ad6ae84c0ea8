use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn nlevp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlevp"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

const PLANTED: [[f64; 2]; 2] = [[0.3, 0.1], [-0.2, -0.4]];

fn planted_config(method: &str) -> Value {
    json!({
        "problem": {
            "type": "planted",
            "n": 8,
            "m": 2,
            "spectrum": {"type": "given", "values": PLANTED},
            "dependency": {"type": "independent"},
            "remainder": {"type": "polynomial", "degree": 2, "scale": 1.0},
            "seed": 3
        },
        "contour": {"type": "circle", "center": [0.0, 0.0], "radius": 1.0},
        "n": 64,
        "probing": {"ell": 2, "r": 2, "seed": 1},
        "method": method,
        "k": 1
    })
}

/// Rows of a CSV with a header, parsed as floats where possible.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn eigenvalues(dir: &Path) -> Vec<(f64, f64, f64)> {
    csv_rows(&dir.join("eigenvalues.csv"))
        .iter()
        .map(|r| {
            (
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
                r[3].parse().unwrap(),
            )
        })
        .collect()
}

fn matches_planted(vals: &[(f64, f64, f64)], tol: f64) -> bool {
    vals.len() == PLANTED.len()
        && PLANTED
            .iter()
            .all(|p| vals.iter().any(|v| (v.0 - p[0]).hypot(v.1 - p[1]) <= tol))
}

#[test]
fn solve_planted_with_hankel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", &planted_config("hankel"));
    let out = nlevp(dir.path(), &["solve", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let vals = eigenvalues(dir.path());
    assert!(matches_planted(&vals, 1e-8), "{vals:?}");
    assert!(vals.iter().all(|v| v.2 <= 1e-8));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema"], 1);
    assert_eq!(summary["method"], "hankel");
    assert_eq!(summary["n_nodes"], 64);
    assert_eq!(summary["rank"], 2);
    for f in ["residuals.csv", "singular_values.csv"] {
        assert!(dir.path().join(f).exists());
    }
}

#[test]
fn loewner1_with_default_sigma_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", &planted_config("loewner1"));
    // At N = 64 the default σ (4/3 radius) leaves an O(N·(3/4)^N·‖N(σ)‖) moment error near 1e-4.
    let out = nlevp(dir.path(), &["solve", "--config", &cfg, "--N", "128"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(matches_planted(&eigenvalues(dir.path()), 1e-8));
}

#[test]
fn flags_override_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", &planted_config("hankel"));
    let out = nlevp(
        dir.path(),
        &[
            "solve", "--config", &cfg, "--method", "loewnerN", "--N", "128", "--K", "2", "--seed",
            "9",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["method"], "loewnerN");
    assert_eq!(summary["n_nodes"], 128);
    assert!(matches_planted(&eigenvalues(dir.path()), 1e-8));

    let out = nlevp(
        dir.path(),
        &[
            "solve", "--config", &cfg, "--method", "loewner1", "--sigma", "0,-2", "--N", "128",
        ],
    );
    assert!(out.status.success());
    assert!(matches_planted(&eigenvalues(dir.path()), 1e-8));
}

#[test]
fn reruns_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), "run.json", &planted_config("loewnerN"));
    for d in [&a, &b] {
        assert!(
            nlevp(d.path(), &["solve", "--config", &cfg, "--threads", "2"])
                .status
                .success()
        );
    }
    for f in ["eigenvalues.csv", "residuals.csv", "singular_values.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn contour_through_an_eigenvalue_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "problem": {"type": "polynomial", "coefficients": [[[[-0.5, 0.0]]], [[[1.0, 0.0]]]]},
        "contour": {"type": "circle", "center": [0.0, 0.0], "radius": 0.5},
        "n": 8,
        "method": "hankel"
    });
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let out = nlevp(dir.path(), &["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular at quadrature node"));
}

#[test]
fn empty_region_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = planted_config("hankel");
    cfg["contour"] = json!({"type": "circle", "center": [5.0, 0.0], "radius": 0.5});
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let out = nlevp(dir.path(), &["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(eigenvalues(dir.path()).is_empty());
}

#[test]
fn invalid_manifest_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"contour\": 3}").unwrap();
    let out = nlevp(dir.path(), &["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = nlevp(dir.path(), &["solve"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sigma_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = planted_config("loewner1");
    cfg["n"] = json!(128);
    cfg["sweep"] =
        json!({"type": "sigma", "values": [[1.5, 0.0], [0.0, 2.0], [-1.8, -0.3], [0.1, 0.0]]});
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let out = nlevp(dir.path(), &["sweep", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows[..3] {
        assert_eq!(r[2], "false");
        assert_eq!(r[4], "2");
        assert!(r[5].parse::<f64>().unwrap() <= 1e-8, "{r:?}");
    }
    assert_eq!(rows[3][2], "true");
}

#[test]
fn node_sweep_residuals_decrease() {
    let dir = tempfile::tempdir().unwrap();
    // With a polynomial remainder the unit-circle Hankel data is exact at every N, so the
    // remainder gets poles outside the contour to give the quadrature something to resolve.
    let mut cfg = planted_config("hankel");
    cfg["problem"]["remainder"] =
        json!({"type": "rational", "poles": [[1.5, 0.0], [0.0, -1.6]], "rank": 3, "scale": 1.0});
    cfg["sweep"] = json!({"type": "nodes", "values": [16, 32, 64]});
    let cfg = write_config(dir.path(), "run.json", &cfg);
    assert!(nlevp(dir.path(), &["sweep", "--config", &cfg])
        .status
        .success());
    let res: Vec<f64> = csv_rows(&dir.path().join("sweep.csv"))
        .iter()
        .map(|r| r[5].parse().unwrap())
        .collect();
    assert_eq!(res.len(), 3);
    assert!(res[1] < res[0] && res[2] < res[1], "{res:?}");
}

#[test]
fn filter_profile_on_a_ray() {
    let dir = tempfile::tempdir().unwrap();
    // The ray avoids the node at z = 1.
    let end = [2.0 * 0.1f64.cos(), 2.0 * 0.1f64.sin()];
    let cfg = json!({
        "contour": {"type": "circle", "center": [0.0, 0.0], "radius": 1.0},
        "n": 64,
        "method": "hankel",
        "filter": {"type": "line", "kind": {"type": "hankel", "k": 0}, "start": [0.0, 0.0], "end": end, "count": 201}
    });
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let out = nlevp(dir.path(), &["filter-profile", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&dir.path().join("filter_profile.csv"));
    assert_eq!(rows.len(), 201);
    let abs0: f64 = rows[0][4].parse().unwrap();
    let abs_end: f64 = rows[200][4].parse().unwrap();
    assert!((abs0 - 1.0).abs() < 1e-14);
    assert!(abs_end < 1e-15);
}

fn write_mm(path: &Path, rows: &[&[f64]]) {
    let mut s = format!(
        "%%MatrixMarket matrix array real general\n{} {}\n",
        rows.len(),
        rows[0].len()
    );
    for j in 0..rows[0].len() {
        for r in rows {
            s.push_str(&format!("{}\n", r[j]));
        }
    }
    fs::write(path, s).unwrap();
}

#[test]
fn modal_diagonal_system() {
    let dir = tempfile::tempdir().unwrap();
    write_mm(&dir.path().join("a.mtx"), &[&[-0.5, 0.0], &[0.0, -3.0]]);
    write_mm(&dir.path().join("b.mtx"), &[&[1.0], &[1.0]]);
    write_mm(&dir.path().join("c.mtx"), &[&[1.0, 1.0]]);
    let cfg = json!({
        "contour": {"type": "circle", "center": [-0.5, 0.0], "radius": 1.0},
        "n": 128,
        "method": "loewnerN",
        "modal": {"a": "a.mtx", "b": "b.mtx", "c": "c.mtx"}
    });
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let out = nlevp(dir.path(), &["modal", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rom: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rom.json")).unwrap()).unwrap();
    assert_eq!(rom["schema"], 1);
    let poles = rom["poles"].as_array().unwrap();
    assert_eq!(poles.len(), 1);
    assert!((poles[0][0].as_f64().unwrap() + 0.5).abs() < 1e-10);
    assert!(poles[0][1].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn delay_oracle_finds_the_rightmost_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "problem": {"type": "delay"},
        "contour": {"type": "circle", "center": [-0.0625, 0.0], "radius": 0.07},
        "method": "hankel"
    });
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let out = nlevp(dir.path(), &["oracle", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(csv_rows(&dir.path().join("oracle.csv")).len(), 11);

    let mut planted = planted_config("hankel");
    planted["problem"]["n"] = json!(8);
    let cfg = write_config(dir.path(), "planted.json", &planted);
    assert_eq!(
        nlevp(dir.path(), &["oracle", "--config", &cfg])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn svd_report_suggests_the_planted_rank() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", &planted_config("loewner1"));
    let out = nlevp(
        dir.path(),
        &["svd-report", "--config", &cfg, "--K", "2", "--N", "128"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("svd_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["suggested_rank"], 2);
    assert_eq!(report["values"].as_array().unwrap().len(), 4);
}
