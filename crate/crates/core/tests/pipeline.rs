use nlevp_contour::contour::ContourQuadrature;
use nlevp_contour::linalg;
use nlevp_contour::loewner_multi::{direct_resolvent_pencil, InterpolationScheme};
use nlevp_contour::modal::{
    modal_truncate, random_stable_poles, random_system, spectral_truncation, LtiTransferSource,
};
use nlevp_contour::probing::ProbingConfig;
use nlevp_contour::problem::NlevpProblem;
use nlevp_contour::problems::{
    default_delay_contour, delay_eigen_oracle, make_planted_problem, CombinedProblem, DelayProblem,
    PlantedSpec, Spectrum,
};
use nlevp_contour::quadrature::{compute_quadrature_data, QuadratureDataTensors};
use nlevp_contour::realize::RankPolicy;
use nlevp_contour::residual::Method;
use nlevp_contour::solver::{
    solve, solve_with_data, sweep_sigma, MethodParams, RunConfig, SchemeSpec,
};
use nlevp_contour::Error;
use num_complex::Complex64 as c64;

fn r(x: f64) -> c64 {
    c64::new(x, 0.0)
}

fn nearest(set: &[c64], z: c64) -> f64 {
    set.iter()
        .map(|s| (s - z).norm())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn delay_rightmost_cluster_with_every_method() {
    let p = DelayProblem::default();
    let q = default_delay_contour(64).unwrap();
    let oracle = delay_eigen_oracle(&p, &q).eigenvalues();
    assert_eq!(oracle.len(), 11);
    let probes = ProbingConfig::random(p.dim(), 11, 11, 7).unwrap();
    let data = compute_quadrature_data(&p, &q, &probes).unwrap();
    for params in [
        MethodParams::new(Method::Hankel),
        MethodParams::new(Method::Loewner1).with_sigma(r(0.5)),
        MethodParams::new(Method::LoewnerN).with_scheme(SchemeSpec::Concentric {
            points: Some(1),
            directions: Some(11),
            ratio: Some((0.5 - q.center().re) / q.scale()),
            hermite: true,
        }),
    ] {
        let sol = solve_with_data(Some(&p), &data, &params).unwrap();
        assert_eq!(sol.len(), 11, "{:?}", params.method);
        for &l in &sol.eigenvalues {
            assert!(nearest(&oracle, l) < 1e-10, "{:?}: {l}", params.method);
        }
        assert!(sol.max_residual() < 1e-10);
    }
}

#[test]
fn tensors_survive_a_binary_round_trip() {
    let p = make_planted_problem(PlantedSpec::standard(6, 2, 11)).unwrap();
    let q = ContourQuadrature::circle(r(0.0), 1.0, 16).unwrap();
    let probes = ProbingConfig::random(6, 2, 3, 5).unwrap();
    let data = compute_quadrature_data(&p, &q, &probes).unwrap();
    assert!(data.consistency_error() < 1e-12);
    let mut buf = Vec::new();
    data.write_binary(&mut buf).unwrap();
    let back = QuadratureDataTensors::read_binary(&mut buf.as_slice()).unwrap();
    assert_eq!(back.qlr, data.qlr);
    assert_eq!(back.contour, data.contour);
    let a = solve_with_data(None, &data, &MethodParams::new(Method::Hankel)).unwrap();
    let b = solve_with_data(None, &back, &MethodParams::new(Method::Hankel)).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
}

#[test]
fn direct_pencil_recovers_a_linear_problem() {
    let a = linalg::from_diag(&[r(1.0), r(3.0)]);
    let p = CombinedProblem::linear(a).unwrap();
    let probes = ProbingConfig::canonical(2, 2, 2).unwrap();
    let scheme = InterpolationScheme::new(
        vec![r(5.0), r(-2.0)],
        vec![0, 1],
        vec![c64::new(0.0, 4.0), r(7.0)],
        vec![0, 1],
    )
    .unwrap();
    let out = direct_resolvent_pencil(&p, &scheme, &probes).unwrap();
    assert!(out.solution.approximate);
    assert_eq!(out.solution.len(), 2);
    for want in [1.0, 3.0] {
        assert!(nearest(&out.solution.eigenvalues, r(want)) < 1e-12);
    }
}

#[test]
fn manifest_drives_a_solve() {
    let text = r#"{
        "problem": {"type": "planted", "n": 10, "m": 3,
                    "spectrum": {"type": "given", "values": [[0.2, 0.0], [-0.3, 0.3], [0.0, -0.5]]},
                    "dependency": {"type": "independent"},
                    "remainder": {"type": "polynomial", "degree": 2, "scale": 1.0},
                    "seed": 8},
        "contour": {"type": "circle", "center": [0.0, 0.0], "radius": 1.0},
        "n": 96,
        "probing": {"ell": 3, "r": 3, "seed": 2},
        "method": "loewnerN",
        "k": 2
    }"#;
    let cfg = RunConfig::from_json_str(text).unwrap();
    let built = cfg.problem.as_ref().unwrap().build(None).unwrap();
    let p = built.as_dyn();
    let sol = solve(
        p,
        &cfg.contour_quadrature().unwrap(),
        &cfg.probes(10, 10).unwrap(),
        &cfg.params,
    )
    .unwrap();
    assert_eq!(sol.len(), 3);
    for want in [r(0.2), c64::new(-0.3, 0.3), c64::new(0.0, -0.5)] {
        assert!(nearest(&sol.eigenvalues, want) < 1e-9);
    }
}

#[test]
fn sigma_sweep_reuses_one_tensor_set() {
    let mut spec = PlantedSpec::standard(8, 2, 21);
    spec.spectrum = Spectrum::Given {
        values: vec![r(0.25), c64::new(-0.1, 0.4)],
    };
    let p = make_planted_problem(spec).unwrap();
    let q = ContourQuadrature::circle(r(0.0), 1.0, 128).unwrap();
    let probes = ProbingConfig::random(8, 2, 2, 3).unwrap();
    let data = compute_quadrature_data(&p, &q, &probes).unwrap();
    let rows = sweep_sigma(
        Some(&p),
        &data,
        &MethodParams::new(Method::Loewner1),
        &[r(2.0), c64::new(0.0, -3.0), r(1.0)],
    );
    assert_eq!(rows.len(), 3);
    assert!(rows[..2]
        .iter()
        .all(|row| !row.skipped && row.count == 2 && row.max_residual < 1e-8));
    assert!(rows[2].skipped);
}

#[test]
fn modal_rom_matches_spectral_truncation() {
    let contour = ContourQuadrature::circle(r(-1.0), 0.5, 128).unwrap();
    let poles = random_stable_poles(r(-1.0), 0.5, 3, 12, 31).unwrap();
    let (a, b, c) = random_system(&poles, 2, 2, 32).unwrap();
    let oracle = spectral_truncation(&a, &b, &c, &contour).unwrap();
    let source = LtiTransferSource::state_space(a, b, c).unwrap();
    let probes = ProbingConfig::random_rect(2, 2, 2, 2, 33).unwrap();
    let scheme = InterpolationScheme::concentric(&contour, 3, 2, 4.0 / 3.0, true).unwrap();
    let rom = modal_truncate(
        &source,
        &contour,
        &scheme,
        &probes,
        &RankPolicy::quadrature(),
    )
    .unwrap();
    assert_eq!(rom.rank, 3);
    for z in [c64::new(0.3, 1.0), r(-3.0), c64::new(-1.0, 2.0)] {
        let d = linalg::sub(rom.eval(z).as_ref(), oracle.eval(z).as_ref());
        assert!(linalg::fro_norm(d.as_ref()) <= 1e-8 * linalg::fro_norm(oracle.eval(z).as_ref()));
    }
}

#[test]
fn contour_through_an_eigenvalue_is_reported() {
    let p = CombinedProblem::scalar_polynomial(&[r(-1.0), r(1.0)]).unwrap();
    let q = ContourQuadrature::circle(r(0.0), 1.0, 8).unwrap();
    let probes = ProbingConfig::canonical(1, 1, 1).unwrap();
    let err = solve(&p, &q, &probes, &MethodParams::new(Method::Hankel)).unwrap_err();
    assert!(matches!(err, Error::NodeSingular { .. }), "{err}");
}
