//! Batch front end: reads a JSON run manifest, runs one study, writes CSV and JSON results.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nlevp_contour::contour::ContourQuadrature;
use nlevp_contour::filters::filter_profile;
use nlevp_contour::io::{
    write_eigenvalues_csv, write_residuals_csv, write_singular_values_csv, write_sweep_csv,
    RunSummary,
};
use nlevp_contour::loewner_multi::{build_multipoint_from_data, PoleResidueJson};
use nlevp_contour::loewner_single::build_single_point_pencil;
use nlevp_contour::modal::{modal_truncate, LtiTransferSource};
use nlevp_contour::moments::{markov_moments, markov_moments_scaled, sigma_moments};
use nlevp_contour::problems::{delay_eigen_oracle, BuiltProblem};
use nlevp_contour::quadrature::compute_quadrature_data;
use nlevp_contour::realize::SingularValueReport;
use nlevp_contour::residual::Method;
use nlevp_contour::solver::{
    sweep_nodes, sweep_ratio, sweep_sigma, FilterSpec, ProbingSpec, RunConfig, SweepSpec,
};
use nlevp_contour::{filters, hankel, loewner_single, Error, Result};
use num_complex::Complex64 as c64;

#[derive(Parser)]
#[command(
    name = "nlevp",
    version,
    about = "Contour-integral eigensolvers for nonlinear eigenvalue problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the eigenvalues inside the contour.
    Solve,
    /// Sweep σ, the point-circle ratio, or N as given by the manifest's `sweep` entry.
    Sweep,
    /// Evaluate a rational filter function on the manifest's `filter` grid.
    FilterProfile,
    /// Modal truncation of the state-space system named in the manifest's `modal` entry.
    Modal,
    /// Ground-truth eigenvalues of a delay problem inside the contour.
    Oracle,
    /// Singular values of the Hankel or Loewner matrix with the suggested rank.
    SvdReport,
}

#[derive(Args)]
struct Overrides {
    /// JSON run manifest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// hankel, loewner1, loewnerN or direct.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Number of quadrature nodes.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Moment block count, or the point count of the default multi-point scheme.
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Interpolation point as RE,IM.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sigma: Option<String>,
    /// Seed for the probing matrices.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the per-node solves.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

/// Exit status of a run that did not error.
enum Outcome {
    Done,
    Empty,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Empty) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn parse_complex(s: &str) -> Result<c64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number '{t}' in '{s}'")))
    };
    match parts.as_slice() {
        [re] => Ok(c64::new(num(re)?, 0.0)),
        [re, im] => Ok(c64::new(num(re)?, num(im)?)),
        _ => Err(Error::Parse(format!("expected RE,IM, got '{s}'"))),
    }
}

fn load_config(o: &Overrides) -> Result<(RunConfig, PathBuf)> {
    let path = o
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--config is required".into()))?;
    let mut cfg = RunConfig::from_file(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    if let Some(m) = &o.method {
        cfg.params.method = m.parse()?;
    }
    if let Some(n) = o.n {
        cfg.n = n;
    }
    if let Some(k) = o.k {
        cfg.params.k = k;
    }
    if let Some(s) = &o.sigma {
        cfg.params.sigma = Some(parse_complex(s)?);
    }
    if let Some(seed) = o.seed {
        let mut p = cfg.probing.clone().unwrap_or(ProbingSpec {
            ell: 1,
            r: 1,
            seed: 0,
        });
        p.seed = seed;
        cfg.probing = Some(p);
    }
    Ok((cfg, base))
}

fn build_problem(cfg: &RunConfig, base: &Path) -> Result<BuiltProblem> {
    cfg.problem
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the manifest has no 'problem' entry".into()))?
        .build(Some(base))
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn write_json(out: &Path, name: &str, value: &impl serde::Serialize) -> Result<()> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let (cfg, base) = load_config(&cli.opts)?;
    fs::create_dir_all(&cli.opts.out)?;
    let out = cli.opts.out.as_path();
    match cli.command {
        Command::Solve => cmd_solve(&cfg, &base, out),
        Command::Sweep => cmd_sweep(&cfg, &base, out),
        Command::FilterProfile => cmd_filter_profile(&cfg, out),
        Command::Modal => cmd_modal(&cfg, &base, out),
        Command::Oracle => cmd_oracle(&cfg, &base, out),
        Command::SvdReport => cmd_svd_report(&cfg, &base, out),
    }
}

fn cmd_solve(cfg: &RunConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let start = Instant::now();
    let built = build_problem(cfg, base)?;
    let problem = built.as_dyn();
    let contour = cfg.contour_quadrature()?;
    let probes = cfg.probes(problem.dim(), problem.dim())?;
    let sol = nlevp_contour::solver::solve(problem, &contour, &probes, &cfg.params)?;
    let wall = start.elapsed().as_secs_f64();
    write_eigenvalues_csv(&sol, create(out, "eigenvalues.csv")?)?;
    write_residuals_csv(&sol, create(out, "residuals.csv")?)?;
    write_singular_values_csv(&sol.singular_values, create(out, "singular_values.csv")?)?;
    write_json(
        out,
        "summary.json",
        &RunSummary::new(&sol, contour.describe(), cfg.n, wall),
    )?;
    for w in &sol.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{}: {} eigenvalues (rank {}), max residual {:.3e}",
        sol.method.as_str(),
        sol.len(),
        sol.rank_used,
        sol.max_residual()
    );
    Ok(if sol.is_empty() {
        Outcome::Empty
    } else {
        Outcome::Done
    })
}

fn cmd_sweep(cfg: &RunConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the manifest has no 'sweep' entry".into()))?;
    let built = build_problem(cfg, base)?;
    let problem = built.as_dyn();
    let probes = cfg.probes(problem.dim(), problem.dim())?;
    let rows = match sweep {
        SweepSpec::Sigma { values } => {
            let data = compute_quadrature_data(problem, &cfg.contour_quadrature()?, &probes)?;
            sweep_sigma(Some(problem), &data, &cfg.params, values)
        }
        SweepSpec::Ratio { values } => {
            let data = compute_quadrature_data(problem, &cfg.contour_quadrature()?, &probes)?;
            sweep_ratio(Some(problem), &data, &cfg.params, values)
        }
        SweepSpec::Nodes { values } => {
            sweep_nodes(problem, &cfg.contour, &probes, &cfg.params, values)
        }
    };
    write_sweep_csv(&rows, create(out, "sweep.csv")?)?;
    println!(
        "sweep: {} rows, {} skipped",
        rows.len(),
        rows.iter().filter(|r| r.skipped).count()
    );
    Ok(Outcome::Done)
}

fn cmd_filter_profile(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg
        .filter
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the manifest has no 'filter' entry".into()))?;
    let rule = cfg.contour_quadrature()?;
    let (kind, grid) = match spec {
        FilterSpec::Line {
            kind,
            start,
            end,
            count,
        } => (*kind, filters::line_grid(*start, *end, *count)),
        FilterSpec::Points { kind, points } => (*kind, points.clone()),
    };
    let profile = filter_profile(&rule, kind, &grid)?;
    profile.write_csv(create(out, "filter_profile.csv")?)?;
    println!("filter profile: {} points", profile.values.len());
    Ok(Outcome::Done)
}

fn cmd_modal(cfg: &RunConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let spec = cfg
        .modal
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the manifest has no 'modal' entry".into()))?;
    let source = LtiTransferSource::from_matrix_market(
        base.join(&spec.a),
        base.join(&spec.b),
        base.join(&spec.c),
    )?;
    let contour = cfg.contour_quadrature()?;
    let probes = cfg.probes(source.n_out(), source.n_in())?;
    let scheme = cfg
        .params
        .resolve_scheme(&contour, probes.ell(), probes.r_count())?;
    let rom = modal_truncate(&source, &contour, &scheme, &probes, &cfg.params.rank)?;
    write_json(out, "rom.json", &PoleResidueJson::from(&rom.rom))?;
    write_singular_values_csv(&rom.singular_values, create(out, "singular_values.csv")?)?;
    for w in &rom.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "modal: {} retained poles (rank {})",
        rom.poles().len(),
        rom.rank
    );
    Ok(if rom.poles().is_empty() {
        Outcome::Empty
    } else {
        Outcome::Done
    })
}

fn cmd_oracle(cfg: &RunConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let BuiltProblem::Delay(problem) = build_problem(cfg, base)? else {
        return Err(Error::InvalidArgument(
            "the oracle subcommand needs a delay problem".into(),
        ));
    };
    let region = cfg.contour_quadrature()?;
    let oracle = delay_eigen_oracle(&problem, &region);
    let mut w = create(out, "oracle.csv")?;
    writeln!(w, "component,re,im,residual")?;
    for r in &oracle.roots {
        writeln!(
            w,
            "{},{:e},{:e},{:e}",
            r.component, r.value.re, r.value.im, r.residual
        )?;
    }
    if !oracle.flagged.is_empty() {
        eprintln!(
            "warning: components {:?} produced no accepted root",
            oracle.flagged
        );
    }
    println!(
        "oracle: {} eigenvalues inside the contour",
        oracle.roots.len()
    );
    Ok(if oracle.roots.is_empty() {
        Outcome::Empty
    } else {
        Outcome::Done
    })
}

fn svd_report(
    cfg: &RunConfig,
    problem: &BuiltProblem,
    contour: &ContourQuadrature,
) -> Result<SingularValueReport> {
    let problem = problem.as_dyn();
    let params = &cfg.params;
    if params.k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let probes = cfg.probes(problem.dim(), problem.dim())?;
    let data = compute_quadrature_data(problem, contour, &probes)?;
    match params.method {
        Method::Hankel => {
            let kmax = 2 * params.k - 1;
            let moments = if params.scaled_moments {
                markov_moments_scaled(&data, kmax, contour.center(), contour.scale())?
            } else {
                markov_moments(&data, kmax)
            };
            let (pair, _) = hankel::build_hankel(&moments, params.k)?;
            hankel::singular_value_report(&pair, &params.rank)
        }
        Method::Loewner1 => {
            let sigma = params.sigma.unwrap_or_else(|| contour.default_sigma());
            let moments = sigma_moments(&data, sigma, 2 * params.k - 1)?;
            let pencil = build_single_point_pencil(&moments, params.k)?;
            loewner_single::singular_value_report(&pencil, &params.rank)
        }
        Method::LoewnerN => {
            let scheme = params.resolve_scheme(contour, data.ell(), data.r_count())?;
            build_multipoint_from_data(&data, &scheme)?.singular_value_report(&params.rank)
        }
        Method::Direct => Err(Error::InvalidArgument(
            "svd-report needs a contour method".into(),
        )),
    }
}

fn cmd_svd_report(cfg: &RunConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let built = build_problem(cfg, base)?;
    let contour = cfg.contour_quadrature()?;
    let report = svd_report(cfg, &built, &contour)?;
    write_singular_values_csv(&report.values, create(out, "singular_values.csv")?)?;
    write_json(out, "svd_report.json", &report)?;
    println!(
        "{}: suggested rank {} of {}",
        cfg.params.method.as_str(),
        report.suggested_rank,
        report.values.len()
    );
    Ok(if report.suggested_rank == 0 {
        Outcome::Empty
    } else {
        Outcome::Done
    })
}
