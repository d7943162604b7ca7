//! The `axb` command line: `solve`, `bench`, `verify` and `deblur`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::mtx::{read_matrix_market, read_matrix_market_dense};
use crate::harness::random::{random_problem, RandomSpec};
use crate::harness::trace::{trace_csv_string, write_trace_csv_with};
use crate::harness::trials::{format_summary_table, run_trials, summary_csv, ExperimentSpec, ProblemSource};
use crate::harness::verify::{bounds_csv, run_verify};
use crate::imaging::{
    blur_matrix, deblur, gaussian_kernel, psnr, synthetic_image, BlurModel, Boundary, CrossChannelMatrix, RgbImage,
};
use crate::linalg::DenseMat;
use crate::solvers::{solve, Method, Problem, SolverConfig, StepSize, StopRule};

#[derive(Parser, Debug)]
#[command(
    name = "axb",
    about = "Row-action (Kaczmarz-type) solvers for A X B = C",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one method on one problem.
    Solve(SolveArgs),
    /// Run repeated trials of several methods and print a summary table.
    Bench(BenchArgs),
    /// Check the bound, spectral-radius and sweep invariants.
    Verify(VerifyArgs),
    /// Blur an image and restore it.
    Deblur(DeblurArgs),
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    /// Step size, or `auto` for 1/||B||^2 (1/(||A||^2 ||B||^2) for GI).
    #[arg(long, default_value = "auto")]
    alpha: String,
    /// Greedy blend for RGRBK; comma-separated list for `bench`.
    #[arg(long, default_value = "0.5")]
    theta: String,
    /// Base random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-iters", default_value_t = 500_000)]
    max_iters: usize,
    /// Stopping rule `rse:TOL`, `update:TOL`, `update:auto` or `residual:TOL`.
    #[arg(long)]
    stop: Option<String>,
    /// Trace every this many steps (0 = final step only).
    #[arg(long = "trace-stride")]
    trace_stride: Option<usize>,
    /// Leave the wall-time column of traces empty (byte-reproducible output).
    #[arg(long = "no-wall")]
    no_wall: bool,
    /// Plain-text `key=value` file with defaults for these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ProblemFlags {
    /// Matrix Market file for A.
    #[arg(long)]
    a: Option<PathBuf>,
    /// Matrix Market file for B (identity when omitted).
    #[arg(long)]
    b: Option<PathBuf>,
    /// Matrix Market file for the reference solution X (C = A X B).
    #[arg(long)]
    x: Option<PathBuf>,
    /// Random problem `m,p,q,n`.
    #[arg(long)]
    random: Option<String>,
    /// Use A = [A0, A0].
    #[arg(long = "dup-a")]
    dup_a: bool,
    /// Use B = [B0; B0].
    #[arg(long = "dup-b")]
    dup_b: bool,
    /// Seed of the random problem.
    #[arg(long = "problem-seed", default_value_t = 1)]
    problem_seed: u64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, default_value = "BK")]
    method: String,
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Trace CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated methods.
    #[arg(long, default_value = "RBK,GRBK,MWRBK")]
    method: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    solver: SolverFlags,
    /// Summary CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Directory for `bounds.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DeblurArgs {
    #[arg(long, default_value = "MWRBK")]
    method: String,
    /// Input PPM; a synthetic image is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Side length of the synthetic image.
    #[arg(long, default_value_t = 32)]
    size: usize,
    /// `reflexive` or `zero`.
    #[arg(long, default_value = "reflexive")]
    boundary: String,
    #[arg(long = "kernel-size", default_value_t = 5)]
    kernel_size: usize,
    #[arg(long, default_value_t = 6.0)]
    sigma: f64,
    #[command(flatten)]
    solver: SolverFlags,
    /// Output directory for the images and trace.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage-type failures map to exit code 2.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::StepSize { .. } | Error::Theta(_) | Error::Invalid(_) | Error::DimensionMismatch(_) | Error::Parse { .. }
    )
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Turns `key=value` lines into flags placed right after the subcommand, so
/// that flags given on the command line (which come later) win.
fn config_tokens(path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(Error::Parse {
            line: idx + 1,
            msg: format!("expected key=value, got '{line}'"),
        })?;
        let key = k.trim().replace('_', "-");
        let val = v.trim();
        if key == "config" {
            continue;
        }
        match val.to_ascii_lowercase().as_str() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(val.into());
            }
        }
    }
    Ok(out)
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on failed invariants or runtime errors, 2 on usage errors.
pub fn cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&args) {
        match config_tokens(&path) {
            Ok(extra) if args.len() >= 2 => {
                args.splice(2..2, extra);
            }
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: config file {}: {e}", path.display());
                return 2;
            }
        }
    }
    let parsed = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match parsed.command {
        Command::Solve(a) => run_solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Verify(a) => run_verify_cmd(a),
        Command::Deblur(a) => run_deblur(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn parse_thetas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| Error::Invalid(format!("invalid theta '{t}'")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Theta(v));
            }
            Ok(v)
        })
        .collect()
}

fn solver_config(f: &SolverFlags, default_stop: StopRule) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default()
        .with_alpha(f.alpha.parse::<StepSize>()?)
        .with_theta(parse_thetas(&f.theta)?[0])
        .with_seed(f.seed)
        .with_max_iters(f.max_iters)
        .with_stop(match &f.stop {
            Some(s) => s.parse()?,
            None => default_stop,
        });
    cfg.trace_stride = f.trace_stride;
    cfg.validate()?;
    Ok(cfg)
}

fn build_problem(f: &ProblemFlags) -> Result<Problem> {
    match (&f.a, &f.random) {
        (Some(_), Some(_)) => Err(Error::Invalid("use either --a or --random".into())),
        (None, None) => Err(Error::Invalid("a problem is required: --a FILE or --random m,p,q,n".into())),
        (None, Some(spec)) => {
            let dims: Vec<usize> = spec
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::Invalid(format!("invalid dimension '{t}'"))))
                .collect::<Result<_>>()?;
            let [m, p, q, n] = dims[..] else {
                return Err(Error::Invalid("--random expects m,p,q,n".into()));
            };
            random_problem(&RandomSpec::new(m, p, q, n, f.problem_seed).with_dup(f.dup_a, f.dup_b))
        }
        (Some(a_path), None) => {
            let a = read_matrix_market(a_path)?;
            let b = match &f.b {
                Some(p) => read_matrix_market_dense(p)?,
                None => DenseMat::identity(a.cols()),
            };
            let x = match &f.x {
                Some(p) => read_matrix_market_dense(p)?,
                None => DenseMat::from_fn(a.cols(), b.rows(), |_, _| 1.0),
            };
            if x.shape() != (a.cols(), b.rows()) {
                return Err(Error::DimensionMismatch("X does not fit A and B".into()));
            }
            let c = a.mul_dense(&x).matmul(&b);
            Problem::new(a, b, c)?.with_x_star(x)
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<i32> {
    let method: Method = args.method.parse()?;
    let cfg = solver_config(&args.solver, StopRule::DefaultUpdateNorm)?;
    let problem = build_problem(&args.problem)?;
    let rep = solve(&problem, method, &cfg)?;
    let (m, p, q, n) = problem.dims();
    println!("problem      {m}x{p} A, {q}x{n} B");
    println!("method       {method}");
    println!("alpha        {:.6e}", rep.alpha);
    println!("iterations   {}", rep.iterations);
    println!("stop         {:?}", rep.stop);
    println!("wall seconds {:.6e}", rep.wall_seconds);
    println!("residual     {:.6e}", rep.final_residual_fro);
    if let Some(e) = rep.final_rse {
        println!("rse          {e:.6e}");
    }
    if let Some(out) = &args.out {
        write_trace_csv_with(&rep.trace, out, !args.solver.no_wall)?;
    }
    Ok(0)
}

fn run_bench(args: BenchArgs) -> Result<i32> {
    let methods: Vec<Method> = args.method.split(',').map(str::parse).collect::<Result<_>>()?;
    let mut cfg = solver_config(&args.solver, StopRule::DefaultUpdateNorm)?;
    if cfg.trace_stride.is_none() {
        cfg.trace_stride = Some(0);
    }
    let problem = build_problem(&args.problem)?;
    let mut spec = ExperimentSpec::new(ProblemSource::Given(Box::new(problem)), methods, cfg);
    spec.trials = args.trials;
    spec.thetas = parse_thetas(&args.solver.theta)?;
    let rows = run_trials(&spec)?;
    print!("{}", format_summary_table(&rows));
    if let Some(out) = &args.out {
        fs::write(out, summary_csv(&rows))?;
    }
    Ok(0)
}

fn run_verify_cmd(args: VerifyArgs) -> Result<i32> {
    let rep = run_verify(args.seed);
    for c in &rep.checks {
        println!("{} {:<40} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("bounds.csv"), bounds_csv(&rep.bounds))?;
    }
    Ok(if rep.all_passed() { 0 } else { 1 })
}

fn run_deblur(args: DeblurArgs) -> Result<i32> {
    let method: Method = args.method.parse()?;
    let cfg = solver_config(&args.solver, StopRule::RseBelow(8e-2))?;
    let boundary: Boundary = args.boundary.parse()?;
    let img = match &args.input {
        Some(p) => RgbImage::read_ppm(p)?,
        None => synthetic_image(args.size, args.size, 0)?,
    };
    let (h, w) = (img.height(), img.width());
    let kernel = gaussian_kernel(args.kernel_size, args.sigma)?;
    let model = BlurModel::new(blur_matrix(&kernel, h, w, boundary)?, CrossChannelMatrix::standard(), h, w)?;
    let observed = model.forward(&img)?;
    let blurred = model.observed_image(&observed)?;
    let (restored, rep) = deblur(&observed, &model, Some(&img), method, &cfg)?;
    println!("image        {h}x{w}, boundary {boundary}");
    println!("method       {method}");
    println!("iterations   {}", rep.iterations);
    println!("stop         {:?}", rep.stop);
    println!("wall seconds {:.6e}", rep.wall_seconds);
    println!("psnr blurred {}", psnr(&img, &blurred)?);
    println!("psnr restored {}", psnr(&img, &restored)?);
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        img.write_ppm(dir.join("original.ppm"))?;
        blurred.write_ppm(dir.join("blurred.ppm"))?;
        restored.write_ppm(dir.join("restored.ppm"))?;
        fs::write(dir.join("trace.csv"), trace_csv_string(&rep.trace, !args.solver.no_wall))?;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(cli(["axb", "frobnicate"]), 2);
        assert_eq!(cli(["axb", "solve", "--random", "4,3,2,2", "--alpha", "x"]), 2);
        assert_eq!(cli(["axb", "solve", "--random", "4,3,2,2", "--method", "nope"]), 2);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.mtx");
        fs::write(&a, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n2 2 1\n").unwrap();
        let a = a.to_str().unwrap();
        assert_eq!(cli(["axb", "solve", "--a", a, "--alpha", "3.0"]), 2);
        assert_eq!(cli(["axb", "solve", "--a", a, "--alpha", "1.0"]), 0);
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# defaults\nmethod = MWRBK\nalpha = 5.0\nrandom = 6,4,3,3\n").unwrap();
        let out = dir.path().join("t.csv");
        let code = cli([
            "axb",
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--alpha",
            "auto",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(out.exists());
        assert_eq!(cli(["axb", "solve", "--config", cfg.to_str().unwrap()]), 2);
    }
}
