//! `dclab`: run DCA experiments, verify trajectories, export figure data.
//!
//! Exit codes: 0 success, 1 a verified inequality fails, 2 invalid arguments
//! or unparsable input, 3 solver failure, 4 output not writable.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dclab::io::{
    read_trajectory, write_figure_csv, write_report, write_trajectory, FileError, Format,
};
use dclab::{
    build_adversarial, figure_data, make_quadratic_dc, run_dca, run_steepest_descent, DcInstance,
    GdConfig, Point, RateReport, SolveFailure, SolverConfig, Trajectory,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_UNWRITABLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "dclab",
    version,
    about = "Difference-of-convex optimization lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run DCA or steepest descent and write the trajectory.
    Run(RunArgs),
    /// Check the rate inequalities along a trajectory file.
    Verify(VerifyArgs),
    /// Sample f, g and h of the slow-convergence instance as CSV.
    FigureData(FigureArgs),
    /// Export the knot table of the slow-convergence instance as CSV.
    Knots(KnotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Adversarial,
    Quadratic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Dca,
    Gd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    /// Exponent offset of the slow-convergence instance.
    #[arg(long)]
    delta: Option<f64>,
    /// Number of knot intervals of the slow-convergence instance.
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    /// Linear term of the quadratic instance, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// Starting point, comma separated. Defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = Method::Dca)]
    method: Method,
    /// Steepest-descent step. Defaults to 1 / (L_g + L_h).
    #[arg(long)]
    gd_step: Option<f64>,
    /// Output file. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Trajectory file (CSV or JSON).
    file: PathBuf,
    /// Strong convexity modulus of g.
    #[arg(long)]
    mu: f64,
    /// Lipschitz constant of grad h.
    #[arg(long)]
    lh: f64,
    /// Also check the exact rate (k+1)^-(1/2+delta).
    #[arg(long)]
    delta: Option<f64>,
    /// Report the first k with |grad f| <= eps.
    #[arg(long)]
    eps: Option<f64>,
    /// Report file. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(clap::Args)]
struct FigureArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 25)]
    n_knots: usize,
    #[arg(long, default_value_t = 20)]
    samples_per_interval: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct KnotArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 25)]
    horizon: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Failure {
            code,
            msg: msg.into(),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::new(EXIT_INVALID, msg)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| {
                Failure::new(
                    EXIT_UNWRITABLE,
                    format!("cannot write {}: {e}", p.display()),
                )
            }),
    }
}

fn write_failure(e: FileError) -> Failure {
    Failure::new(EXIT_UNWRITABLE, format!("write failed: {e}"))
}

fn finish(mut out: Box<dyn Write>) -> Result<(), Failure> {
    out.flush()
        .map_err(|e| Failure::new(EXIT_UNWRITABLE, format!("write failed: {e}")))
}

fn point(v: Vec<f64>, what: &str) -> Result<Point, Failure> {
    Point::new(v).map_err(|e| invalid(format!("{what}: {e}")))
}

fn build_instance(args: &RunArgs) -> Result<(Box<dyn DcInstance>, Point), Failure> {
    match args.problem {
        Problem::Adversarial => {
            if args.b.is_some() {
                return Err(invalid("--b applies to the quadratic problem only"));
            }
            let delta = args
                .delta
                .ok_or_else(|| invalid("--delta is required for the adversarial problem"))?;
            let inst =
                build_adversarial(delta, args.horizon).map_err(|e| invalid(e.to_string()))?;
            let x0 = point(args.x0.clone().unwrap_or_else(|| vec![0.0]), "--x0")?;
            Ok((Box::new(inst), x0))
        }
        Problem::Quadratic => {
            if args.delta.is_some() {
                return Err(invalid("--delta applies to the adversarial problem only"));
            }
            let b = point(
                args.b
                    .clone()
                    .ok_or_else(|| invalid("--b is required for the quadratic problem"))?,
                "--b",
            )?;
            let x0 = point(
                args.x0.clone().unwrap_or_else(|| vec![0.0; b.dim()]),
                "--x0",
            )?;
            Ok((Box::new(make_quadratic_dc(&b)), x0))
        }
    }
}

fn cmd_run(args: RunArgs) -> CmdResult {
    let (inst, x0) = build_instance(&args)?;
    if x0.dim() != inst.dim() {
        return Err(invalid(format!(
            "--x0 has {} coordinates, expected {}",
            x0.dim(),
            inst.dim()
        )));
    }
    if !inst.domain().contains(&x0) {
        return Err(invalid(format!(
            "--x0 {:?} is outside the domain",
            x0.coords()
        )));
    }
    if matches!(args.method, Method::Dca) && args.gd_step.is_some() {
        return Err(invalid("--gd-step applies to --method gd only"));
    }
    let result = match args.method {
        Method::Dca => {
            let cfg = SolverConfig::new(args.eps, args.max_iter);
            cfg.validate().map_err(|e| invalid(e.to_string()))?;
            run_dca(inst.as_ref(), &x0, &cfg)
        }
        Method::Gd => {
            let cfg = match args.gd_step {
                Some(step_size) => GdConfig {
                    step_size,
                    epsilon: args.eps,
                    max_iter: args.max_iter,
                },
                None => GdConfig::for_instance(inst.as_ref(), args.eps, args.max_iter)
                    .ok_or_else(|| invalid("--gd-step is required for this problem"))?,
            };
            cfg.validate().map_err(|e| invalid(e.to_string()))?;
            run_steepest_descent(inst.as_ref(), &x0, &cfg)
        }
    };
    let (traj, failure) = match result {
        Ok(t) => (t, None),
        Err(SolveFailure { error, partial }) => (partial, Some(error)),
    };
    let out = open_out(args.out.as_deref())?;
    if !traj.is_empty() {
        write_traj(&traj, args.format, out)?;
    }
    match failure {
        Some(e) => Err(Failure::new(EXIT_SOLVER, format!("solver failed: {e}"))),
        None => Ok(ExitCode::SUCCESS),
    }
}

fn write_traj(
    traj: &Trajectory,
    format: OutFormat,
    mut out: Box<dyn Write>,
) -> Result<(), Failure> {
    write_trajectory(traj, format.into(), &mut out).map_err(write_failure)?;
    finish(out)
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    if !(args.mu > 0.0 && args.mu.is_finite()) {
        return Err(invalid(format!("--mu must be positive, got {}", args.mu)));
    }
    if !(args.lh >= 0.0 && args.lh.is_finite()) {
        return Err(invalid(format!(
            "--lh must be nonnegative, got {}",
            args.lh
        )));
    }
    if let Some(d) = args.delta.filter(|d| d.is_nan() || *d <= 0.0) {
        return Err(invalid(format!("--delta must be positive, got {d}")));
    }
    let file = File::open(&args.file)
        .map_err(|e| invalid(format!("cannot read {}: {e}", args.file.display())))?;
    let traj = read_trajectory(io::BufReader::new(file))
        .map_err(|e| invalid(format!("{}: {e}", args.file.display())))?;
    let report = RateReport::build(&traj, args.mu, args.lh, args.eps, args.delta);

    let mut out = open_out(args.out.as_deref())?;
    write_report(&report, args.format.into(), &mut out).map_err(write_failure)?;
    finish(out)?;

    let failures = report.failures();
    if failures.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for f in &failures {
        eprintln!("{f}");
    }
    eprintln!("{} check(s) failed", failures.len());
    Ok(ExitCode::from(EXIT_CHECK_FAILED))
}

fn cmd_figure_data(args: FigureArgs) -> CmdResult {
    let rows = figure_data(args.delta, args.n_knots, args.samples_per_interval)
        .map_err(|e| invalid(e.to_string()))?;
    let mut out = open_out(args.out.as_deref())?;
    write_figure_csv(&rows, &mut out).map_err(write_failure)?;
    finish(out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_knots(args: KnotArgs) -> CmdResult {
    let inst = build_adversarial(args.delta, args.horizon).map_err(|e| invalid(e.to_string()))?;
    let mut out = open_out(args.out.as_deref())?;
    inst.write_knot_csv(&mut out)
        .map_err(|e| Failure::new(EXIT_UNWRITABLE, format!("write failed: {e}")))?;
    finish(out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::FigureData(a) => cmd_figure_data(a),
        Command::Knots(a) => cmd_knots(a),
    };
    result.unwrap_or_else(|f| {
        eprintln!("dclab: {}", f.msg);
        ExitCode::from(f.code)
    })
}
