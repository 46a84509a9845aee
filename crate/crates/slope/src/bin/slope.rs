use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use slope::experiments::run_grid_with_threads;
use slope::io::{fmt_num, read_matrix, read_vector, write_matrix, write_vector};
use slope::plot::render_svg;
use slope::{run_grid, Error, ExperimentConfig, Result};
use slope_core::datagen::{amplitude_strong, generate_orthogonal};
use slope_core::diagnostics::q_events;
use slope_core::seqgen::{lambda_bh, lambda_constant, lambda_heuristic};
use slope_core::solver::solve_slope_with;
use slope_core::{
    generate, support, verify_theorems, Dataset, GeneratorSpec, LambdaSequence, SlopeSolution,
    SolverOptions, Tolerance,
};

#[derive(Parser)]
#[command(
    name = "slope",
    version,
    about = "Sorted-L1 penalized regression (SLOPE)"
)]
struct Cli {
    /// Worker threads for `simulate` (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Gaussian design, sparse truth and response.
    Gen(GenArgs),
    /// Print a tuning sequence, one value per line.
    Lambda(LambdaArgs),
    /// Fit SLOPE and write the coefficients.
    Solve(SolveArgs),
    /// Fit SLOPE and check the support characterization.
    Verify(VerifyArgs),
    /// Run a Monte Carlo FDR/power study.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    k: usize,
    /// Signal amplitude (default: 2σ sqrt(2 log p)).
    #[arg(long)]
    amp: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use X = I (requires n = p).
    #[arg(long)]
    orthogonal: bool,
    /// Files are written as PREFIX + X.csv, y.csv and b0.csv.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bh,
    Heuristic,
    Constant,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long, value_enum, default_value_t = Kind::Bh)]
    kind: Kind,
    #[arg(long, default_value_t = 0.2)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Args)]
struct LambdaArgs {
    #[arg(long)]
    p: usize,
    /// Sample size, heuristic sequence only.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    seq: SequenceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    response: PathBuf,
    /// Tuning sequence, one value per line; overrides --kind.
    #[arg(long)]
    lambda_file: Option<PathBuf>,
    #[command(flatten)]
    seq: SequenceArgs,
    /// Relative duality-gap tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// True coefficients; enables the Γ/M decomposition and Q-events.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Inequality slack (default: 10 times the achieved gap tolerance).
    #[arg(long)]
    slack: Option<f64>,
    /// Resolvent set size for Q-events (default: min(p, max(1, 2k))).
    #[arg(long)]
    k_star: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    c_q: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Lambda(args) => lambda(args),
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify(args),
        Command::Simulate(args) => simulate(args, cli.threads),
    }
}

fn prefixed(prefix: &str, name: &str) -> PathBuf {
    let base = Path::new(prefix);
    if prefix.ends_with('/') || base.is_dir() {
        base.join(name)
    } else {
        PathBuf::from(format!("{prefix}{name}"))
    }
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let amplitude = match args.amp {
        Some(a) => a,
        None => amplitude_strong(args.p.max(2), args.sigma, 0.0)?,
    };
    let spec = GeneratorSpec {
        n: args.n,
        p: args.p,
        k: args.k,
        amplitude,
        sigma: args.sigma,
        seed: args.seed,
    };
    let data = if args.orthogonal {
        generate_orthogonal(&spec)?
    } else {
        generate(&spec)?
    };
    let x_path = prefixed(&args.out_prefix, "X.csv");
    if let Some(dir) = x_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    write_matrix(&x_path, &data.x)?;
    write_vector(&prefixed(&args.out_prefix, "y.csv"), &data.y)?;
    write_vector(
        &prefixed(&args.out_prefix, "b0.csv"),
        data.b0.as_deref().unwrap_or_default(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn sequence(args: &SequenceArgs, p: usize, n: Option<usize>) -> Result<LambdaSequence> {
    Ok(match args.kind {
        Kind::Bh => lambda_bh(p, args.q, args.delta, args.sigma)?,
        Kind::Constant => lambda_constant(p, args.q, args.delta, args.sigma)?,
        Kind::Heuristic => {
            let n = n.ok_or_else(|| {
                Error::Core(slope_core::Error::Domain(
                    "the heuristic sequence needs the sample size".into(),
                ))
            })?;
            lambda_heuristic(p, n, args.q, args.sigma)?
        }
    })
}

fn print_vector(values: &[f64], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_vector(path, values),
        None => {
            let mut text = String::new();
            for v in values {
                text.push_str(&fmt_num(*v));
                text.push('\n');
            }
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn lambda(args: LambdaArgs) -> Result<ExitCode> {
    let seq = sequence(&args.seq, args.p, args.n)?;
    print_vector(seq.values(), args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn load(problem: &ProblemArgs) -> Result<(Dataset, LambdaSequence)> {
    let x = read_matrix(&problem.design)?;
    let y = read_vector(&problem.response)?;
    let data = Dataset::new(x, y)?;
    let lam = match &problem.lambda_file {
        Some(path) => {
            let seq = LambdaSequence::custom(read_vector(path)?)?;
            if seq.len() != data.p() {
                return Err(Error::Core(slope_core::Error::Data(format!(
                    "design has {} columns but the tuning sequence has {} entries",
                    data.p(),
                    seq.len()
                ))));
            }
            seq
        }
        None => sequence(&problem.seq, data.p(), Some(data.n()))?,
    };
    Ok((data, lam))
}

fn fit(problem: &ProblemArgs, data: &Dataset, lam: &LambdaSequence) -> Result<SlopeSolution> {
    let sol = solve_slope_with(
        data,
        lam.values(),
        &SolverOptions {
            tol: Tolerance::Relative(problem.tol),
            max_iter: problem.max_iter,
            initial: None,
        },
    )?;
    eprintln!(
        "{} after {} iterations, duality gap {} (tolerance {}), {} selected",
        if sol.converged {
            "converged"
        } else {
            "NOT converged"
        },
        sol.iterations,
        fmt_num(sol.duality_gap),
        fmt_num(sol.tolerance),
        support(&sol.beta, 1e-8).len()
    );
    Ok(sol)
}

fn certificate_error(sol: &SlopeSolution) -> Error {
    Error::Core(slope_core::Error::Certificate {
        gap: sol.duality_gap,
        tol: sol.tolerance,
    })
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let (data, lam) = load(&args.problem)?;
    let sol = fit(&args.problem, &data, &lam)?;
    print_vector(&sol.beta, args.out.as_deref())?;
    if !sol.converged {
        return Err(certificate_error(&sol));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let (mut data, lam) = load(&args.problem)?;
    data = data.with_sigma(args.problem.seq.sigma)?;
    if let Some(path) = &args.truth {
        data = data.with_truth(read_vector(path)?)?;
    }
    let sol = fit(&args.problem, &data, &lam)?;
    if !sol.converged {
        return Err(certificate_error(&sol));
    }
    let slack = args.slack.unwrap_or(10.0 * sol.tolerance);
    let diag = verify_theorems(&data, &sol, lam.values(), args.a, slack)?;
    let mut out = json!({
        "R": diag.r,
        "r_star": diag.r_star,
        "theorem2_ok": diag.theorem2_ok,
        "theorem3_ok": diag.theorem3_ok,
        "duality_gap": sol.duality_gap,
    });
    if let Some(b0) = &data.b0 {
        let k = b0.iter().filter(|b| **b != 0.0).count();
        let k_star = args.k_star.unwrap_or((2 * k).clamp(1, data.p()));
        let rep = q_events(&data, &sol, k_star, args.c_q, args.problem.seq.q)?;
        out["q_events"] = json!({
            "q1": rep.q1,
            "q2": rep.q2,
            "q3": rep.q3,
            "k_star": rep.k_star,
            "gamma_n": rep.gamma_n,
            "resolvent_set": rep.resolvent_set,
        });
    }
    println!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn simulate(args: SimulateArgs, threads: Option<usize>) -> Result<ExitCode> {
    let config = ExperimentConfig::from_file(&args.config)?;
    let report = match threads {
        Some(t) => run_grid_with_threads(&config, t)?,
        None => run_grid(&config)?,
    };
    report.write_csv(&args.out)?;
    if let Some(path) = &args.plot {
        std::fs::write(path, render_svg(&report)).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    for cell in &report.cells {
        let mut line = format!(
            "n = {}, p = {}, k = {}, alpha = {}, delta = {}",
            cell.n,
            cell.p,
            cell.k,
            fmt_num(cell.alpha),
            fmt_num(cell.delta)
        );
        if let Some(f) = cell.lasso_not_larger {
            line.push_str(&format!(
                ", R(Lasso) <= R(SlopeBH) in a fraction {} of replicates",
                fmt_num(f)
            ));
        }
        if let Some(f) = cell.q_event_rate {
            line.push_str(&format!(
                ", Q-events held in a fraction {} of replicates",
                fmt_num(f)
            ));
        }
        eprintln!("{line}");
    }
    let failed: Vec<String> = report
        .failed_rows()
        .map(|r| {
            format!(
                "{} at n = {}, alpha = {}, delta = {}: {} of {} replicates did not converge",
                r.method.name(),
                r.n,
                fmt_num(r.alpha),
                fmt_num(r.delta),
                r.excluded,
                r.excluded + r.replicates_done
            )
        })
        .collect();
    if !failed.is_empty() {
        return Err(Error::CellFailed(failed.join("; ")));
    }
    Ok(ExitCode::SUCCESS)
}
