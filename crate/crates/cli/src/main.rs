use std::path::PathBuf;
use std::process::ExitCode;

use bornkit_cli::{run_file, CliError, Overrides, Report, RunOptions, TaskKind, VerifyMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bornkit", version, about = "Run quantum measurement experiments from a JSON config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in the config.
    Run(RunArgs),
    /// Check state, measure and other object invariants.
    Validate(RunArgs),
    /// Response rates `tr ρ P_k`.
    Rates(RunArgs),
    /// Draw detection events.
    Sample(RunArgs),
    /// Check sampled frequencies or sample means against the Born rule.
    VerifyBorn {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Spectral measure of an operator or a detector's measured quantity.
    Spectral(RunArgs),
    /// Naimark dilation of a measure.
    Dilate(RunArgs),
    /// Reconstruct a measure from calibration data.
    Tomo(RunArgs),
    /// Maximum-entropy state under expectation constraints.
    Maxent(RunArgs),
    /// S-matrix transition probabilities.
    Scatter(RunArgs),
    /// Pretty-print a saved report.
    Report {
        report: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Povm,
    C,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Write the JSON report to this file.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    /// Tolerance for the task's algorithm (cluster, convergence or projection tolerance).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    k_sigma: Option<f64>,
    /// Print the JSON report on stdout.
    #[arg(long)]
    json: bool,
    /// Run independent tasks concurrently.
    #[arg(long)]
    parallel: bool,
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error[{}]: {e}", e.code());
    ExitCode::from(1)
}

fn run(args: RunArgs, only: Option<TaskKind>, mode: Option<VerifyMode>) -> ExitCode {
    let default_seed = match std::env::var("BORNKIT_SEED") {
        Ok(s) => match s.trim().parse() {
            Ok(v) => Some(v),
            Err(_) => return fail(&CliError::Parse(format!("BORNKIT_SEED is not an integer: {s:?}"))),
        },
        Err(_) => None,
    };
    let options = RunOptions {
        overrides: Overrides {
            seed: args.seed,
            n: args.n,
            tol: args.tol,
            k_sigma: args.k_sigma,
            mode,
            default_seed,
        },
        only,
        parallel: args.parallel,
    };
    let report = match run_file(&args.config, &options) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Some(path) = &args.output {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            return fail(&CliError::Io { path: path.display().to_string(), message: e.to_string() });
        }
    }
    emit(&report, args.json)
}

fn emit(report: &Report, json: bool) -> ExitCode {
    if json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.render_text());
    }
    for r in &report.results {
        if let Some(e) = &r.error {
            eprintln!("error[{}] in {}: {}", e.kind, r.id, e.message);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(a) => run(a, None, None),
        Command::Validate(a) => run(a, Some(TaskKind::Validate), None),
        Command::Rates(a) => run(a, Some(TaskKind::Rates), None),
        Command::Sample(a) => run(a, Some(TaskKind::Sample), None),
        Command::VerifyBorn { run: a, mode } => {
            let mode = mode.map(|m| match m {
                Mode::Povm => VerifyMode::Povm,
                Mode::C => VerifyMode::C,
            });
            run(a, Some(TaskKind::VerifyBorn), mode)
        }
        Command::Spectral(a) => run(a, Some(TaskKind::Spectral), None),
        Command::Dilate(a) => run(a, Some(TaskKind::Dilate), None),
        Command::Tomo(a) => run(a, Some(TaskKind::Tomo), None),
        Command::Maxent(a) => run(a, Some(TaskKind::Maxent), None),
        Command::Scatter(a) => run(a, Some(TaskKind::Scatter), None),
        Command::Report { report, json } => {
            let bytes = match std::fs::read(&report) {
                Ok(b) => b,
                Err(e) => {
                    return fail(&CliError::Io { path: report.display().to_string(), message: e.to_string() })
                }
            };
            match Report::from_json(&bytes) {
                Ok(r) => emit(&r, json),
                Err(e) => fail(&e),
            }
        }
    }
}
