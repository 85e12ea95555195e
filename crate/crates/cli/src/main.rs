mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specdet::gy::DetMethod;
use specdet::spectrum::{SpectrumMethod, DEFAULT_MESH, DEFAULT_N};
use specdet::{Error, ErrorClass};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "specdet",
    version,
    about = "Functional determinants of Dirichlet Schrödinger operators on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate det(-d²/dt² + V) normalised by the free operator.
    Det(DetArgs),
    /// Find the potential maximising the determinant under ||V||_q = A.
    Optimize(OptimizeArgs),
    /// Dirichlet eigenvalues and the regularised eigenvalue product.
    Spectrum(SpectrumArgs),
    /// Maximal determinant for a list of exponents q at fixed A.
    Sweep(SweepArgs),
    /// Run the built-in consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct DetArgs {
    /// Potential description (JSON).
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Force a propagation method; by default exact cells are used when possible.
    #[arg(long, value_enum)]
    method: Option<DetMethodArg>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long)]
    q: f64,
    #[arg(long = "A")]
    a: f64,
    /// Shooting tolerance on |Ψ(1)|.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Number of grid points for the extremal profile (odd, at least 33).
    #[arg(long, default_value_t = specdet::extremal_lq::DEFAULT_GRID)]
    grid: usize,
    /// Write (t, v) samples of the optimal potential as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the optimal potential as a potential JSON file.
    #[arg(long)]
    save_potential: Option<PathBuf>,
    /// For q = 2, also solve by shooting and compare with the closed form.
    #[arg(long)]
    verify_cross: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    potential: PathBuf,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_MESH)]
    mesh: usize,
    #[arg(long, value_enum, default_value_t = SpectrumMethodArg::PrueferShooting)]
    method: SpectrumMethodArg,
    /// Write the eigenvalue table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long = "A")]
    a: f64,
    /// Comma-separated exponents, e.g. 1.25,1.5,2,3.
    #[arg(long, value_delimiter = ',', required = true)]
    q_list: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DetMethodArg {
    ExactPiecewise,
    AdaptiveRk,
}

impl From<DetMethodArg> for DetMethod {
    fn from(m: DetMethodArg) -> Self {
        match m {
            DetMethodArg::ExactPiecewise => DetMethod::ExactPiecewise,
            DetMethodArg::AdaptiveRk => DetMethod::AdaptiveRk,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpectrumMethodArg {
    PrueferShooting,
    FdMatrix,
}

impl From<SpectrumMethodArg> for SpectrumMethod {
    fn from(m: SpectrumMethodArg) -> Self {
        match m {
            SpectrumMethodArg::PrueferShooting => SpectrumMethod::PrueferShooting,
            SpectrumMethodArg::FdMatrix => SpectrumMethod::FdMatrix,
        }
    }
}

/// Anything that ends a run with a non-zero exit status.
#[derive(Debug)]
enum Failure {
    Input(String),
    Core(Error),
    Disagreement(String),
    ChecksFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Core(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Range => 3,
                ErrorClass::Solver => 4,
            },
            Failure::Disagreement(_) => 4,
            Failure::ChecksFailed => 1,
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SPECDET_THREADS") else {
        return Ok(());
    };
    let threads = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("SPECDET_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let start = Instant::now();
    let (report, format) = match cli.command {
        Command::Det(args) => (commands::det(&args)?, args.format),
        Command::Optimize(args) => (commands::optimize(&args)?, args.format),
        Command::Spectrum(args) => (commands::spectrum(&args)?, args.format),
        Command::Sweep(args) => (commands::sweep(&args)?, args.format),
        Command::Verify(args) => {
            let (report, all_passed) = commands::verify();
            output::emit(&report, args.format, start)?;
            return if all_passed {
                Ok(())
            } else {
                Err(Failure::ChecksFailed)
            };
        }
    };
    output::emit(&report, format, start)?;
    if let Some(msg) = report.disagreement {
        return Err(Failure::Disagreement(msg));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Input(msg) | Failure::Disagreement(msg) => eprintln!("specdet: {msg}"),
                Failure::Core(e) => {
                    eprintln!("specdet: {e}");
                    if e.class() == ErrorClass::Solver {
                        output::print_error_payload(e);
                    }
                }
                Failure::ChecksFailed => eprintln!("specdet: some checks failed"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
