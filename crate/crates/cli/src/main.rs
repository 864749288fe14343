use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bridgekit_cli::bundle::{read_json, Bundle, GaugeArg, Inputs, Kind, Solver, Status};
use bridgekit_cli::error::CliError;
use bridgekit_cli::run::{self, Problem};
use bridgekit_cli::{summary, verify};

/// Classical and quantum Schrödinger bridges.
///
/// Exit status: 0 converged and verified, 1 input or validation error,
/// 2 non-convergence or failed verification.
#[derive(Debug, Parser)]
#[command(name = "bridgekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Hilbert-metric stopping tolerance.
    #[arg(long, default_value_t = 1e-12, value_parser = positive_real)]
    tol: f64,
    /// Iteration budget (default: derived from the contraction rate, or 100000).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: Option<u64>,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GaugeArg::Hermitian)]
    gauge: GaugeArg,
    /// Run even if the positivity check fails (zero kernel entries, or a Kraus
    /// map that is not positivity improving).
    #[arg(long)]
    override_positivity_check: bool,
    /// Write the JSON result bundle here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One-step bridge for a kernel and two marginals.
    ClassicalOneStep {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        p0: PathBuf,
        #[arg(long)]
        pt: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Bridge over a sequence of kernels.
    ClassicalMultiStep {
        /// JSON array of kernels.
        #[arg(long)]
        kernels: PathBuf,
        #[arg(long)]
        p0: PathBuf,
        #[arg(long)]
        pt: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Doubly stochastic scaling of a positive matrix.
    ClassicalSinkhorn {
        #[arg(long)]
        kernel: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Doubly stochastic scaling of a Kraus map.
    QuantumDoublyStochastic {
        #[arg(long)]
        kraus: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Quantum bridge between two positive definite densities.
    QuantumBridge {
        #[arg(long)]
        kraus: PathBuf,
        #[arg(long)]
        rho0: PathBuf,
        #[arg(long)]
        rhot: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Quantum bridge between two pure states given as unit vectors.
    QuantumPure {
        #[arg(long)]
        kraus: PathBuf,
        #[arg(long)]
        v0: PathBuf,
        #[arg(long)]
        vt: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Quantum bridge over a sequence of Kraus maps.
    QuantumMultiStep {
        /// JSON array of Kraus maps.
        #[arg(long)]
        kraus_steps: PathBuf,
        #[arg(long)]
        rho0: PathBuf,
        #[arg(long)]
        rhot: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Recompute every residual of a result bundle.
    Verify { bundle: PathBuf },
}

fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("{x} is not a positive finite number")),
        Err(e) => Err(e.to_string()),
    }
}

fn init_logging() {
    let level = match std::env::var("BRIDGEKIT_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Error,
        Ok("info") => log::LevelFilter::Info,
        Ok("trace") => log::LevelFilter::Trace,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    read_json(path)
}

fn problem(command: Command) -> Result<(Problem, Option<PathBuf>), CliError> {
    let mut inputs = Inputs::default();
    let (kind, solver) = match command {
        Command::ClassicalOneStep { kernel, p0, pt, solver } => {
            inputs.kernel = Some(load(&kernel)?);
            inputs.p0 = Some(load(&p0)?);
            inputs.pt = Some(load(&pt)?);
            (Kind::ClassicalOneStep, solver)
        }
        Command::ClassicalMultiStep { kernels, p0, pt, solver } => {
            inputs.kernels = Some(load(&kernels)?);
            inputs.p0 = Some(load(&p0)?);
            inputs.pt = Some(load(&pt)?);
            (Kind::ClassicalMultiStep, solver)
        }
        Command::ClassicalSinkhorn { kernel, solver } => {
            inputs.kernel = Some(load(&kernel)?);
            (Kind::ClassicalSinkhorn, solver)
        }
        Command::QuantumDoublyStochastic { kraus, solver } => {
            inputs.kraus = Some(load(&kraus)?);
            (Kind::QuantumDoublyStochastic, solver)
        }
        Command::QuantumBridge { kraus, rho0, rhot, solver } => {
            inputs.kraus = Some(load(&kraus)?);
            inputs.rho0 = Some(load(&rho0)?);
            inputs.rho_t = Some(load(&rhot)?);
            (Kind::QuantumBridge, solver)
        }
        Command::QuantumPure { kraus, v0, vt, solver } => {
            inputs.kraus = Some(load(&kraus)?);
            inputs.v0 = Some(load(&v0)?);
            inputs.v_t = Some(load(&vt)?);
            (Kind::QuantumPure, solver)
        }
        Command::QuantumMultiStep { kraus_steps, rho0, rhot, solver } => {
            inputs.kraus_steps = Some(load(&kraus_steps)?);
            inputs.rho0 = Some(load(&rho0)?);
            inputs.rho_t = Some(load(&rhot)?);
            (Kind::QuantumMultiStep, solver)
        }
        Command::Verify { .. } => unreachable!("handled before problem construction"),
    };
    let verify_tol = match kind {
        Kind::ClassicalOneStep | Kind::ClassicalMultiStep | Kind::ClassicalSinkhorn => run::CLASSICAL_VERIFY_TOL,
        _ => bridgekit::quantum::VERIFY_TOL,
    };
    let problem = Problem {
        kind,
        inputs,
        solver: Solver {
            tol: solver.tol,
            max_iter: solver.max_iter.map(|m| m as usize),
            seed: solver.seed,
            gauge: solver.gauge,
            override_positivity_check: solver.override_positivity_check,
            verify_tol,
        },
    };
    Ok((problem, solver.output))
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    if let Command::Verify { bundle } = command {
        let b = Bundle::read(&bundle)?;
        let v = verify::verify(&b)?;
        print!("{}", summary::render_verification(&b, &v));
        return Ok(ExitCode::from(if v.passed() { 0 } else { 2 }));
    }
    let (problem, output) = problem(command)?;
    let bundle = run::run(&problem)?;
    if let Some(path) = output {
        std::fs::write(&path, bundle.to_json()).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    }
    print!("{}", summary::render(&bundle));
    Ok(ExitCode::from(if bundle.status == Status::Verified { 0 } else { 2 }))
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
