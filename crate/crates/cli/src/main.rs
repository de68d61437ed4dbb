mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mveu::io::{RunConfig, SolutionChoice};

use commands::{CliError, Outcome};

/// Finite-volume Euler solver with measure-valued diagnostics.
#[derive(Debug, Parser)]
#[command(name = "mveu", version)]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the ensemble perturbation RNG (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single solve on `[grid]` with the conservation and entropy monitors.
    Run,
    /// Multi-resolution solves; writes snapshots for `ym`.
    Ensemble,
    /// Builds Young measures from the snapshots written by `ensemble`.
    Ym {
        /// Directory holding the `n<N>/` snapshot folders.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Dissipation and concentration defect traces.
    Defects,
    /// Refinement study against a classical solution.
    Weakstrong {
        #[arg(long)]
        solution: Option<SolutionChoice>,
    },
    /// Thermodynamic invariant suite.
    Check,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => mveu::io::load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.output {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("MVEU_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("MVEU_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    init_threads()?;
    let cfg = load(cli)?;
    match &cli.command {
        Command::Run => commands::run(&cfg),
        Command::Ensemble => commands::ensemble(&cfg),
        Command::Ym { input } => commands::ym(&cfg, input.as_deref()),
        Command::Defects => commands::defects(&cfg),
        Command::Weakstrong { solution } => commands::weakstrong(&cfg, solution.unwrap_or(cfg.study.solution)),
        Command::Check => commands::check(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
