//! `thermolam`: batch front end for the frequency-domain laboratory.
//!
//! Exit codes: 0 ok, 2 config, 3 numeric, 4 regime, 5 verification failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Writer;

#[derive(Parser)]
#[command(name = "thermolam", version, about = "Frequency-domain stability lab for the thermoelastic laminated beam")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for random draws; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to RAYON_NUM_THREADS or the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigenvalues and spectral abscissa over a frequency grid.
    Spectrum,
    /// Exact trajectories at fixed frequencies.
    Evolve,
    /// Fit and verify the pointwise exponential bound.
    BoundCheck,
    /// Certify the perturbed-energy decay inequality.
    Lyapunov,
    /// Sobolev-norm decay curve, exponent fit and envelope.
    Decay,
    /// Purely imaginary eigenvalues of the threshold case.
    Nonstability,
    /// The two integral lemmas.
    Lemmas,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // Tables with every field defaulted may be omitted for the commands that need no model.
    if matches!(cli.command, Command::Lemmas) && cfg.lemmas.is_none() {
        cfg.lemmas = Some(Default::default());
    }
    let out = Writer::new(&cli.out, &cfg)?;
    match cli.command {
        Command::Spectrum => commands::spectrum_cmd(&cfg, &out),
        Command::Evolve => commands::evolve_cmd(&cfg, &out),
        Command::BoundCheck => commands::bound_check_cmd(&cfg, &out),
        Command::Lyapunov => commands::lyapunov_cmd(&cfg, &out),
        Command::Decay => commands::decay_cmd(&cfg, &out),
        Command::Nonstability => commands::nonstability_cmd(&cfg, &out),
        Command::Lemmas => commands::lemmas_cmd(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
