use std::path::PathBuf;
use std::process::ExitCode;

use chaoslab::{default_config, execute, resolve_seed, ExperimentConfig, ExperimentKind, RunError};
use chaoslab_core::ChaosError;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chaoslab", version, about = "Exact Gamma-calculus batteries and convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat `key = value` config; the built-in default is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; overrides `output` in the config. Stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides CHAOSLAB_SEED and the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact identity battery over seeded random chaos.
    Verify(Common),
    /// Normal convergence along a dimension schedule.
    Normal(Common),
    /// Gamma convergence along a dimension schedule.
    Gamma(Common),
    /// Sign of the spectral condition per eigenvalue index.
    Spectral(Common),
}

fn run(kind: ExperimentKind, args: Common) -> Result<i32, RunError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            RunError::Config(chaoslab::ConfigError::general(format!("{}: {e}", path.display())))
        })?,
        None => default_config(kind).to_string(),
    };
    let cfg = ExperimentConfig::parse(&text)?;
    let env = std::env::var("CHAOSLAB_SEED").ok();
    let seed = resolve_seed(args.seed, env.as_deref(), &cfg)?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| RunError::Config(chaoslab::ConfigError::general(e.to_string())))?;
    }
    let output = execute(kind, &cfg, seed)?;
    match args.out.or(cfg.output.clone()) {
        Some(path) => std::fs::write(&path, &output.csv).map_err(|e| {
            RunError::Config(chaoslab::ConfigError::general(format!("{}: {e}", path.display())))
        })?,
        None => print!("{}", output.csv),
    }
    for note in &output.notes {
        eprintln!("note: {note}");
    }
    for failure in &output.failures {
        eprintln!("FAIL {failure}");
    }
    Ok(output.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Verify(a) => (ExperimentKind::Verify, a),
        Command::Normal(a) => (ExperimentKind::Normal, a),
        Command::Gamma(a) => (ExperimentKind::Gamma, a),
        Command::Spectral(a) => (ExperimentKind::Spectral, a),
    };
    match run(kind, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                RunError::Engine(ChaosError::InternalInvariant(_)) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
