use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sbelab::{execute, exit_code, ExperimentKind};

fn experiment(s: &str) -> Result<ExperimentKind, String> {
    ExperimentKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown experiment `{s}` (one of {})", names.join(", "))
    })
}

/// Spectral Galerkin experiments for stochastic Burgers-type equations.
#[derive(Debug, Parser)]
#[command(name = "sbelab", version)]
struct Cli {
    /// simulate, invariance, drift-scaling, cauchy, mollifier-cauchy,
    /// ito-check, uniqueness or ns2d-invariance
    #[arg(value_parser = experiment)]
    experiment: ExperimentKind,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.experiment, &cli.config, cli.seed, cli.out) {
        Ok((outcome, files)) => {
            for g in &outcome.gates {
                println!("[{}] {}: {} (target {})", g.status(), g.name, g.value, g.target);
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(exit_code(&outcome) as u8)
        }
        Err(e) => {
            eprintln!("sbelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
