use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use wgl_cli::config::{ExperimentConfig, Layer, Threads};
use wgl_cli::exit::{self, CliError};
use wgl_cli::experiments::Command;

#[derive(Debug, Parser)]
#[command(name = "wgl", version, about = "Numerical experiments on sums p1 + p2^2 + p3^2 of primes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Layer,
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = ExperimentConfig::resolve(cli.flags)?;
    let threads = match cfg.threads {
        Threads::Auto => 0,
        Threads::Fixed(n) => n,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting the thread pool")?;

    let report = wgl_cli::execute(cli.command, &cfg)?;
    for w in &report.outcome.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", report.data_path.display());
    if !report.outcome.failures.is_empty() {
        let err = CliError::Unreliable(report.outcome.failures.join("; "));
        eprintln!("error: {err}");
        return Ok(exit::UNRELIABLE);
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::exit_code(&e) as u8)
        }
    }
}
