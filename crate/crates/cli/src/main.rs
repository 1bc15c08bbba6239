mod args;
mod commands;
mod config;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{resolve_seed, FileConfig};
use error::CliError;

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = resolve_seed(cli.seed, &file)?;
    match &cli.command {
        Command::Analytic(a) => commands::analytic(a, &file, seed)?,
        Command::Simulate(a) => commands::simulate(a, &file, seed)?,
        Command::Verify(a) => {
            if !commands::verify(a, &file, seed)? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Profile(a) => commands::profile(a, &file, seed)?,
        Command::Network(a) => commands::network(a, &file, seed)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(CliError::Usage(format!("thread pool: {e}"))),
        },
        None => run(&cli),
    };
    result.unwrap_or_else(|e| {
        eprintln!("hyperpark: {e}");
        e.exit_code()
    })
}
