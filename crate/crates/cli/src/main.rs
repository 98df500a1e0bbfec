//! `cqrel`: exponent curves, capacity, zero-rate exponent, closed-form
//! binary reports and decoding-oracle verification runs.
//!
//! Exit status: 0 success, 1 invalid input, 2 a verification check failed,
//! 3 a numerical routine failed.

mod args;
mod commands;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{CliError, Outcome, Units};

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let units = Units { bits: cli.bits };
    match &cli.command {
        Command::Capacity(a) => commands::cmd_capacity(a, units, cli.format),
        Command::Curve(a) => commands::cmd_curve(a, units, cli.format),
        Command::ZeroRate(a) => commands::cmd_zero_rate(a, units, cli.format),
        Command::Binary(a) => commands::cmd_binary(a, units, cli.format),
        Command::Verify(a) => commands::cmd_verify(a, cli.format),
        Command::Classical(a) => commands::cmd_classical(a, cli.format),
    }
}

fn run_with_threads(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.threads {
        None => run(cli),
        Some(0) => Err(CliError::Input("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Numerical(format!("cannot start worker pool: {e}")))?
            .install(|| run(cli)),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = run_with_threads(&cli).and_then(|outcome| {
        emit(&cli, &outcome.text)?;
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("cqrel: verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("cqrel: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
