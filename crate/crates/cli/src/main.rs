//! `tarry`: reproducible experiments on the two-dimensional Tarry singular
//! integral. JSON goes to standard output or `--output`; errors go to standard
//! error with exit code 2 for bad input and 1 for failed computations.

mod args;
mod commands;
mod config;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use error::CliError;

fn run() -> Result<(), CliError> {
    let argv = config::merge(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return Err(CliError::Input(e.to_string())),
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return Ok(());
        }
    };
    let common = cli.command.common();
    let rendered = tarry_core::rng::with_workers(common.workers as usize, || commands::run(&cli.command))?;
    match &common.output {
        Some(path) => std::fs::write(path, rendered.0.as_bytes())
            .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(rendered.0.as_bytes())
            .map_err(|e| CliError::Compute(e.to_string())),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tarry: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
