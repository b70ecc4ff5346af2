//! `lodisc`: command-line front end for the discrimination library.
//!
//! Exit status is 0 on success, 2 for unusable flags and 1 when an input or
//! a self-check fails validation.

mod commands;
mod format;
mod options;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use options::{Cli, Options, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<lodisc_core::Error> for Failure {
    fn from(e: lodisc_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    let options = match &cli.config {
        Some(path) => cli.options.or(Options::load(path)?),
        None => cli.options,
    };
    let cfg = RunConfig::resolve(cli.command, options)?;
    let out = commands::run(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.text)
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Invalid(format!("cannot write output: {e}")))?;
        }
    }
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            Cli::command()
                .error(clap::error::ErrorKind::ArgumentConflict, msg)
                .exit();
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
