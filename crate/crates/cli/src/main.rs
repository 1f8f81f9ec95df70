//! `fdrlos-aber`: command-line front end for the fdRLoS ABER library.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
//! failure.

mod args;
mod commands;
mod record;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    let res = match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::Usage(format!("cannot write output: {e}")))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Eval(a) => emit(cli, &commands::eval(a)?),
        Command::Sweep(a) => emit(cli, &commands::sweep(a)?),
        Command::Table1(a) => {
            let (text, pass) = commands::table1(a)?;
            emit(cli, &text)?;
            if pass {
                Ok(())
            } else {
                Err(Failure::Validation("table cells deviate beyond --check".into()))
            }
        }
        Command::Validate(a) => {
            let (text, status) = commands::validate(a)?;
            emit(cli, &text)?;
            status.map_or(Ok(()), Err)
        }
        Command::Pathloss(a) => emit(cli, &commands::pathloss(a)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match args::merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return ExitCode::from(f.code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        // help and version exit 0, parse errors exit 2
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
