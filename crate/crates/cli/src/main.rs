mod args;
mod commands;
mod config;
mod format;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{ConfigError, FileConfig};

/// Bad flag combination or value that clap cannot catch.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

const EXIT_INPUT: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

fn is_input_error(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|e| e.is::<InputError>() || e.is::<ConfigError>() || e.is::<pericycle::Error>())
}

fn run(cli: &Cli) -> anyhow::Result<commands::Outcome> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Schedule(a) => commands::schedule(&cfg, a),
        Command::Simulate(a) => commands::simulate(&cfg, a),
        Command::CompareCosts(a) => commands::compare_costs(&cfg, a),
        Command::FitCfr(a) => commands::fit_cfr(&cfg, a),
        Command::Ingest(a) => commands::ingest(&cfg, a),
        Command::Validate(a) => commands::validate_cmd(&cfg, a),
        Command::Fetch(a) => commands::fetch(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("error: {err:#}");
            return if is_input_error(&err) {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::FAILURE
            };
        }
    };
    let written = match &outcome.out {
        Some(path) => std::fs::write(path, &outcome.body),
        None => std::io::stdout().lock().write_all(outcome.body.as_bytes()),
    };
    if let Err(err) = written {
        eprintln!("error: writing output: {err}");
        return ExitCode::FAILURE;
    }
    if outcome.tolerance_failure {
        eprintln!("error: one or more checks are outside tolerance");
        return ExitCode::from(EXIT_TOLERANCE);
    }
    ExitCode::SUCCESS
}
