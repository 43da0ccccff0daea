//! Experiment runner for the mirror-descent regret library.
//!
//! Usage: `noregret <subcommand> [--config PATH] [--key value]...`
//!
//! Subcommands: run-regret, continuous-check, run-convex, run-stochastic,
//! list-algorithms. Exit codes: 0 success, 1 configuration error, 2 bound
//! violation. NOREGRET_THREADS caps replication parallelism.

use std::process::ExitCode;

mod config;
mod experiments;

#[derive(Debug)]
pub enum CliError {
    /// Malformed or missing configuration; exit code 1.
    Config(String),
    /// A certified bound failed to hold on the run; exit code 2.
    Violation(String),
}

impl From<noregret::Error> for CliError {
    fn from(err: noregret::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

const USAGE: &str = "usage: noregret <run-regret|continuous-check|run-convex|run-stochastic|list-algorithms> [--config PATH] [--key value]...";

fn run() -> Result<(), CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (subcommand, mut cfg) = config::Config::from_args(&args)?;
    match subcommand.as_str() {
        "run-regret" => experiments::run_regret(&mut cfg),
        "continuous-check" => experiments::run_continuous_check(&mut cfg),
        "run-convex" => experiments::run_convex(&mut cfg),
        "run-stochastic" => experiments::run_stochastic(&mut cfg),
        "list-algorithms" => experiments::list_algorithms(&mut cfg),
        other => Err(CliError::Config(format!(
            "unknown subcommand `{other}`\n{USAGE}"
        ))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Violation(msg)) => {
            eprintln!("bound violation: {msg}");
            ExitCode::from(2)
        }
    }
}
