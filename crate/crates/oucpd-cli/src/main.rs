mod args;
mod commands;
mod error;
mod ingest;
mod output;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(a) => commands::run_simulate(a),
        Command::Detect(a) => commands::run_detect(a),
        Command::McRates(a) => commands::run_mc_rates(a),
        Command::McCount(a) => commands::run_mc_count(a),
        Command::Plot(a) => commands::run_plot(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
