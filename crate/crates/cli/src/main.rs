use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

mod args;
mod commands;
mod config;
mod error;
mod manifest;

use args::{Cli, Command};
use error::CliError;
use manifest::RunManifest;

fn resolved<T: serde::Serialize>(a: &T) -> serde_json::Value {
    serde_json::to_value(a).expect("arguments serialize")
}

fn run(raw: Vec<OsString>) -> Result<(), CliError> {
    let typed: Vec<String> = raw.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let (expanded, config) = config::expand(raw)?;
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit();
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(5);
        }
    };
    let name = cli.command.name();
    let value = match &cli.command {
        Command::Simulate(a) => resolved(a),
        Command::Estimate(a) => resolved(a),
        Command::Evaluate(a) => resolved(a),
        Command::Benchmark(a) => resolved(a),
        Command::Portfolio(a) => resolved(a),
        Command::Backtest(a) => resolved(a),
    };
    let man = RunManifest::new(name, typed, config.as_ref(), value)?;
    match &cli.command {
        Command::Simulate(a) => commands::cmd_simulate(a, man),
        Command::Estimate(a) => commands::cmd_estimate(a, man),
        Command::Evaluate(a) => commands::cmd_evaluate(a, man),
        Command::Benchmark(a) => commands::cmd_benchmark(a, man),
        Command::Portfolio(a) => commands::cmd_portfolio(a, man),
        Command::Backtest(a) => commands::cmd_backtest(a, man),
    }
}

fn main() {
    if let Err(e) = run(std::env::args_os().collect()) {
        eprintln!("monomvn: {e}");
        std::process::exit(e.exit_code());
    }
}
