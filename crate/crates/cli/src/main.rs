//! `quantscat`: quantized scattering angles, reference wave-optics profiles,
//! particle-by-particle ensembles and the comparison between them.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 no
//! admissible branch, 4 degenerate weights, 5 comparison outside threshold.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use commands::Invocation;
use config::Overrides;

type Handler = fn(&Invocation) -> Result<(), error::CliError>;

#[derive(Debug, Parser)]
#[command(name = "quantscat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the quantized branch table.
    Angles(Overrides),
    /// Write the reference intensity curve and its extrema.
    Oracle(Overrides),
    /// Run a particle ensemble into a screen histogram.
    Simulate(Overrides),
    /// Match quantized branches against reference extrema.
    Compare(Overrides),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags, run): (_, _, Handler) = match &cli.command {
        Command::Angles(f) => ("angles", f, commands::angles),
        Command::Oracle(f) => ("oracle", f, commands::oracle),
        Command::Simulate(f) => ("simulate", f, commands::simulate),
        Command::Compare(f) => ("compare", f, commands::compare),
    };
    match Invocation::load(name, flags).and_then(|inv| run(&inv)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quantscat {name}: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("{hint}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
