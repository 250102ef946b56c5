mod commands;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greedybins_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "greedybins",
    version,
    about = "Simulate and bound GREEDY d-choice balls-into-bins"
)]
struct Cli {
    /// Worker threads for replicated experiments (0 = all cores).
    #[arg(long, global = true, env = "GREEDYBINS_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one allocation and emit load histograms.
    Simulate(commands::simulate::Args),
    /// Integrate the fluid-limit ODE and emit the z_k grid.
    Fluid(commands::fluid::Args),
    /// Evaluate a closed-form bound.
    Bound(commands::bound::Args),
    /// Run a replicated experiment described by a key=value config file.
    Experiment(commands::experiment::Args),
    /// Render one of the reference tables.
    Table(commands::table::Args),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Check(_) => 3,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Fluid(args) => commands::fluid::run(args),
        Command::Bound(args) => commands::bound::run(args),
        Command::Experiment(args) => commands::experiment::run(args, cli.threads),
        Command::Table(args) => commands::table::run(args, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
