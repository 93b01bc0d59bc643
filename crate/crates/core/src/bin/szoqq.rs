use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use szoqq::cli::{cmd_list, cmd_run, cmd_verify, RunOptions};

/// Safe zeroth-order optimization of black-box constrained problems.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver on a JSON config; writes a CSV trace, a sample log and a JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Replay a run's samples against ground truth.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        problem: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// List the available problems.
    List,
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run { config, trace, report, quiet } => cmd_run(&config, &RunOptions { trace, report, quiet }),
        Command::Verify { trace, problem, report, quiet } => cmd_verify(&trace, &problem, report.as_deref(), quiet),
        Command::List => cmd_list(),
    };
    ExitCode::from(code as u8)
}
