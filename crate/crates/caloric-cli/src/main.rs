//! `caloric` command-line front end.
//!
//! Every subcommand reads one JSON config, writes a JSON report (and CSV
//! grids where applicable) into the output directory, and exits with
//! 0 = success / condition met, 2 = certified failure (budget missed,
//! condition fails), 1 = usage or config error. Runs are deterministic:
//! the same config reproduces byte-identical outputs.

use std::path::PathBuf;
use std::process::ExitCode;

use caloric_cli::commands::{self, Command};
use clap::Parser;

#[derive(Parser)]
#[command(
    name = "caloric",
    version,
    about = "Point-source approximation of heat flows, Cole-Hopf transport, Runge slice checks, and universal series at desk scale"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and grids.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for grid evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, default_value_t = false)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config_path) = cli.config.clone() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(1);
    };
    let ctx = commands::Context {
        out_dir: cli.out.clone(),
        threads: cli.threads.max(1),
        verbose: cli.verbose,
        command: cli.command.name(),
    };
    match commands::run(cli.command, &config_path, &ctx) {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::CertifiedFailure) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
