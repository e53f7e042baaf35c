use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lfe_cli::{run_path, Subcommand};

/// Periodic orbits of the relativistic Lorentz force equation.
///
/// Every run is described by its configuration file; results go to
/// report.txt, report.json and CSV files in the output directory.
/// Exit codes: 0 success, 2 hypothesis failure, 3 solver failure,
/// 4 configuration or i/o error. Log verbosity follows RUST_LOG.
#[derive(Parser)]
#[command(name = "lfe", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "lfe-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = run_path(cli.subcommand, &cli.config, &cli.out);
    ExitCode::from(code as u8)
}
