//! `hvsolve`: check, solve, certify and cross-check Hammerstein–Volterra
//! instances described by a JSON config.

mod config;
mod output;
mod run;

use std::path::PathBuf;

use clap::Parser;

use run::{Command, RunArgs};

#[derive(Debug, Parser)]
#[command(name = "hvsolve", version, about = "Monotone Picard solver for Hammerstein–Volterra equations")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `<config stem>.out` beside the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue past failing assumption entries (recorded in the summary).
    #[arg(long)]
    force: bool,
    /// Seed for the checker's random samples.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    let out = cli.out.unwrap_or_else(|| run::default_out(&cli.config));
    let code = run::run(&RunArgs { command: cli.command, config: cli.config, out, force: cli.force, seed: cli.seed });
    std::process::exit(code);
}
