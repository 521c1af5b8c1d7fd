//! `odhol`: scenario runner for off-diagonal holonomy computations.
//!
//! Exit status: 0 when every check passes, 2 when a numeric check fails,
//! 1 for usage and configuration errors.

mod config;
mod error;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, ScenarioConfig, ScenarioKind};
use error::CliError;

#[derive(Parser)]
#[command(name = "odhol", version, about = "Non-Abelian off-diagonal holonomies of subspace curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Holonomies U^(κ) for index sequences on one curve.
    Holonomy(Common),
    /// S_tot unitarity, rank budgets, trace identity and strict γ norms.
    Diagnostics(Common),
    /// Tripod status sweep over path endpoints (CSV).
    Tripod(Common),
    /// Interferometric extraction runs (JSON lines and CSV).
    Interferometer(Common),
    /// Engine vs tripod closed forms on a fixture path set.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario config (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Grid intervals M.
    #[arg(long, value_name = "M")]
    grid: Option<usize>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Check tolerance (meaning depends on the scenario).
    #[arg(long, value_name = "FLOAT")]
    tolerance: Option<f64>,
}

fn run(cli: Cli) -> Result<scenarios::Outcome, CliError> {
    let (kind, common) = match cli.command {
        Command::Holonomy(c) => (ScenarioKind::Holonomy, c),
        Command::Diagnostics(c) => (ScenarioKind::Diagnostics, c),
        Command::Tripod(c) => (ScenarioKind::TripodSweep, c),
        Command::Interferometer(c) => (ScenarioKind::Interferometer, c),
        Command::OracleCheck(c) => (ScenarioKind::OracleCheck, c),
    };
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::empty(),
    };
    cfg.apply(&Overrides {
        grid: common.grid,
        seed: common.seed,
        out: common.out,
        tolerance: common.tolerance,
    });
    scenarios::run(&cfg, kind)
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
    match run(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("wrote {}", scenarios::describe_files(&outcome.files));
            if outcome.failures.is_empty() {
                println!("all checks passed");
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("check failed: {f}");
                }
                eprintln!("{} check(s) failed", outcome.failures.len());
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
