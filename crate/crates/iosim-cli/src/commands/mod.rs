//! Operator entry points. Exit codes: 0 success, 1 verification failure,
//! 2 input error, 3 backend error.

mod analyze;
mod compare;
mod export;
mod replay;
mod simulate;

use clap::{Parser, Subcommand};
use iosim::domain::RunManifest;
use std::path::Path;

#[derive(Debug, Parser)]
#[command(name = "iosim", version, about = "Simulate and measure coordinated influence campaigns on a microblog-style network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation and write its event log and manifest.
    Simulate(simulate::SimulateArgs),
    /// Compute the full metrics report for a recorded log.
    Analyze(analyze::AnalyzeArgs),
    /// Compare metric reports across regimes with Mann-Whitney U tests.
    Compare(compare::CompareArgs),
    /// Re-execute a run from its config and verify the log digest.
    Replay(replay::ReplayArgs),
    /// Export the dashboard-compatible JSON bundle for a log.
    ExportDashboard(export::ExportArgs),
}

/// Command failure carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: missing/corrupt files, invalid config. Exit 2.
    Input(String),
    /// Verification mismatch. Exit 1.
    Verify(String),
    /// Backend unreachable or unusable. Exit 3.
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Input(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Verify(m) | CliError::Backend(m) => m,
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Compare(args) => compare::run(args),
        Command::Replay(args) => replay::run(args),
        Command::ExportDashboard(args) => export::run(args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}

/// Locate and parse the manifest sitting beside an event log.
pub(crate) fn manifest_beside(log: &Path) -> Result<RunManifest, CliError> {
    let dir = log.parent().unwrap_or_else(|| Path::new("."));
    let path = dir.join("manifest.json");
    let raw = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Input(format!("cannot read manifest {}: {e}", path.display()))
    })?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Input(format!("cannot parse manifest {}: {e}", path.display())))
}

pub(crate) fn write_pretty_json<T: serde::Serialize>(
    path: &Path,
    value: &T,
) -> Result<(), CliError> {
    let text = iosim::store::canonical_pretty(value);
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
