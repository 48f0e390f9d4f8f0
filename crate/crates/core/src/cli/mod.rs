//! Command-line driver.
//!
//! ```text
//! qgeokit <distance|kahler-check|evolve|oracle> --config <path> [--out <dir>] [--seed <u64>] [--json]
//! ```
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! configuration or IO errors.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

pub use config::{Command, RunConfig};
pub use report::{Criterion, Record, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub(crate) fn from_lib(err: crate::error::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandArg {
    Distance,
    KahlerCheck,
    Evolve,
    Oracle,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Distance => Command::Distance,
            CommandArg::KahlerCheck => Command::KahlerCheck,
            CommandArg::Evolve => Command::Evolve,
            CommandArg::Oracle => Command::Oracle,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qgeokit",
    version,
    about = "Geometry and dynamics checks on discrete probability spaces"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: CommandArg,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for the report and CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the JSON report to stdout.
    #[arg(long)]
    pub json: bool,
}

/// Runs a parsed invocation and returns the report.
pub fn execute(args: &Args) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let run = RunConfig::from_json(&text)?;
    let requested = Command::from(args.command);
    if run.command != requested {
        return Err(CliError::Config(format!(
            "config is for `{}` but `{}` was requested",
            run.command.as_str(),
            requested.as_str()
        )));
    }
    let seed = args.seed.or(run.seed).unwrap_or(0);
    let out = args
        .out
        .clone()
        .or_else(|| run.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;

    let mut report = match requested {
        Command::Distance => commands::cmd_distance(&run, seed, &out)?,
        Command::KahlerCheck => commands::cmd_kahler_check(&run, seed, &out)?,
        Command::Evolve => commands::cmd_evolve(&run, seed, &out)?,
        Command::Oracle => commands::cmd_oracle(&run, seed, &out)?,
    };
    let path = out.join("report.json");
    report.outputs.push(path.display().to_string());
    report.write_json(&path)?;
    Ok(report)
}

pub fn exit_code(report: &Report) -> i32 {
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILURE
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(args) => args,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_PASS };
        }
    };
    match execute(&args) {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            let text = if args.json {
                report.to_json() + "\n"
            } else {
                report.to_text()
            };
            let _ = stdout.write_all(text.as_bytes());
            exit_code(&report)
        }
        Err(err) => {
            eprintln!("qgeokit: {err}");
            EXIT_CONFIG_ERROR
        }
    }
}
