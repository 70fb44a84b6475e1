//! Command-line front end: simulate crosses, scan them with PruneDIRECT or
//! exhaustively, run permutation tests, compare engines and benchmark.
//!
//! Every JSON document written carries `format_version`. Outputs are
//! written through a temporary file and renamed into place.

pub mod args;
pub mod commands;
pub mod output;

use std::process::ExitCode;

use clap::Parser;

pub use args::{Cli, Command};
pub use output::FORMAT_VERSION;

/// Failure classes mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Engines or a re-fit disagreed; exit status 1.
    Disagreement(String),
    /// Bad configuration, unreadable input or refused work; exit status 2.
    Config(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Disagreement(_) => 1,
            Self::Config(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Disagreement(msg) => write!(f, "disagreement: {msg}"),
            Self::Config(err) => write!(f, "{err:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(err: E) -> Self {
        Self::Config(err.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(anyhow::anyhow!(msg.into()))
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(config_error("thread count must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Simulate(a) => commands::simulate::cmd_simulate(&a),
        Command::Scan(a) => commands::scan::cmd_scan(&a),
        Command::Permute(a) => commands::permute::cmd_permute(&a),
        Command::Compare(a) => commands::compare::cmd_compare(&a),
        Command::Bench(a) => commands::bench::cmd_bench(&a),
        Command::Report(a) => commands::report::cmd_report(&a),
    }
}

/// Parse `args`, run, and translate the outcome into an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("prunedirect: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
