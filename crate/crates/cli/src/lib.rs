//! Command-line front end for the playout starvation solvers.
//!
//! [`run`] is the whole program minus process exit, so tests drive it
//! in-process.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};

use clap::error::ErrorKind;
use clap::Parser;

pub mod args;
pub mod commands;
pub mod output;
pub mod sweep;

use args::{Cli, Command};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    VerdictFailed,
}

#[derive(Debug)]
pub enum CliError {
    /// Missing or inconsistent flags.
    Usage(String),
    /// Parameter or domain error from the library, reported verbatim.
    Library(playout_core::Error),
    /// Malformed input file.
    Input(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Library(_) | CliError::Input(_) | CliError::Io(_) => EXIT_DOMAIN,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<playout_core::Error> for CliError {
    fn from(e: playout_core::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_SUCCESS
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Exact(a) => commands::exact(a, stdout),
        Command::Recursive(a) => commands::recursive(a, stdout),
        Command::Takacs(a) => commands::takacs(a, stdout),
        Command::Fluid(a) => commands::fluid(a, stdout),
        Command::Qoe(a) => commands::qoe(a, stdout),
        Command::Simulate(a) => commands::simulate_cmd(a, stdout),
        Command::Compare(a) => commands::compare(a, stdout, stderr),
    };
    match result {
        Ok(Status::Success) => EXIT_SUCCESS,
        Ok(Status::VerdictFailed) => EXIT_VERDICT,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
