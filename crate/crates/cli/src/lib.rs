//! `qlight`: one subcommand per experiment, one JSON document per run.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error. Errors are reported
//! as `{"error_kind": ..., "detail": ...}`.

pub mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::Value;

pub use output::{to_json_string, write_json};

/// Environment variable overriding the simulator qubit cap.
pub const QUBIT_CAP_ENV: &str = "LF_QUBIT_CAP";

#[derive(Parser, Debug)]
#[command(name = "qlight", version, about = "Quantum lightning and subspace money experiments")]
pub struct Cli {
    /// JSON object whose keys mirror the long flags of the chosen subcommand.
    /// Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Keys and evaluation of the degree-2 hash.
    #[command(subcommand)]
    Hash(commands::hash::HashCmd),
    /// Linearisation attacks on the hash.
    #[command(subcommand)]
    Attack(commands::attack::AttackCmd),
    /// Bolt generation, verification and security games.
    #[command(subcommand)]
    Lightning(commands::lightning::LightningCmd),
    /// Subspace-state money.
    #[command(subcommand)]
    Money(commands::money::MoneyCmd),
    /// Spectral bounds on conversion and cloning.
    #[command(subcommand)]
    Bound(commands::bound::BoundCmd),
    /// Certified random strings from bolt serials.
    #[command(subcommand)]
    Randomness(commands::randomness::RandomnessCmd),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] qlight_core::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Input(_) => "input",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

core_error!(
    qlight_core::Gf2Error,
    qlight_core::MqError,
    qlight_core::QsimError,
    qlight_core::LightningError,
    qlight_core::MoneyError,
    qlight_core::BoundsError
);

/// Parses `argv` (program name first), runs the command and writes one JSON
/// document to `out` (or the `--out` file). Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Result<Vec<String>, _> = argv.into_iter().map(|a| a.into().into_string()).collect();
    let result = match argv {
        Ok(argv) => parse_and_run(argv, out),
        Err(bad) => Err(CliError::Usage(format!("non-UTF-8 argument {bad:?}"))),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let doc = serde_json::json!({ "error_kind": e.kind(), "detail": e.to_string() });
            let _ = write_json(&doc, out);
            e.exit_code()
        }
    }
}

fn parse_and_run(argv: Vec<String>, out: &mut dyn Write) -> Result<i32, CliError> {
    if let Ok(v) = std::env::var(QUBIT_CAP_ENV) {
        let cap: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{QUBIT_CAP_ENV}={v} is not a qubit count")))?;
        qlight_core::qsim::set_qubit_cap(cap);
    }
    let cmd = override_self(Cli::command());
    let argv = config::merge(&cmd, argv)?;
    let matches = match cmd.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => return clap_outcome(e, out),
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let report = dispatch(cli.command)?;
    match &cli.out {
        Some(path) => {
            let mut file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
            write_json(&report, &mut file).map_err(|e| io_error(path, e))?;
        }
        None => write_json(&report, out).map_err(|e| io_error("<stdout>", e))?,
    }
    Ok(0)
}

fn clap_outcome(e: clap::Error, out: &mut dyn Write) -> Result<i32, CliError> {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            write!(out, "{}", e.render()).map_err(|io| io_error("<stdout>", io))?;
            Ok(0)
        }
        ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprint!("{}", e.render());
            Err(CliError::Usage("missing subcommand".into()))
        }
        _ => {
            eprint!("{}", e.render());
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            Err(CliError::Usage(first.to_string()))
        }
    }
}

/// Lets config-supplied flags be overridden by later command-line flags.
fn override_self(cmd: clap::Command) -> clap::Command {
    cmd.args_override_self(true).mut_subcommands(override_self)
}

pub(crate) fn io_error(path: impl AsRef<std::path::Path>, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.as_ref().display().to_string(),
        detail: e.to_string(),
    }
}

fn dispatch(cmd: Command) -> Result<Value, CliError> {
    match cmd {
        Command::Hash(c) => commands::hash::run(c),
        Command::Attack(c) => commands::attack::run(c),
        Command::Lightning(c) => commands::lightning::run(c),
        Command::Money(c) => commands::money::run(c),
        Command::Bound(c) => commands::bound::run(c),
        Command::Randomness(c) => commands::randomness::run(c),
    }
}
