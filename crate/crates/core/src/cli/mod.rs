//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 separation
//! in a fit, 3 bad input (arguments, files, parse errors).

mod fit;
mod oracle;
mod reproduce;
mod simulate;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fit::FitArgs;
pub use oracle::OracleArgs;
pub use reproduce::{ReproduceArgs, Study};
pub use simulate::SimulateArgs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_SEPARATION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Environment variable giving the default worker-thread count.
pub const THREADS_ENV: &str = "LARFI_THREADS";

#[derive(Debug, Parser)]
#[command(name = "larfi", version, about = "Exact and empirical Fisher information for logistic autoregressive binary series")]
pub struct Cli {
    /// Worker threads for Monte Carlo studies (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fit LAR(p)/LARX(p) to a panel CSV and report Wald inference.
    Fit(FitArgs),
    /// Simulate a panel CSV.
    Simulate(SimulateArgs),
    /// Re-run a published simulation study and write comparison CSVs.
    Reproduce(ReproduceArgs),
    /// Cross-check every exact-information algorithm on random inputs.
    OracleCheck(OracleArgs),
    /// Re-run the command embedded in a result document or manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A JSON result document or run manifest.
    pub from: PathBuf,
}

/// Outcome of a command, before mapping to an exit code.
pub(crate) enum Outcome {
    Ok,
    Separation,
    VerificationFailed,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) | Error::NotPositiveDefinite { .. } => EXIT_VERIFICATION,
        _ => EXIT_INPUT,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // A second initialisation in the same process is harmless to ignore.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(&cli.command) {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::Separation) => EXIT_SEPARATION,
        Ok(Outcome::VerificationFailed) => EXIT_VERIFICATION,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Fit(a) => fit::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Reproduce(a) => reproduce::run(a),
        Command::OracleCheck(a) => oracle::run(a),
        Command::Replay(a) => replay(a),
    }
}

/// Embeds a command in a JSON config value.
pub(crate) fn command_config(cmd: &Command) -> serde_json::Value {
    serde_json::to_value(cmd).expect("command arguments always serialize")
}

fn replay(args: &ReplayArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&args.from)?;
    let doc: serde_json::Value = serde_json::from_str(&text)?;
    let config = doc
        .get("metadata")
        .and_then(|m| m.get("config"))
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no metadata.config", args.from.display())))?;
    let cmd: Command = serde_json::from_value(config.clone())?;
    if matches!(cmd, Command::Replay(_)) {
        return Err(Error::InvalidArgument("refusing to replay a replay".into()));
    }
    dispatch(&cmd)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Formats an optional float for CSV output; missing values are empty.
pub(crate) fn opt(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map(|x| format!("{x}")).unwrap_or_default()
}
