//! Command-line front end: `verify`, `calibrate`, `sweep`, `oracle` and `analyze`.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_analyze, cmd_calibrate, cmd_oracle, cmd_sweep, cmd_verify, Outcome, CONTINUOUS_SWEEP_COLUMNS};
pub use config::{
    load_config, mechanism_of, parse_config, AnalysisConfig, DensityConfig, DiscreteConfig, MechanismConfig,
    OracleConfig, PaymentConfig, QuadratureConfig, SpaceConfig, SweepConfig,
};
pub use output::{format_float, to_json, SIGNIFICANT_DIGITS};

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "ADSCREEN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "adscreen", version, about = "Optimality checks for selling a good bundled with ads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Also write the tabular part of the report to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the condition battery for the configured mechanism.
    Verify(Common),
    /// Solve the zero-mass equations for the configured family's prices.
    Calibrate(Common),
    /// Tabulate regimes, prices and revenues over a range of payments.
    Sweep(Common),
    /// Compare against the exact LP optimum on discretized instances.
    Oracle(Common),
    /// Summarize the transformed measure.
    Analyze(Common),
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config(THREADS_ENV, format!("expected a positive integer, got `{v}`")))?;
    // A second initialization in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cmd: &Command) -> Result<Outcome> {
    configure_threads()?;
    let (f, common): (fn(&AnalysisConfig, Option<&std::path::Path>) -> Result<Outcome>, &Common) = match cmd {
        Command::Verify(c) => (cmd_verify, c),
        Command::Calibrate(c) => (cmd_calibrate, c),
        Command::Sweep(c) => (cmd_sweep, c),
        Command::Oracle(c) => (cmd_oracle, c),
        Command::Analyze(c) => (cmd_analyze, c),
    };
    let cfg = load_config(&common.config)?;
    f(&cfg, common.csv.as_deref())
}

/// Runs the CLI, writing JSON to `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(o) => {
            let _ = out.write_all(o.json.as_bytes());
            o.exit
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
