//! Command-line front end: scenario files, subcommands and report files.
//!
//! Exit statuses: 0 success, 1 I/O failure, 2 malformed input, 3 graph
//! error (disconnected, duplicate or unknown nodes, self-loops),
//! 4 numeric-domain error (superluminal speeds, negative delays, target
//! overflow).

pub mod commands;
pub mod error;
pub mod output;
pub mod quantity;
pub mod scenario_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::{exit, CliError};
pub use output::Format;
pub use scenario_file::{Resolved, ScenarioFile, SimOverrides};

#[derive(Debug, Parser)]
#[command(name = "relaysim", version, about = "Light-delay proof-of-work simulator and blocktime planner")]
pub struct Cli {
    /// How results are printed on standard output.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform a pair of events into a moving frame and classify them.
    Causality {
        /// Time separation: seconds, or a quantity such as `1.1 s`.
        #[arg(allow_hyphen_values = true)]
        dt: String,
        /// Space separation: meters, or a quantity such as `4e8 m` or `1 ls`.
        #[arg(allow_hyphen_values = true)]
        dx: String,
        /// Frame velocity: `0.98c`, `3e4 m/s`, `30 km/s` or plain m/s.
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
    /// Decode compact difficulty bits (8 hex digits) into the target.
    Difficulty { bits: String },
    /// Blocktime lower bound and single-currency verdict for a scenario.
    Plan {
        file: PathBuf,
        #[arg(long, default_value = "relaysim-out")]
        output_dir: PathBuf,
    },
    /// Run the network simulation described by a scenario file.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated time: seconds, or a quantity such as `30 d`.
        #[arg(long, value_parser = quantity::parse_duration_arg)]
        duration: Option<f64>,
        #[arg(long, value_parser = quantity::parse_duration_arg)]
        blocktime: Option<f64>,
        #[arg(long, default_value = "relaysim-out")]
        output_dir: PathBuf,
        /// Sweep this many consecutive seeds starting at the scenario seed.
        #[arg(long)]
        seeds: Option<u64>,
        /// Worker threads for sweeps; defaults to the available cores.
        #[arg(long)]
        workers: Option<usize>,
    },
}

pub fn execute(cli: Cli) -> Result<String, CliError> {
    let tables = match cli.command {
        Command::Causality { dt, dx, v } => commands::causality(&dt, &dx, &v)?,
        Command::Difficulty { bits } => commands::difficulty(&bits)?,
        Command::Plan { file, output_dir } => commands::plan(&file, SimOverrides::default(), &output_dir)?,
        Command::Simulate { file, seed, duration, blocktime, output_dir, seeds, workers } => {
            let opts = commands::SimulateOptions {
                overrides: SimOverrides { seed, duration, blocktime },
                output_dir,
                seeds,
                workers,
            };
            commands::simulate(&file, &opts)?
        }
    };
    Ok(output::render(&tables, cli.format))
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { exit::PARSE } else { exit::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(text) => {
            let _ = stdout.write_all(text.as_bytes());
            exit::SUCCESS
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}
