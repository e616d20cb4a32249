mod commands;
mod output;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use intervalmap::Error;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "intervalmap", version, about = "Attractors, Birkhoff averages and witness points of interval maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Map spec file.
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "INTERVALMAP_OUT", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cell size (command default if omitted).
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Orbit length or search depth (command default if omitted).
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Write only this artifact kind.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orbit CSV and cobweb plot.
    Orbit {
        /// Start point; drawn from the seed if omitted.
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Birkhoff averages and visiting frequencies at dyadic checkpoints.
    Stats {
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long, default_value = "x")]
        observable: String,
        /// Region such as `[0,0.5)`; repeatable.
        #[arg(long)]
        region: Vec<String>,
    },
    /// Basin census of attractors.
    Attractors {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// First return map to a base interval.
    Returnmap {
        /// Base interval `lo,hi`.
        #[arg(long, default_value = "0,0.5")]
        base: String,
        #[arg(long, default_value_t = 1e-12)]
        min_width: f64,
    },
    /// Lap numbers and entropy slope; the horizon is the largest n.
    Entropy,
    /// Grid components of critical points.
    Decompose,
    /// Witness point with alternating or maximal Birkhoff averages.
    Historic {
        #[arg(long, default_value = "x")]
        observable: String,
        /// Largest period searched for the maximizing orbit.
        #[arg(long, default_value_t = 12)]
        q: usize,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(long, default_value_t = 8.0)]
        ratio: f64,
        #[arg(long)]
        single_phase: bool,
        /// Census samples used to locate the cycle of intervals.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Cross-check suite on the configured map.
    Verify {
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, spec file or guard ranges.
    Usage(String),
    /// A check or computation failed.
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Precondition(_) | Error::ResolutionTooFine { .. } => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(1)
        }
    }
}
