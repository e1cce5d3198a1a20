//! `vinepd` command-line front end.
//!
//! Subcommands cover the batch workflow: `pd` writes per-scale diagrams,
//! `stabilize` consolidates a pyramid (or previously written diagrams) into
//! a stable diagram, `plot` renders a diagram CSV as SVG, `match` prints the
//! correspondence between two diagrams, and `pipeline` drives whole
//! directories with a worker pool. Every output is a pure function of input
//! bytes and configuration.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod plot;

pub use config::PipelineConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_MISSING_INPUT: i32 = 2;
pub const EXIT_INCOMPLETE_PYRAMID: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Failure channel mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    MissingInput(String),
    IncompletePyramid(String),
    Parse(String),
    Partial(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::MissingInput(_) => EXIT_MISSING_INPUT,
            CliError::IncompletePyramid(_) => EXIT_INCOMPLETE_PYRAMID,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Partial(_) => EXIT_PARTIAL,
            CliError::Other(_) => EXIT_PARTIAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::MissingInput(m)
            | CliError::IncompletePyramid(m)
            | CliError::Parse(m)
            | CliError::Partial(m)
            | CliError::Other(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vinepd",
    about = "Multi-scale cubical persistence diagrams with cross-scale stabilization",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute per-scale persistence diagrams of one image.
    Pd {
        /// Input image (8-bit PNG or binary PGM).
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Consolidate multi-scale diagrams of one image into a stable diagram.
    ///
    /// The input is either an image or a directory of previously written
    /// `*.pd.csv` files covering scales 1..n.
    Stabilize {
        input: PathBuf,
        /// Also write the tracked vines as `<stem>.<filtration>.vines.json`.
        #[arg(long = "dump-vines")]
        dump_vines: bool,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Render a diagram CSV as a deterministic SVG scatter plot.
    Plot {
        input: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        output: PathBuf,
        /// Plot edge length in pixels.
        #[arg(long, default_value_t = 480)]
        size: u32,
    },
    /// Print the thresholded optimal matching between two diagram CSVs.
    Match {
        diagram_a: PathBuf,
        diagram_b: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Process a directory of images: pyramids, diagrams, stable diagrams,
    /// and one manifest per image.
    Pipeline {
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

/// Flags shared by the computing subcommands; unset values fall back to the
/// config file, then to built-in defaults.
#[derive(Debug, Args, Default)]
pub struct CommonOpts {
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Pyramid depth (default 3).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Distance metric: euclidean, pscaled, or relpers (default relpers).
    #[arg(long)]
    pub metric: Option<String>,
    /// Matching threshold (default 0.3).
    #[arg(long = "tau-m")]
    pub tau_m: Option<f64>,
    /// Stability threshold in [0, 1] (default 0.7).
    #[arg(long = "tau-s")]
    pub tau_s: Option<f64>,
    /// Filtration to run; repeat for several (default both).
    #[arg(long = "filtration")]
    pub filtration: Vec<String>,
    /// Drop zero-persistence points from diagrams.
    #[arg(long = "drop-zero-pers")]
    pub drop_zero_pers: bool,
    /// Worker threads for pipeline runs (default 1).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// TOML config file consulted for unset flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parses arguments, runs the subcommand, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("vinepd: {}", err.message());
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Pd { input, opts } => {
            let config = PipelineConfig::resolve(&opts)?;
            let output = require_output(&opts)?;
            commands::cmd_pd(&input, &output, &config)
        }
        Command::Stabilize {
            input,
            dump_vines,
            opts,
        } => {
            let config = PipelineConfig::resolve(&opts)?;
            let output = require_output(&opts)?;
            commands::cmd_stabilize(&input, &output, &config, dump_vines)
        }
        Command::Plot {
            input,
            output,
            size,
        } => plot::cmd_plot(&input, &output, size),
        Command::Match {
            diagram_a,
            diagram_b,
            opts,
        } => {
            let config = PipelineConfig::resolve(&opts)?;
            commands::cmd_match(&diagram_a, &diagram_b, &config)
        }
        Command::Pipeline { input, opts } => {
            let config = PipelineConfig::resolve(&opts)?;
            let output = require_output(&opts)?;
            pipeline::cmd_pipeline(&input, &output, &config)
        }
    }
}

fn require_output(opts: &CommonOpts) -> Result<PathBuf, CliError> {
    opts.output
        .clone()
        .ok_or_else(|| CliError::Usage("--output is required".to_string()))
}
