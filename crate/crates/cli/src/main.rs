mod commands;
mod config;
mod error;
mod manifest;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliError;

/// Uncertainty, calibration and buffer-zone analysis for wildfire spread predictions.
#[derive(Debug, Parser)]
#[command(name = "fireline-uq", version, args_override_self = true)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Probability threshold for a burned pixel (inclusive)
    #[arg(long, global = true, default_value_t = fireline_uq_core::DEFAULT_THRESHOLD)]
    pub threshold: f64,

    /// Meters per pixel; overrides f32bin headers (csv/pgm default to 375)
    #[arg(long, global = true)]
    pub resolution_m: Option<f64>,

    /// Number of equal-width ECE bins
    #[arg(long, global = true, default_value_t = fireline_uq_core::calibration::DEFAULT_ECE_BINS)]
    pub ece_bins: usize,

    /// Probability clamp for NLL
    #[arg(long, global = true, default_value_t = fireline_uq_core::calibration::DEFAULT_NLL_EPSILON)]
    pub nll_epsilon: f64,

    /// Fixed KDE bandwidth in meters (default: Silverman's rule)
    #[arg(long, global = true)]
    pub kde_bandwidth: Option<f64>,

    /// Number of KDE evaluation points
    #[arg(long, global = true, default_value_t = fireline_uq_core::buffer::DEFAULT_KDE_GRID)]
    pub kde_grid: usize,

    /// Raster format for inputs without a recognised extension and for raster outputs
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Directory for SVG plots
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,

    /// Output file (JSON reports) or directory (aggregate, synth)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    F32bin,
    Csv,
    Pgm,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance metrics between a ground-truth mask and a prediction
    Metrics {
        /// Ground-truth mask
        gt: PathBuf,
        /// Predicted mask, probability map, or stack (file or directory)
        pred: PathBuf,
    },
    /// Calibration scores of predicted probabilities
    Calibrate {
        /// Probability map or stack (file or directory)
        #[arg(required_unless_present = "manifest")]
        prob: Option<PathBuf>,
        /// Ground-truth mask
        #[arg(required_unless_present = "manifest")]
        gt: Option<PathBuf>,
        /// Events manifest; scores all events as one pooled sample
        #[arg(long, conflicts_with_all = ["prob", "gt"])]
        manifest: Option<PathBuf>,
    },
    /// Per-event distances and KDE peak buffer widths over an events manifest
    Buffer {
        /// CSV with header event_id,gt_path,stack_path
        manifest: PathBuf,
    },
    /// Per-pixel mean, variance and std of one or more pooled stacks
    Aggregate {
        /// Stacks (files or directories); several are pooled member-wise
        #[arg(required = true)]
        stacks: Vec<PathBuf>,
    },
    /// Generate a synthetic events suite with a manifest
    Synth(commands::synth::SynthArgs),
    /// Check accelerated distance computations against brute force
    Verify(commands::verify::VerifyArgs),
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var("FIRELINE_UQ_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Input(format!("FIRELINE_UQ_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::from_args(&cli.run)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Metrics { gt, pred } => commands::metrics(&config, &gt, &pred),
        Command::Calibrate { prob, gt, manifest } => match manifest {
            Some(m) => commands::calibrate_manifest(&config, &m),
            None => commands::calibrate(&config, &prob.expect("required"), &gt.expect("required")),
        },
        Command::Buffer { manifest } => commands::buffer(&config, &manifest),
        Command::Aggregate { stacks } => commands::aggregate(&config, &stacks),
        Command::Synth(args) => commands::synth::run(&config, &args),
        Command::Verify(args) => commands::verify::run(&config, &args),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("fireline-uq: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(1),
    }
}
