//! `polarfog` command-line tool.
//!
//! Exit status: 0 on success, 1 when any input failed (the rest are still
//! processed), 2 on a usage or configuration error.

mod commands;
mod config;
mod inputs;
mod planes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Overrides, Settings};

#[derive(Parser, Debug)]
#[command(name = "polarfog", version, about = "Polarization image dehazing and detail enhancement")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split mosaics into angle planes, Stokes parameters, DOLP and AOLP
    Demosaic {
        #[arg(required = true)]
        inputs: Vec<String>,
        /// Output directory; planes are written as <stem>_<plane>.png
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Dehaze grayscale images
    Dehaze {
        #[arg(required = true)]
        inputs: Vec<String>,
        /// Output file (single input) or directory
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Add synthetic haze to clear scenes
    Synth {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
        /// Scattering coefficient
        #[arg(long)]
        beta: f64,
        /// Airlight at infinity, in (0, 1]
        #[arg(long = "ainf")]
        a_inf: f64,
        /// Depth image; scaled by --depth-scale. Defaults to a left-to-right ramp
        #[arg(long)]
        depth: Option<PathBuf>,
        /// Depth of a white depth-image pixel, or the far end of the ramp
        #[arg(long, default_value_t = 1.0)]
        depth_scale: f64,
        /// Also write the airlight map here
        #[arg(long)]
        airlight: Option<PathBuf>,
    },
    /// Print quality metrics as CSV
    Metrics {
        /// Original image or directory
        #[arg(long)]
        original: PathBuf,
        /// Restored image or directory (paired by file name)
        #[arg(long)]
        restored: PathBuf,
    },
    /// Match image histograms to a reference
    Histmatch {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Demosaic, dehaze, match and score every scene in a directory
    Pipeline {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("POLARFOG_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("POLARFOG_THREADS must be a non-negative integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> anyhow::Result<usize> {
    init_threads()?;
    let s = Settings::resolve(&cli.overrides)?;
    if let Some(seed) = s.seed {
        log::debug!("seed {seed} ignored, processing is deterministic");
    }
    match &cli.command {
        Command::Demosaic { inputs, output } => commands::demosaic(&s, inputs, output),
        Command::Dehaze { inputs, output } => commands::dehaze_cmd(&s, inputs, output),
        Command::Synth { inputs, output, beta, a_inf, depth, depth_scale, airlight } => {
            let args = commands::SynthArgs {
                beta: *beta,
                a_inf: *a_inf,
                depth: depth.as_deref(),
                depth_scale: *depth_scale,
                airlight: airlight.as_deref(),
            };
            commands::synth(inputs, output, &args)
        }
        Command::Metrics { original, restored } => commands::metrics(&s, original, restored),
        Command::Histmatch { reference, inputs, output } => commands::histmatch(&s, reference, inputs, output),
        Command::Pipeline { inputs, output } => commands::pipeline(&s, inputs, output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
