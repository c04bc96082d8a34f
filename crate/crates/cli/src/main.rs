//! `iqa`: full-reference WEQA scoring, synthetic corpora, blind model
//! training and blind assessment.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "iqa",
    version,
    about = "Wavelet-domain image quality assessment, with and without reference"
)]
pub struct Cli {
    /// JSON run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Score a distorted image against its reference (WEQA and SSIM).
    Fr(FrArgs),
    /// Apply one synthetic distortion to an image.
    Distort(DistortArgs),
    /// Build a distorted corpus and its manifest.
    Corpus(CorpusArgs),
    /// Train a blind model from a manifest.
    Train(TrainArgs),
    /// Blind assessment with a trained model.
    Nr(NrArgs),
    /// Correlation report over a manifest.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
pub struct WaveletFlags {
    /// Wavelet filter (haar or db2).
    #[arg(long)]
    pub filter: Option<String>,
    /// Decomposition levels (default depends on image size).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Width of the coupling between wave-vector components.
    #[arg(long)]
    pub g_sigma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct FrArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub dist: PathBuf,
    /// WEQA map: .png/.pgm for a stretched 8-bit image, anything else raw.
    #[arg(long)]
    pub map_out: Option<PathBuf>,
    /// SSIM distortion map (1 - ssim), same formats.
    #[arg(long)]
    pub ssim_map_out: Option<PathBuf>,
    /// JSON report (default: standard output).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub wavelet: WaveletFlags,
}

#[derive(Args, Debug)]
pub struct DistortArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long = "type")]
    pub kind: String,
    #[arg(long)]
    pub level: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Directory of reference images (.png, .pgm, .ppm).
    #[arg(long, conflicts_with = "synthetic")]
    pub refs: Option<PathBuf>,
    /// Use N procedural references instead of a directory.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Side length of procedural references.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path (default: <out>/manifest.csv).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Comma-separated distortion types (default: all).
    #[arg(long, value_delimiter = ',')]
    pub types: Vec<String>,
    /// Comma-separated levels (default: 1..5).
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Distortion type to train on, or `pooled` for all (experimental).
    #[arg(long = "type")]
    pub kind: Option<String>,
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long)]
    pub trees: Option<usize>,
    /// Features tried per split.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub per_image: Option<usize>,
    #[arg(long)]
    pub strata: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub wavelet: WaveletFlags,
    /// Also fit the kernel score regressor and write it here (JSON).
    #[arg(long)]
    pub kernel_scorer: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub scorer_stride: Option<usize>,
    /// Export the sampled training table.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    /// JSON training summary.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NrArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    pub dist: Vec<PathBuf>,
    /// Predicted map (single --dist only).
    #[arg(long)]
    pub map_out: Option<PathBuf>,
    /// JSON-lines report (default: standard output).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Kernel score regressor from `train --kernel-scorer`.
    #[arg(long)]
    pub scorer: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[command(flatten)]
    pub wavelet: WaveletFlags,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg.push_str(": ");
                    msg.push_str(&c);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(error::exit_code(&e) as u8)
        }
    }
}
