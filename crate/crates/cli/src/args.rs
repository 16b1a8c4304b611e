use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stall_core::{Aggregation, Fusion};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(name = "stall", version, about = "Score video embedding sequences against real-video statistics")]
pub struct Cli {
    /// Root seed; every random draw is derived from it.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus with calibration and test manifests.
    Synth(SynthArgs),
    /// Fit a calibration profile on real videos.
    Calibrate(CalibrateArgs),
    /// Score videos against a profile and write a score CSV.
    Score(ScoreArgs),
    /// Compute AUC and AP from a score CSV.
    Eval(EvalArgs),
    /// Normality and sphere diagnostics for a manifest.
    Stats(StatsArgs),
    /// Write temporally perturbed copies of the videos in a manifest.
    Perturb(PerturbArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AggArg {
    Min,
    Mean,
    Max,
}

impl From<AggArg> for Aggregation {
    fn from(a: AggArg) -> Self {
        match a {
            AggArg::Min => Aggregation::Min,
            AggArg::Mean => Aggregation::Mean,
            AggArg::Max => Aggregation::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FusionArg {
    Mean,
    Product,
}

impl From<FusionArg> for Fusion {
    fn from(f: FusionArg) -> Self {
        match f {
            FusionArg::Mean => Fusion::Mean,
            FusionArg::Product => Fusion::Product,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

/// Frame-rate and length standardization applied when loading videos.
#[derive(Debug, Args)]
pub struct LoadArgs {
    #[arg(long, default_value_t = 8.0)]
    pub target_fps: f64,
    #[arg(long, default_value_t = 16)]
    pub max_frames: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub n_calibration: usize,
    #[arg(long, default_value_t = 500)]
    pub n_test_real: usize,
    #[arg(long, default_value_t = 500)]
    pub n_test_fake: usize,
    #[arg(long, default_value_t = 16)]
    pub frames: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 8.0)]
    pub fps: f64,
    /// Fake anchor shift along coordinate 0, in stds.
    #[arg(long, default_value_t = 5.0)]
    pub anchor_shift: f64,
    #[arg(long, default_value_t = 1.0)]
    pub transition_scale: f64,
    #[arg(long, default_value_t = 1.5)]
    pub direction_bias: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Profile file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub derivative_order: usize,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    #[arg(long, value_enum, default_value_t = AggArg::Max)]
    pub spatial_agg: AggArg,
    #[arg(long, value_enum, default_value_t = AggArg::Min)]
    pub temporal_agg: AggArg,
    /// Absolute eigenvalue floor. Without it a floor of 1e-10 times the
    /// largest eigenvalue is used.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fit the temporal model on one random transition per video.
    #[arg(long)]
    pub single_transition: bool,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub profile: PathBuf,
    /// Score CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FusionArg::Mean)]
    pub fusion: FusionArg,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
    /// Must match the profile when given.
    #[arg(long)]
    pub derivative_order: Option<usize>,
    /// Must match the profile when given.
    #[arg(long)]
    pub step: Option<usize>,
    /// Must match the profile when given.
    #[arg(long, value_enum)]
    pub spatial_agg: Option<AggArg>,
    /// Must match the profile when given.
    #[arg(long, value_enum)]
    pub temporal_agg: Option<AggArg>,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Score CSV produced by `score`.
    #[arg(long)]
    pub scores: PathBuf,
    /// Manifest with real-video sources; required for `--balanced`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Eval CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write one row per (generator, metric).
    #[arg(long)]
    pub long_out: Option<PathBuf>,
    #[arg(long, default_value = "benchmark")]
    pub benchmark: String,
    /// One result per generator instead of pooling all generated videos.
    #[arg(long)]
    pub per_generator: bool,
    /// Subsample reals to match each generator's count.
    #[arg(long)]
    pub balanced: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Population {
    Frames,
    Transitions,
    RawTransitions,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Population::Transitions)]
    pub population: Population,
    #[arg(long, default_value_t = 40)]
    pub groups: usize,
    #[arg(long, default_value_t = 250)]
    pub group_size: usize,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    /// Cap on vectors used for the pairwise cosine histogram.
    #[arg(long, default_value_t = 3000)]
    pub cosine_limit: usize,
    #[command(flatten)]
    pub load: LoadArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum PerturbKind {
    Reverse,
    Shuffle,
    Insert,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for perturbed files and `manifest.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PerturbKind,
    /// Embedding file whose first frame is inserted (`--kind insert`).
    #[arg(long)]
    pub vector: Option<PathBuf>,
    /// Insert position; defaults to the middle of each video.
    #[arg(long)]
    pub position: Option<usize>,
    #[command(flatten)]
    pub load: LoadArgs,
}
