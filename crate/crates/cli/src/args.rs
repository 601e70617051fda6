use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "acdc",
    version,
    about = "Alpha-carving decision chains for imbalanced binary data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a decision chain and write the model
    Train(TrainArgs),
    /// Score a CSV with a trained model
    Score(ScoreArgs),
    /// Write ROC / lift curves for a model on labeled data
    Eval(EvalArgs),
    /// Print a chain as a pyramid, lowest risk first
    Inspect(InspectArgs),
    /// Generate a seeded synthetic dataset
    Synth(SynthArgs),
    /// Train a fixed-alpha baseline tree
    Tree(TreeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Input CSV with a header row
    #[arg(long)]
    pub data: PathBuf,
    /// Label column name
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Cell text treated as missing (empty cells always are)
    #[arg(long, default_value = "NA")]
    pub missing_token: String,
    /// Raw label value mapped to the positive class (default: the rarer value)
    #[arg(long)]
    pub positive_label: Option<String>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Velocity: target slope of the alpha-zooming factor
    #[arg(long)]
    pub nu: f64,
    #[arg(long, default_value_t = 4)]
    pub max_stages: usize,
    /// Smallest carve as a fraction of the training rows
    #[arg(long, default_value_t = 0.01)]
    pub min_carve_fraction: f64,
    /// Smallest carve in rows
    #[arg(long, default_value_t = 5)]
    pub min_carve_count: u64,
    /// Upper bound on thresholds tried per numeric feature
    #[arg(long, default_value_t = 256)]
    pub max_thresholds: usize,
    /// Model output path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "NA")]
    pub missing_token: String,
    /// Scores CSV output path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Label column (default: the one the model was trained with)
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, default_value = "NA")]
    pub missing_token: String,
    /// Positive label value (default: the one the model was trained with)
    #[arg(long)]
    pub positive_label: Option<String>,
    /// ROC curve CSV output
    #[arg(long)]
    pub roc: Option<PathBuf>,
    /// Lift chart CSV output
    #[arg(long)]
    pub lift: Option<PathBuf>,
    /// SVG rendering of the ROC curve
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Population bins of the lift chart
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10000)]
    pub rows: usize,
    #[arg(long, default_value_t = 10)]
    pub informative: usize,
    #[arg(long, default_value_t = 10)]
    pub noise: usize,
    #[arg(long, default_value_t = 0.05)]
    pub positive_rate: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// CSV output path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TreeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fixed alpha; 1 selects the information-gain limit
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: u64,
    #[arg(long, default_value_t = 256)]
    pub max_thresholds: usize,
    /// Model output path
    #[arg(long)]
    pub out: PathBuf,
}
