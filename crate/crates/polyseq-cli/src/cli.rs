//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "polyseq",
    about = "Polymer-sequence pipeline: chemically-aware tokenization, MLM \
             pretraining, regression finetuning, attention/embedding exports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print tokens (and ids with --vocab) for sequences or CSV rows
    Tokenize(TokenizeArgs),
    /// Expand a training CSV by SMILES enumeration
    Augment(AugmentArgs),
    /// Masked-language-model pretraining
    Pretrain(TrainArgs),
    /// Regression finetuning (k-fold or holdout per config)
    Finetune(FinetuneArgs),
    /// Evaluate a checkpoint on the configured dataset splits
    Eval(EvalArgs),
    /// Export per-layer/head attention matrices for one sequence
    ExportAttention(ExportAttentionArgs),
    /// Export max-pooled last-layer embeddings, one row per sequence
    ExportEmbeddings(ExportEmbeddingsArgs),
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    /// Dataset schema TOML
    #[arg(long)]
    pub schema: PathBuf,
    /// Input: assembled sequences (one per line) or a dataset .csv
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Vocabulary file; when given, ids are printed as token:id
    #[arg(long)]
    pub vocab: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub schema: PathBuf,
    /// Training-side dataset CSV (augment after splitting, never on test
    /// rows)
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run configuration TOML
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct FinetuneArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Train the regressor head only, leaving the encoder untouched
    #[arg(long)]
    pub freeze_encoder: bool,
    /// Initialize the encoder from a pretraining checkpoint (overrides the
    /// config's init_checkpoint)
    #[arg(long)]
    pub init_ckpt: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportAttentionArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// The assembled sequence to analyze
    #[arg(long)]
    pub seq: String,
    /// Comma-separated layer indices (default: all layers)
    #[arg(long)]
    pub layers: Option<String>,
    /// Output CSV; the `<s>` rows go to `<out>.cls.csv`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportEmbeddingsArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Input: assembled sequences (one per line) or a dataset .csv
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
