//! Command implementations plus shared data-pipeline glue.

pub mod augment;
pub mod eval;
pub mod export;
pub mod finetune;
pub mod pretrain;
pub mod tokenize;

use std::path::Path;

use polyseq_data::{load_dataset, DatasetSchema};
use polyseq_model::ModelConfig;
use polyseq_tensor::{read_checkpoint, Checkpoint};
use polyseq_tokenizer::{
    assemble_sequence, build_vocab, encode, SequenceSchema, TokenSequence, Vocabulary,
};

use crate::config::RunConfig;
use crate::error::CliError;

pub(crate) fn load_schema(path: &Path) -> Result<DatasetSchema, CliError> {
    DatasetSchema::from_path(path).map_err(CliError::from)
}

pub(crate) fn load_records(
    csv: &Path,
    schema: &DatasetSchema,
    skip_bad_rows: bool,
) -> Result<polyseq_data::load::LoadedDataset, CliError> {
    let (data, errors) = load_dataset(csv, schema, skip_bad_rows)?;
    if !errors.is_empty() {
        eprintln!("warning: skipped {} bad row(s)", errors.len());
    }
    if data.records.is_empty() {
        return Err(CliError::input(format!(
            "{}: no usable records",
            csv.display()
        )));
    }
    Ok(data)
}

/// Assembled sequences from a file that is either a dataset CSV (by
/// extension) or plain text with one sequence per line.
pub(crate) fn input_sequences(
    path: &Path,
    schema: &DatasetSchema,
) -> Result<Vec<String>, CliError> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        let data = load_records(path, schema, false)?;
        let seq_schema = schema.sequence_schema();
        data.records
            .iter()
            .map(|r| assemble_sequence(r, &seq_schema).map_err(CliError::input))
            .collect()
    } else {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Ok(text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_string)
            .collect())
    }
}

pub(crate) fn tokenize_all(
    flats: &[String],
    seq_schema: &SequenceSchema,
) -> Result<Vec<Vec<String>>, CliError> {
    flats
        .iter()
        .map(|flat| {
            polyseq_tokenizer::tokenize(flat, seq_schema)
                .map_err(|e| CliError::input(format!("'{flat}': {e}")))
        })
        .collect()
}

/// Use the configured vocabulary file when given, otherwise build one from
/// the corpus (with the schema's NAN tokens always present).
pub(crate) fn resolve_vocab(
    cfg: &RunConfig,
    token_lists: &[Vec<String>],
    seq_schema: &SequenceSchema,
) -> Result<Vocabulary, CliError> {
    match &cfg.tokenizer.vocab_file {
        Some(path) => Vocabulary::load(path)
            .map_err(|e| CliError::config(format!("tokenizer.vocab_file: {e}"))),
        None => Ok(build_vocab(
            token_lists,
            &seq_schema.nan_tokens(),
            cfg.tokenizer.min_count,
        )),
    }
}

pub(crate) fn encode_all(
    token_lists: &[Vec<String>],
    vocab: &Vocabulary,
    max_length: usize,
) -> Vec<TokenSequence> {
    token_lists
        .iter()
        .map(|tokens| encode(tokens, vocab, max_length))
        .collect()
}

/// Read a checkpoint and its embedded model configuration. A missing or
/// malformed checkpoint is a configuration error (exit 3).
pub(crate) fn load_checkpoint(path: &Path) -> Result<(Checkpoint<f32>, ModelConfig), CliError> {
    if !path.exists() {
        return Err(CliError::config(format!(
            "checkpoint '{}' does not exist",
            path.display()
        )));
    }
    let ckpt = read_checkpoint::<f32>(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let model_cfg = ModelConfig::from_meta(&ckpt.meta)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Ok((ckpt, model_cfg))
}

/// Model/tokenizer length compatibility shared by train-like commands.
pub(crate) fn check_lengths(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.tokenizer.max_length > cfg.model.max_length {
        return Err(CliError::config(format!(
            "config key 'tokenizer.max_length' ({}) exceeds 'model.max_length' ({})",
            cfg.tokenizer.max_length, cfg.model.max_length
        )));
    }
    Ok(())
}
