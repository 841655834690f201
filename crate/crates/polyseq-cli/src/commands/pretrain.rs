//! `polyseq pretrain`: build the vocabulary, encode the corpus, and run
//! MLM pretraining with per-epoch checkpoints.

use polyseq_tensor::io::atomic_write;
use polyseq_tokenizer::assemble_sequence;
use polyseq_train::{pretrain, write_step_log};

use crate::cli::TrainArgs;
use crate::commands::{
    check_lengths, encode_all, load_records, load_schema, resolve_vocab, tokenize_all,
};
use crate::config::RunConfig;
use crate::error::CliError;

pub fn run(args: TrainArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_path(&args.config)?;
    check_lengths(&cfg)?;
    let schema = load_schema(&cfg.data.schema)?;
    let seq_schema = schema.sequence_schema();
    let data = load_records(&cfg.data.csv, &schema, cfg.data.skip_bad_rows)?;

    let flats: Vec<String> = data
        .records
        .iter()
        .map(|r| assemble_sequence(r, &seq_schema).map_err(CliError::input))
        .collect::<Result<_, _>>()?;
    let token_lists = tokenize_all(&flats, &seq_schema)?;
    let vocab = resolve_vocab(&cfg, &token_lists, &seq_schema)?;

    let mut model_cfg = cfg.model.clone();
    if model_cfg.vocab_size == 0 {
        model_cfg.vocab_size = vocab.len();
    } else if model_cfg.vocab_size != vocab.len() {
        return Err(CliError::config(format!(
            "config key 'model.vocab_size' ({}) != vocabulary size ({})",
            model_cfg.vocab_size,
            vocab.len()
        )));
    }
    model_cfg.validate().map_err(CliError::config)?;

    let out_dir = &cfg.run.out_dir;
    std::fs::create_dir_all(out_dir).map_err(CliError::input)?;
    atomic_write(&out_dir.join("vocab.txt"), vocab.to_text().as_bytes())
        .map_err(CliError::input)?;

    let mut pre_cfg = cfg.pretrain_config()?;
    pre_cfg.ckpt_dir = Some(out_dir.join("pretrain"));

    let encoded = encode_all(&token_lists, &vocab, cfg.tokenizer.max_length);
    let (_, outcome) = pretrain::<f32>(&encoded, &vocab, model_cfg, &pre_cfg)?;

    write_step_log(&out_dir.join("pretrain.log"), &outcome.steps)?;
    println!(
        "pretrain '{}': {} sequences, {} steps, best epoch {} (val loss {:.4}, val masked acc {:.3})",
        cfg.run.run_id,
        encoded.len(),
        outcome.steps.len(),
        outcome.best_epoch,
        outcome.best_val_loss,
        outcome.epoch_val_accuracy[outcome.best_epoch],
    );
    println!(
        "checkpoints in {}, vocabulary at {}",
        out_dir.join("pretrain").display(),
        out_dir.join("vocab.txt").display()
    );
    Ok(())
}
