//! `polyseq finetune`: k-fold or hold-out regression finetuning with
//! optional pretrained initialization, per-fold checkpoints, and a metrics
//! CSV with one row per fold plus the mean.

use std::path::PathBuf;

use polyseq_data::{augment_train, make_splits, DatasetSchema};
use polyseq_tensor::write_checkpoint;
use polyseq_tokenizer::{
    assemble_sequence, encode, tokenize, PolymerRecord, SequenceSchema, TokenSequence, Vocabulary,
};
use polyseq_train::{finetune, write_step_log, Metrics, MetricsRow};

use crate::cli::FinetuneArgs;
use crate::commands::{
    check_lengths, load_checkpoint, load_records, load_schema, resolve_vocab, tokenize_all,
};
use crate::config::RunConfig;
use crate::error::CliError;

pub fn run(args: FinetuneArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_path(&args.config)?;
    let section = cfg
        .finetune
        .as_ref()
        .ok_or_else(|| CliError::config("config section [finetune] is required"))?;
    let schema = load_schema(&cfg.data.schema)?;
    let seq_schema = schema.sequence_schema();
    let data = load_records(&cfg.data.csv, &schema, cfg.data.skip_bad_rows)?;
    for (i, r) in data.records.iter().enumerate() {
        if r.label.is_none() {
            return Err(CliError::input(format!(
                "record {i} has no label; finetuning needs a labeled dataset"
            )));
        }
    }

    let plan = cfg.split_plan()?;
    let folds = make_splits(data.records.len(), data.split_values.as_deref(), &plan)?;

    let init_path: Option<PathBuf> = args
        .init_ckpt
        .clone()
        .or_else(|| section.init_checkpoint.clone());
    let (init_params, model_cfg) = match &init_path {
        Some(path) => {
            if cfg.tokenizer.vocab_file.is_none() {
                return Err(CliError::config(
                    "config key 'tokenizer.vocab_file' is required when finetuning \
                     from a checkpoint (token ids must match the embedding matrix)",
                ));
            }
            let (ckpt, meta_cfg) = load_checkpoint(path)?;
            (Some(ckpt.params), meta_cfg)
        }
        None => (None, cfg.model.clone()),
    };

    let all_flats: Vec<String> = data
        .records
        .iter()
        .map(|r| assemble_sequence(r, &seq_schema).map_err(CliError::input))
        .collect::<Result<_, _>>()?;
    let all_tokens = tokenize_all(&all_flats, &seq_schema)?;
    let vocab = resolve_vocab(&cfg, &all_tokens, &seq_schema)?;

    let mut model_cfg = model_cfg;
    if model_cfg.vocab_size == 0 {
        model_cfg.vocab_size = vocab.len();
    } else if model_cfg.vocab_size != vocab.len() {
        return Err(CliError::config(format!(
            "vocabulary size {} does not match model vocab_size {}",
            vocab.len(),
            model_cfg.vocab_size
        )));
    }
    if cfg.tokenizer.max_length > model_cfg.max_length {
        return Err(CliError::config(format!(
            "config key 'tokenizer.max_length' ({}) exceeds the model's max_length ({})",
            cfg.tokenizer.max_length, model_cfg.max_length
        )));
    }
    check_lengths(&cfg)?;
    model_cfg.validate().map_err(CliError::config)?;

    let mut ft_cfg = cfg.finetune_config()?;
    ft_cfg.freeze_encoder |= args.freeze_encoder;

    let out_dir = &cfg.run.out_dir;
    let ckpt_dir = out_dir.join("finetune");
    std::fs::create_dir_all(&ckpt_dir).map_err(CliError::input)?;
    write_split_file(&out_dir.join("splits.csv"), &folds)?;

    let mut rows: Vec<MetricsRow> = Vec::new();
    let mut fold_metrics: Vec<Metrics> = Vec::new();
    for fold in &folds {
        let (train_pairs, test_pairs) = fold_pairs(
            &data.records,
            fold,
            &schema,
            &seq_schema,
            &vocab,
            cfg.tokenizer.max_length,
            section.augment,
            cfg.run.seed,
        )?;
        let (model, outcome) = finetune::<f32>(
            &train_pairs,
            &test_pairs,
            init_params.as_ref(),
            model_cfg.clone(),
            &ft_cfg,
        )?;

        let mut meta = model_cfg.to_meta();
        meta.push(("fold".into(), fold.fold.to_string()));
        meta.push(("best_epoch".into(), outcome.best_epoch.to_string()));
        write_checkpoint(
            &ckpt_dir.join(format!("fold{}.ckpt", fold.fold)),
            &meta,
            &model.params,
            None,
        )?;
        write_step_log(
            &ckpt_dir.join(format!("fold{}.log", fold.fold)),
            &outcome.steps,
        )?;

        println!(
            "fold {}: {} train (+aug) / {} test, best epoch {}, rmse {:.4}, r2 {}",
            fold.fold,
            train_pairs.len(),
            test_pairs.len(),
            outcome.best_epoch,
            outcome.best.rmse,
            fmt_r2(outcome.best.r2),
        );
        rows.push(MetricsRow {
            run_id: cfg.run.run_id.clone(),
            dataset: schema.name.clone(),
            fold: fold.fold.to_string(),
            epoch: outcome.best_epoch.to_string(),
            split: "test".into(),
            rmse: outcome.best.rmse,
            r2: outcome.best.r2,
        });
        fold_metrics.push(outcome.best);
    }

    let mean = mean_metrics(&fold_metrics);
    println!(
        "mean over {} fold(s): rmse {:.4}, r2 {}",
        fold_metrics.len(),
        mean.rmse,
        fmt_r2(mean.r2)
    );
    rows.push(MetricsRow {
        run_id: cfg.run.run_id.clone(),
        dataset: schema.name.clone(),
        fold: "mean".into(),
        epoch: "best".into(),
        split: "test".into(),
        rmse: mean.rmse,
        r2: mean.r2,
    });
    polyseq_train::write_metrics_csv(&out_dir.join("metrics.csv"), &rows)?;
    println!(
        "metrics written to {}",
        out_dir.join("metrics.csv").display()
    );
    Ok(())
}

/// Encoded `(sequence, label)` pairs for one split side.
pub(crate) type LabeledSet = Vec<(TokenSequence, f64)>;

/// Per-fold encoded `(sequence, label)` pairs; augmentation applies to the
/// training side only, strictly after the split.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fold_pairs(
    records: &[PolymerRecord],
    fold: &polyseq_data::FoldSplit,
    schema: &DatasetSchema,
    seq_schema: &SequenceSchema,
    vocab: &Vocabulary,
    max_length: usize,
    augment: bool,
    seed: u64,
) -> Result<(LabeledSet, LabeledSet), CliError> {
    let train_records: Vec<PolymerRecord> =
        fold.train.iter().map(|&i| records[i].clone()).collect();
    let train_records = if augment {
        let outcome = augment_train(&train_records, schema, seed);
        for warning in &outcome.warnings {
            eprintln!("warning: {warning}");
        }
        outcome.records
    } else {
        train_records
    };
    let encode_pairs = |rs: &[PolymerRecord]| -> Result<LabeledSet, CliError> {
        rs.iter()
            .map(|r| {
                let flat = assemble_sequence(r, seq_schema).map_err(CliError::input)?;
                let tokens = tokenize(&flat, seq_schema)
                    .map_err(|e| CliError::input(format!("'{flat}': {e}")))?;
                Ok((
                    encode(&tokens, vocab, max_length),
                    r.label.expect("validated"),
                ))
            })
            .collect()
    };
    let test_records: Vec<PolymerRecord> = fold.test.iter().map(|&i| records[i].clone()).collect();
    Ok((encode_pairs(&train_records)?, encode_pairs(&test_records)?))
}

pub(crate) fn mean_metrics(folds: &[Metrics]) -> Metrics {
    let n = folds.len().max(1) as f64;
    let rmse = folds.iter().map(|m| m.rmse).sum::<f64>() / n;
    let r2 = if folds.iter().all(|m| m.r2.is_some()) {
        Some(folds.iter().map(|m| m.r2.unwrap()).sum::<f64>() / n)
    } else {
        None
    };
    Metrics { rmse, r2 }
}

pub(crate) fn fmt_r2(r2: Option<f64>) -> String {
    match r2 {
        Some(v) => format!("{v:.4}"),
        None => "NaN (constant labels)".to_string(),
    }
}

/// Record the split: for k-fold, each record with the fold whose test side
/// holds it; for hold-out, a train/test designation per record.
fn write_split_file(
    path: &std::path::Path,
    folds: &[polyseq_data::FoldSplit],
) -> Result<(), CliError> {
    let mut assignment: Vec<(usize, String)> = if folds.len() == 1 {
        let fold = &folds[0];
        fold.train
            .iter()
            .map(|&i| (i, "train".to_string()))
            .chain(fold.test.iter().map(|&i| (i, "test".to_string())))
            .collect()
    } else {
        folds
            .iter()
            .flat_map(|f| f.test.iter().map(move |&i| (i, f.fold.to_string())))
            .collect()
    };
    assignment.sort_unstable();
    let mut text = String::from("record_id,fold\n");
    for (record, fold) in assignment {
        text.push_str(&format!("{record},{fold}\n"));
    }
    polyseq_tensor::io::atomic_write(path, text.as_bytes()).map_err(CliError::input)?;
    Ok(())
}
