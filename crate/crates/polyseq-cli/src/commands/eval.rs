//! `polyseq eval`: run a finetuned checkpoint over the configured test
//! splits and write per-fold plus mean metrics.

use polyseq_data::make_splits;
use polyseq_model::{Heads, Model};
use polyseq_tokenizer::Vocabulary;
use polyseq_train::{evaluate, finetune::predict, Metrics, MetricsRow};

use crate::cli::EvalArgs;
use crate::commands::finetune::{fmt_r2, fold_pairs, mean_metrics};
use crate::commands::{load_checkpoint, load_records, load_schema};
use crate::config::RunConfig;
use crate::error::CliError;

pub fn run(args: EvalArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_path(&args.config)?;
    let (ckpt, model_cfg) = load_checkpoint(&args.ckpt)?;
    let vocab_path = cfg.tokenizer.vocab_file.as_ref().ok_or_else(|| {
        CliError::config("config key 'tokenizer.vocab_file' is required for eval")
    })?;
    let vocab = Vocabulary::load(vocab_path)
        .map_err(|e| CliError::config(format!("tokenizer.vocab_file: {e}")))?;
    if vocab.len() != model_cfg.vocab_size {
        return Err(CliError::config(format!(
            "vocabulary size {} does not match checkpoint vocab_size {}",
            vocab.len(),
            model_cfg.vocab_size
        )));
    }
    if cfg.tokenizer.max_length > model_cfg.max_length {
        return Err(CliError::config(format!(
            "config key 'tokenizer.max_length' ({}) exceeds the checkpoint's max_length ({})",
            cfg.tokenizer.max_length, model_cfg.max_length
        )));
    }

    let schema = load_schema(&cfg.data.schema)?;
    let seq_schema = schema.sequence_schema();
    let data = load_records(&cfg.data.csv, &schema, cfg.data.skip_bad_rows)?;
    for (i, r) in data.records.iter().enumerate() {
        if r.label.is_none() {
            return Err(CliError::input(format!(
                "record {i} has no label; eval needs a labeled dataset"
            )));
        }
    }
    let plan = cfg.split_plan()?;
    let folds = make_splits(data.records.len(), data.split_values.as_deref(), &plan)?;

    let model: Model<f32> = Model::new(model_cfg.clone(), Heads::regressor_only(), cfg.run.seed)?;
    let loaded = model.params.load_matching(&ckpt.params);
    if loaded.len() < model.params.len() {
        eprintln!(
            "warning: checkpoint provided {}/{} parameters; the rest keep fresh initialization",
            loaded.len(),
            model.params.len()
        );
    }

    let mut rows = Vec::new();
    let mut fold_metrics: Vec<Metrics> = Vec::new();
    for fold in &folds {
        let (_, test_pairs) = fold_pairs(
            &data.records,
            fold,
            &schema,
            &seq_schema,
            &vocab,
            cfg.tokenizer.max_length,
            false,
            cfg.run.seed,
        )?;
        let preds = predict(&model, &test_pairs, 64)?;
        let labels: Vec<f64> = test_pairs.iter().map(|(_, y)| *y).collect();
        let metrics = evaluate(&preds, &labels)?;
        if metrics.r2.is_none() {
            eprintln!(
                "warning: fold {} labels are constant; R^2 is undefined",
                fold.fold
            );
        }
        println!(
            "fold {}: {} test records, rmse {:.4}, r2 {}",
            fold.fold,
            test_pairs.len(),
            metrics.rmse,
            fmt_r2(metrics.r2)
        );
        rows.push(MetricsRow {
            run_id: cfg.run.run_id.clone(),
            dataset: schema.name.clone(),
            fold: fold.fold.to_string(),
            epoch: "eval".into(),
            split: "test".into(),
            rmse: metrics.rmse,
            r2: metrics.r2,
        });
        fold_metrics.push(metrics);
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
        epoch: "eval".into(),
        split: "test".into(),
        rmse: mean.rmse,
        r2: mean.r2,
    });
    let out = cfg.run.out_dir.join("eval_metrics.csv");
    std::fs::create_dir_all(&cfg.run.out_dir).map_err(CliError::input)?;
    polyseq_train::write_metrics_csv(&out, &rows)?;
    println!("metrics written to {}", out.display());
    Ok(())
}
