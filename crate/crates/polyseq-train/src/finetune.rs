//! Regression finetuning: AdamW with weight decay 0.01, layer-wise
//! learning-rate decay groups, warmup plus cosine annealing, 20 epochs,
//! best-epoch selection by eval RMSE. Freeze-encoder mode trains the
//! regressor head only and leaves every encoder parameter untouched.

use std::collections::BTreeMap;

use polyseq_model::{Heads, Mode, Model, ModelConfig};
use polyseq_tensor::rng::stream_key;
use polyseq_tensor::{NdArray, ParamGroup, Scalar, SplitMix64};
use polyseq_tokenizer::TokenSequence;

use crate::error::TrainError;
use crate::flatten_batch;
use crate::llrd::{build_llrd_groups, LlrdConfig};
use crate::logging::StepRecord;
use crate::loss::regression_loss;
use crate::metrics::{evaluate, Metrics};
use crate::schedule::{lr_at, ScheduleConfig, ScheduleKind};

#[derive(Debug, Clone)]
pub struct FinetuneConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub warmup_ratio: f64,
    pub schedule: ScheduleKind,
    pub llrd: LlrdConfig,
    pub seed: u64,
    pub freeze_encoder: bool,
}

impl FinetuneConfig {
    /// Downstream defaults: 20 epochs, AdamW weight decay 0.01, warmup
    /// ratio 0.1 with cosine annealing, top-layer decay factor 0.9.
    pub fn new(seed: u64) -> Self {
        FinetuneConfig {
            epochs: 20,
            batch_size: 32,
            weight_decay: 0.01,
            warmup_ratio: 0.1,
            schedule: ScheduleKind::LinearWarmupCosine,
            llrd: LlrdConfig {
                head_lr: 1e-4,
                top_layer_lr: 1e-4,
                decay_factor: 0.9,
            },
            seed,
            freeze_encoder: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub eval: Metrics,
}

#[derive(Debug)]
pub struct FinetuneOutcome {
    pub steps: Vec<StepRecord>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best: Metrics,
}

/// Train a regressor on `(sequence, label)` pairs and report best-epoch
/// metrics on the eval set. `init` carries pretrained weights (matching
/// names are loaded; the fresh regressor head stays fresh).
pub fn finetune<S: Scalar>(
    train: &[(TokenSequence, f64)],
    eval: &[(TokenSequence, f64)],
    init: Option<&BTreeMap<String, NdArray<S>>>,
    model_cfg: ModelConfig,
    cfg: &FinetuneConfig,
) -> Result<(Model<S>, FinetuneOutcome), TrainError> {
    if train.is_empty() || eval.is_empty() {
        return Err(TrainError::Config("empty train or eval split".into()));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(TrainError::Config(
            "epochs and batch_size must be positive".into(),
        ));
    }

    let model: Model<S> = Model::new(model_cfg, Heads::regressor_only(), cfg.seed)?;
    if let Some(values) = init {
        model_load(&model, values);
    }

    let groups: Vec<ParamGroup> = if cfg.freeze_encoder {
        model.set_encoder_trainable(false);
        let head: Vec<String> = model
            .params
            .names()
            .into_iter()
            .filter(|n| n.starts_with("reg."))
            .collect();
        vec![ParamGroup {
            label: "head".to_string(),
            params: head,
            lr: cfg.llrd.head_lr,
            weight_decay: cfg.weight_decay,
        }]
    } else {
        build_llrd_groups(
            &model.params,
            &cfg.llrd,
            model.cfg.n_layers,
            cfg.weight_decay,
        )?
    };
    let mut opt = polyseq_tensor::AdamW::new(groups);

    let steps_per_epoch = train.len().div_ceil(cfg.batch_size) as u64;
    let schedule = ScheduleConfig {
        kind: cfg.schedule,
        warmup_ratio: cfg.warmup_ratio,
        total_steps: (cfg.epochs as u64 * steps_per_epoch).max(1),
    };

    let mut outcome = FinetuneOutcome {
        steps: Vec::new(),
        history: Vec::new(),
        best_epoch: 0,
        best: Metrics {
            rmse: f64::INFINITY,
            r2: None,
        },
    };
    let mut best_params = model.params.snapshot();
    let mut step: u64 = 0;

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut rng = SplitMix64::new(stream_key(cfg.seed, 0xF17E, epoch as u64));
        rng.shuffle(&mut order);

        let mut epoch_loss = 0.0f64;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let seqs: Vec<&TokenSequence> = chunk.iter().map(|&i| &train[i].0).collect();
            let labels: Vec<f64> = chunk.iter().map(|&i| train[i].1).collect();
            let (ids, pad_mask) = flatten_batch(&seqs);
            let mode = Mode::Train {
                seed: cfg.seed,
                step,
            };
            let (hidden, _) = model.encoder_forward(&ids, &pad_mask, chunk.len(), mode)?;
            let preds = model.regression(&hidden, mode)?;
            let loss = regression_loss(&preds, &labels)?;
            let loss_value = loss.item_f64();
            if !loss_value.is_finite() {
                return Err(TrainError::NonFinite {
                    loss: loss_value,
                    step,
                    context: format!("finetuning epoch {epoch}"),
                });
            }
            model.params.zero_grad();
            loss.backward()?;
            let lr_factor = lr_at(step, &schedule, 1.0);
            opt.step(&model.params, lr_factor)?;
            outcome.steps.push(StepRecord {
                step,
                lr: cfg.llrd.top_layer_lr * lr_factor,
                loss: loss_value,
            });
            step += 1;
            epoch_loss += loss_value;
            batches += 1;
        }

        let metrics = predict_metrics(&model, eval)?;
        outcome.history.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / batches.max(1) as f64,
            eval: metrics,
        });
        if metrics.rmse < outcome.best.rmse {
            outcome.best = metrics;
            outcome.best_epoch = epoch;
            best_params = model.params.snapshot();
        }
    }

    model.params.load_matching(&best_params);
    Ok((model, outcome))
}

/// Predictions over a labeled set with dropout off.
pub fn predict<S: Scalar>(
    model: &Model<S>,
    data: &[(TokenSequence, f64)],
    batch_size: usize,
) -> Result<Vec<f64>, TrainError> {
    let mut preds = Vec::with_capacity(data.len());
    for chunk in data.chunks(batch_size.max(1)) {
        let seqs: Vec<&TokenSequence> = chunk.iter().map(|(s, _)| s).collect();
        let (ids, pad_mask) = flatten_batch(&seqs);
        let (hidden, _) = model.encoder_forward(&ids, &pad_mask, chunk.len(), Mode::Eval)?;
        let out = model.regression(&hidden, Mode::Eval)?;
        preds.extend(out.data().data().iter().map(|v| v.to_f64()));
    }
    Ok(preds)
}

fn predict_metrics<S: Scalar>(
    model: &Model<S>,
    eval: &[(TokenSequence, f64)],
) -> Result<Metrics, TrainError> {
    let preds = predict(model, eval, 64)?;
    let labels: Vec<f64> = eval.iter().map(|(_, y)| *y).collect();
    evaluate(&preds, &labels)
}

fn model_load<S: Scalar>(model: &Model<S>, values: &BTreeMap<String, NdArray<S>>) {
    // only encoder/embedding weights transfer; the head stays fresh
    let encoder_only: BTreeMap<String, NdArray<S>> = values
        .iter()
        .filter(|(k, _)| !k.starts_with("reg.") && !k.starts_with("mlm."))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    model.params.load_matching(&encoder_only);
}
