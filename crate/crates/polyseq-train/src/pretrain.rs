//! MLM pretraining: 80/20 train/validation split, AdamW with linear warmup,
//! per-epoch validation with dropout off, and best-checkpoint selection by
//! validation loss.

use std::path::PathBuf;

use polyseq_model::{Heads, Mode, Model, ModelConfig};
use polyseq_tensor::rng::stream_key;
use polyseq_tensor::{write_checkpoint, Scalar, SplitMix64};
use polyseq_tokenizer::{TokenSequence, Vocabulary};

use crate::error::TrainError;
use crate::logging::StepRecord;
use crate::masking::{apply_masking, MaskingPolicy};
use crate::schedule::{lr_at, ScheduleConfig, ScheduleKind};
use crate::{flatten_batch, loss::mlm_loss};

const SPLIT_SALT: u64 = 0x5EED_5711;
const MASK_SALT: u64 = 0x003A_5C01;
const VAL_MASK_SALT: u64 = 0x7A11_DA7A;

#[derive(Debug, Clone)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub peak_lr: f64,
    pub weight_decay: f64,
    pub warmup_ratio: f64,
    pub schedule: ScheduleKind,
    pub seed: u64,
    pub val_fraction: f64,
    pub masking: MaskingPolicy,
    /// Re-draw masked positions every epoch (dynamic) or once (static).
    pub dynamic_masking: bool,
    pub max_steps: Option<u64>,
    pub ckpt_dir: Option<PathBuf>,
}

impl PretrainConfig {
    /// Full-scale defaults: 30 epochs, batch 200, AdamW peak 5e-5 with
    /// zero weight decay, linear warmup ratio 0.05 then linear decay.
    pub fn new(seed: u64) -> Self {
        PretrainConfig {
            epochs: 30,
            batch_size: 200,
            peak_lr: 5e-5,
            weight_decay: 0.0,
            warmup_ratio: 0.05,
            schedule: ScheduleKind::LinearWarmupLinearDecay,
            seed,
            val_fraction: 0.2,
            masking: MaskingPolicy::with_seed(seed),
            dynamic_masking: true,
            max_steps: None,
            ckpt_dir: None,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(TrainError::Config(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.val_fraction) || self.val_fraction == 0.0 {
            return Err(TrainError::Config(format!(
                "val_fraction must be in (0, 1), got {}",
                self.val_fraction
            )));
        }
        self.masking.validate().map_err(TrainError::Config)
    }
}

#[derive(Debug)]
pub struct PretrainOutcome {
    pub steps: Vec<StepRecord>,
    pub epoch_val_loss: Vec<f64>,
    pub epoch_val_accuracy: Vec<f64>,
    pub epoch_train_accuracy: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Pretrain an MLM encoder over `sequences`. Returns the model with the
/// best-validation-epoch weights restored, plus the run history. When
/// `ckpt_dir` is set, per-epoch checkpoints and `best.ckpt` are written.
pub fn pretrain<S: Scalar>(
    sequences: &[TokenSequence],
    vocab: &Vocabulary,
    model_cfg: ModelConfig,
    cfg: &PretrainConfig,
) -> Result<(Model<S>, PretrainOutcome), TrainError> {
    cfg.validate()?;
    if sequences.len() < 2 {
        return Err(TrainError::Config(
            "pretraining needs at least 2 sequences for an 80/20 split".into(),
        ));
    }
    if model_cfg.vocab_size != vocab.len() {
        return Err(TrainError::Config(format!(
            "model vocab_size {} != vocabulary size {}",
            model_cfg.vocab_size,
            vocab.len()
        )));
    }

    // deterministic 80/20 split
    let mut order: Vec<usize> = (0..sequences.len()).collect();
    let mut split_rng = SplitMix64::new(stream_key(cfg.seed, SPLIT_SALT, 0));
    split_rng.shuffle(&mut order);
    let val_count = ((sequences.len() as f64 * cfg.val_fraction).round() as usize)
        .clamp(1, sequences.len() - 1);
    let val_idx: Vec<usize> = order[..val_count].to_vec();
    let train_idx: Vec<usize> = order[val_count..].to_vec();

    let model: Model<S> = Model::new(model_cfg, Heads::mlm_only(), cfg.seed)?;
    let mut opt = polyseq_tensor::AdamW::uniform(&model.params, cfg.peak_lr, cfg.weight_decay);

    let steps_per_epoch = train_idx.len().div_ceil(cfg.batch_size) as u64;
    let planned = (cfg.epochs as u64) * steps_per_epoch;
    let total_steps = cfg.max_steps.map_or(planned, |m| m.min(planned)).max(1);
    let schedule = ScheduleConfig {
        kind: cfg.schedule,
        warmup_ratio: cfg.warmup_ratio,
        total_steps,
    };

    let mut outcome = PretrainOutcome {
        steps: Vec::new(),
        epoch_val_loss: Vec::new(),
        epoch_val_accuracy: Vec::new(),
        epoch_train_accuracy: Vec::new(),
        best_epoch: 0,
        best_val_loss: f64::INFINITY,
    };
    let mut best_params = model.params.snapshot();
    let mut step: u64 = 0;

    'epochs: for epoch in 0..cfg.epochs {
        let mut epoch_order = train_idx.clone();
        let mut shuffle_rng = SplitMix64::new(stream_key(cfg.seed, 0xE90C, epoch as u64));
        shuffle_rng.shuffle(&mut epoch_order);

        for chunk in epoch_order.chunks(cfg.batch_size) {
            if step >= total_steps {
                break 'epochs;
            }
            let mask_epoch = if cfg.dynamic_masking {
                epoch as u64 + 1
            } else {
                0
            };
            let (ids, pad_mask, labels) =
                masked_batch(sequences, chunk, &cfg.masking, vocab, MASK_SALT, mask_epoch);

            let lr_factor = lr_at(step, &schedule, 1.0);
            let mode = Mode::Train {
                seed: cfg.seed,
                step,
            };
            let (hidden, _) = model.encoder_forward(&ids, &pad_mask, chunk.len(), mode)?;
            let logits = model.mlm_logits(&hidden)?;
            let loss = match mlm_loss(&logits, &labels) {
                Ok(l) => l,
                Err(TrainError::DegenerateBatch) => continue,
                Err(e) => return Err(e),
            };
            let loss_value = loss.item_f64();
            if !loss_value.is_finite() {
                return Err(TrainError::NonFinite {
                    loss: loss_value,
                    step,
                    context: format!("pretraining epoch {epoch}"),
                });
            }
            model.params.zero_grad();
            loss.backward()?;
            opt.step(&model.params, lr_factor)?;
            outcome.steps.push(StepRecord {
                step,
                lr: cfg.peak_lr * lr_factor,
                loss: loss_value,
            });
            step += 1;
        }

        let (val_loss, val_acc) = evaluate_masked(&model, sequences, &val_idx, cfg, vocab)?;
        let (_, train_acc) = evaluate_masked(&model, sequences, &train_idx, cfg, vocab)?;
        outcome.epoch_val_loss.push(val_loss);
        outcome.epoch_val_accuracy.push(val_acc);
        outcome.epoch_train_accuracy.push(train_acc);

        if let Some(dir) = &cfg.ckpt_dir {
            let mut meta = model.cfg.to_meta();
            meta.push(("epoch".into(), epoch.to_string()));
            meta.push(("val_loss".into(), val_loss.to_string()));
            write_checkpoint(
                &dir.join(format!("epoch_{epoch}.ckpt")),
                &meta,
                &model.params,
                Some(&opt),
            )?;
        }
        if val_loss < outcome.best_val_loss {
            outcome.best_val_loss = val_loss;
            outcome.best_epoch = epoch;
            best_params = model.params.snapshot();
        }
        if step >= total_steps {
            break;
        }
    }

    // restore the best-validation weights
    model.params.load_matching(&best_params);
    if let Some(dir) = &cfg.ckpt_dir {
        let mut meta = model.cfg.to_meta();
        meta.push(("epoch".into(), outcome.best_epoch.to_string()));
        meta.push(("val_loss".into(), outcome.best_val_loss.to_string()));
        write_checkpoint(&dir.join("best.ckpt"), &meta, &model.params, None)?;
    }
    Ok((model, outcome))
}

/// Flatten one batch with fresh masking per item.
fn masked_batch(
    sequences: &[TokenSequence],
    items: &[usize],
    policy: &MaskingPolicy,
    vocab: &Vocabulary,
    salt: u64,
    epoch_key: u64,
) -> (Vec<u32>, Vec<u8>, Vec<i64>) {
    let seqs: Vec<&TokenSequence> = items.iter().map(|&i| &sequences[i]).collect();
    let (_, pad_mask) = flatten_batch(&seqs);
    let mut ids = Vec::with_capacity(pad_mask.len());
    let mut labels = Vec::with_capacity(pad_mask.len());
    for &i in items {
        let mut rng = SplitMix64::new(stream_key(policy.seed ^ salt, i as u64, epoch_key));
        let masked = apply_masking(&sequences[i], policy, vocab, &mut rng);
        ids.extend_from_slice(&masked.input_ids);
        labels.extend_from_slice(&masked.labels);
    }
    (ids, pad_mask, labels)
}

/// Mean loss and masked-token accuracy with dropout off and a fixed
/// validation masking (same positions every epoch).
fn evaluate_masked<S: Scalar>(
    model: &Model<S>,
    sequences: &[TokenSequence],
    items: &[usize],
    cfg: &PretrainConfig,
    vocab: &Vocabulary,
) -> Result<(f64, f64), TrainError> {
    let mut total_loss = 0.0f64;
    let mut total_correct = 0usize;
    let mut total_selected = 0usize;
    // with static masking the measurement mask IS the training mask;
    // dynamic training gets its own fixed evaluation mask
    let salt = if cfg.dynamic_masking {
        VAL_MASK_SALT
    } else {
        MASK_SALT
    };
    for chunk in items.chunks(cfg.batch_size) {
        let (ids, pad_mask, labels) = masked_batch(sequences, chunk, &cfg.masking, vocab, salt, 0);
        let selected = labels
            .iter()
            .filter(|&&l| l != polyseq_tensor::IGNORE_INDEX)
            .count();
        if selected == 0 {
            continue;
        }
        let (hidden, _) = model.encoder_forward(&ids, &pad_mask, chunk.len(), Mode::Eval)?;
        let logits = model.mlm_logits(&hidden)?;
        let loss = mlm_loss(&logits, &labels)?;
        total_loss += loss.item_f64() * selected as f64;

        let vocab_size = model.cfg.vocab_size;
        let data = logits.data();
        for (row, &label) in data.data().chunks(vocab_size).zip(&labels) {
            if label == polyseq_tensor::IGNORE_INDEX {
                continue;
            }
            let mut arg = 0usize;
            for (j, &v) in row.iter().enumerate() {
                if v > row[arg] {
                    arg = j;
                }
            }
            if arg as i64 == label {
                total_correct += 1;
            }
        }
        total_selected += selected;
    }
    if total_selected == 0 {
        return Err(TrainError::DegenerateBatch);
    }
    Ok((
        total_loss / total_selected as f64,
        total_correct as f64 / total_selected as f64,
    ))
}
