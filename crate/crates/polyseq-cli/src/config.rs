//! Run configuration files: versioned TOML with sections for the run,
//! data, split plan, tokenizer, model, pretraining, and finetuning.
//! Unknown keys are rejected with the offending key named.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use polyseq_data::SplitPlan;
use polyseq_model::ModelConfig;
use polyseq_train::{FinetuneConfig, LlrdConfig, MaskingPolicy, PretrainConfig, ScheduleKind};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format: u32,
    pub run: RunSection,
    pub data: DataSection,
    #[serde(default)]
    pub split: Option<SplitSection>,
    pub tokenizer: TokenizerSection,
    pub model: ModelConfig,
    #[serde(default)]
    pub pretrain: Option<PretrainSection>,
    #[serde(default)]
    pub finetune: Option<FinetuneSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub run_id: String,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub csv: PathBuf,
    pub schema: PathBuf,
    #[serde(default)]
    pub skip_bad_rows: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub kind: String,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub train_values: Option<Vec<String>>,
    #[serde(default)]
    pub test_values: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizerSection {
    pub max_length: usize,
    #[serde(default = "default_min_count")]
    pub min_count: usize,
    /// Reuse an existing vocabulary (required when finetuning from a
    /// pretrained checkpoint so ids line up with the embedding matrix).
    #[serde(default)]
    pub vocab_file: Option<PathBuf>,
}

fn default_min_count() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PretrainSection {
    #[serde(default = "default_pretrain_epochs")]
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default = "default_peak_lr")]
    pub peak_lr: f64,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default = "default_pretrain_warmup")]
    pub warmup_ratio: f64,
    #[serde(default = "default_pretrain_schedule")]
    pub schedule: ScheduleKind,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    #[serde(default = "default_true")]
    pub dynamic_masking: bool,
    /// 0 = no cap.
    #[serde(default)]
    pub max_steps: u64,
    #[serde(default)]
    pub masking: Option<MaskingSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskingSection {
    #[serde(default = "default_select_prob")]
    pub select_prob: f64,
    #[serde(default = "default_mask_frac")]
    pub mask_frac: f64,
    #[serde(default = "default_small_frac")]
    pub random_frac: f64,
    #[serde(default = "default_small_frac")]
    pub keep_frac: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinetuneSection {
    #[serde(default = "default_finetune_epochs")]
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(default = "default_weight_decay")]
    pub weight_decay: f64,
    #[serde(default = "default_finetune_warmup")]
    pub warmup_ratio: f64,
    #[serde(default = "default_finetune_schedule")]
    pub schedule: ScheduleKind,
    pub head_lr: f64,
    pub top_layer_lr: f64,
    #[serde(default = "default_decay_factor")]
    pub decay_factor: f64,
    #[serde(default = "default_true")]
    pub augment: bool,
    #[serde(default)]
    pub freeze_encoder: bool,
    #[serde(default)]
    pub init_checkpoint: Option<PathBuf>,
}

fn default_pretrain_epochs() -> usize {
    30
}
fn default_peak_lr() -> f64 {
    5e-5
}
fn default_pretrain_warmup() -> f64 {
    0.05
}
fn default_pretrain_schedule() -> ScheduleKind {
    ScheduleKind::LinearWarmupLinearDecay
}
fn default_val_fraction() -> f64 {
    0.2
}
fn default_true() -> bool {
    true
}
fn default_select_prob() -> f64 {
    0.15
}
fn default_mask_frac() -> f64 {
    0.8
}
fn default_small_frac() -> f64 {
    0.1
}
fn default_finetune_epochs() -> usize {
    20
}
fn default_weight_decay() -> f64 {
    0.01
}
fn default_finetune_warmup() -> f64 {
    0.1
}
fn default_finetune_schedule() -> ScheduleKind {
    ScheduleKind::LinearWarmupCosine
}
fn default_decay_factor() -> f64 {
    0.9
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if cfg.format != 1 {
            return Err(CliError::config(format!(
                "config key 'format': unsupported version {}, expected 1",
                cfg.format
            )));
        }
        if cfg.tokenizer.max_length < 2 {
            return Err(CliError::config(
                "config key 'tokenizer.max_length': must be at least 2",
            ));
        }
        Ok(cfg)
    }

    pub fn split_plan(&self) -> Result<SplitPlan, CliError> {
        let section = self
            .split
            .as_ref()
            .ok_or_else(|| CliError::config("config section [split] is required"))?;
        match section.kind.as_str() {
            "kfold" => Ok(SplitPlan::KFold {
                k: section.k.unwrap_or(5),
                seed: section.seed.unwrap_or(self.run.seed),
            }),
            "holdout" => {
                let train_values = section.train_values.clone().ok_or_else(|| {
                    CliError::config("config key 'split.train_values' is required for holdout")
                })?;
                let test_values = section.test_values.clone().ok_or_else(|| {
                    CliError::config("config key 'split.test_values' is required for holdout")
                })?;
                Ok(SplitPlan::HoldoutByColumn {
                    train_values,
                    test_values,
                })
            }
            other => Err(CliError::config(format!(
                "config key 'split.kind': unknown value '{other}' (kfold|holdout)"
            ))),
        }
    }

    pub fn pretrain_config(&self) -> Result<PretrainConfig, CliError> {
        let section = self
            .pretrain
            .as_ref()
            .ok_or_else(|| CliError::config("config section [pretrain] is required"))?;
        let mut cfg = PretrainConfig::new(self.run.seed);
        cfg.epochs = section.epochs;
        cfg.batch_size = section.batch_size;
        cfg.peak_lr = section.peak_lr;
        cfg.weight_decay = section.weight_decay;
        cfg.warmup_ratio = section.warmup_ratio;
        cfg.schedule = section.schedule;
        cfg.val_fraction = section.val_fraction;
        cfg.dynamic_masking = section.dynamic_masking;
        cfg.max_steps = (section.max_steps > 0).then_some(section.max_steps);
        if let Some(m) = &section.masking {
            cfg.masking = MaskingPolicy {
                select_prob: m.select_prob,
                mask_frac: m.mask_frac,
                random_frac: m.random_frac,
                keep_frac: m.keep_frac,
                seed: self.run.seed,
            };
        }
        Ok(cfg)
    }

    pub fn finetune_config(&self) -> Result<FinetuneConfig, CliError> {
        let section = self
            .finetune
            .as_ref()
            .ok_or_else(|| CliError::config("config section [finetune] is required"))?;
        let mut cfg = FinetuneConfig::new(self.run.seed);
        cfg.epochs = section.epochs;
        cfg.batch_size = section.batch_size;
        cfg.weight_decay = section.weight_decay;
        cfg.warmup_ratio = section.warmup_ratio;
        cfg.schedule = section.schedule;
        cfg.llrd = LlrdConfig {
            head_lr: section.head_lr,
            top_layer_lr: section.top_layer_lr,
            decay_factor: section.decay_factor,
        };
        cfg.freeze_encoder = section.freeze_encoder;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
format = 1

[run]
run_id = "t"
seed = 1
out_dir = "/tmp/t"

[data]
csv = "d.csv"
schema = "s.toml"

[tokenizer]
max_length = 64

[model]
d_model = 32
n_layers = 2
n_heads = 2
max_length = 64

[pretrain]
batch_size = 16
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.model.vocab_size, 0);
        let p = cfg.pretrain_config().unwrap();
        assert_eq!(p.epochs, 30);
        assert_eq!(p.peak_lr, 5e-5);
        assert_eq!(p.warmup_ratio, 0.05);
        assert_eq!(p.masking.select_prob, 0.15);
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = MINIMAL.replace("[pretrain]", "[pretrain]\nbogus_key = 1");
        let err = toml::from_str::<RunConfig>(&bad).unwrap_err().to_string();
        assert!(err.contains("bogus_key"), "{err}");
    }

    #[test]
    fn split_plans() {
        let with_split = format!("{MINIMAL}\n[split]\nkind = \"kfold\"\nk = 5\nseed = 3\n");
        let cfg: RunConfig = toml::from_str(&with_split).unwrap();
        assert_eq!(
            cfg.split_plan().unwrap(),
            SplitPlan::KFold { k: 5, seed: 3 }
        );
        let holdout = format!(
            "{MINIMAL}\n[split]\nkind = \"holdout\"\ntrain_values = [\"2018\"]\ntest_values = [\"2019\"]\n"
        );
        let cfg: RunConfig = toml::from_str(&holdout).unwrap();
        assert!(matches!(
            cfg.split_plan().unwrap(),
            SplitPlan::HoldoutByColumn { .. }
        ));
    }
}
