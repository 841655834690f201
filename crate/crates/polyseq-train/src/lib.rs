//! Training loops for the polymer encoder: MLM pretraining and regression
//! finetuning, with the masking policy, losses, learning-rate schedules,
//! layer-wise learning-rate decay, metrics, and checkpoint selection.

pub mod error;
pub mod finetune;
pub mod llrd;
pub mod logging;
pub mod loss;
pub mod masking;
pub mod metrics;
pub mod pretrain;
pub mod schedule;

pub use error::TrainError;
pub use finetune::{finetune, FinetuneConfig, FinetuneOutcome};
pub use llrd::{build_llrd_groups, LlrdConfig};
pub use logging::{write_step_log, StepRecord};
pub use loss::{mlm_loss, regression_loss};
pub use masking::{apply_masking, MaskedExample, MaskingPolicy};
pub use metrics::{evaluate, write_metrics_csv, Metrics, MetricsRow};
pub use pretrain::{pretrain, PretrainConfig, PretrainOutcome};
pub use schedule::{lr_at, ScheduleConfig, ScheduleKind};

use polyseq_tokenizer::TokenSequence;

/// Flatten equally-sized sequences into row-major id and mask buffers.
pub(crate) fn flatten_batch(seqs: &[&TokenSequence]) -> (Vec<u32>, Vec<u8>) {
    let len = seqs.first().map_or(0, |s| s.len());
    let mut ids = Vec::with_capacity(seqs.len() * len);
    let mut mask = Vec::with_capacity(seqs.len() * len);
    for seq in seqs {
        assert_eq!(seq.len(), len, "batch sequences must share one length");
        ids.extend_from_slice(&seq.ids);
        mask.extend_from_slice(&seq.attention_mask);
    }
    (ids, mask)
}
