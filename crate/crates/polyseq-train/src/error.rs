use thiserror::Error;

use polyseq_model::ModelError;
use polyseq_tensor::TensorError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("degenerate batch: no maskable/labeled positions")]
    DegenerateBatch,
    #[error("non-finite loss {loss} at step {step}; aborting ({context})")]
    NonFinite {
        loss: f64,
        step: u64,
        context: String,
    },
    #[error("prediction/label length mismatch: {preds} vs {labels}")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("no learning-rate group for parameter '{0}'")]
    ParamName(String),
    #[error("training config: {0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
