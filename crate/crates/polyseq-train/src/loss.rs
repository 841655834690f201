//! Training losses. MLM uses mean categorical cross-entropy over the
//! selected positions; regression uses mean squared error.

use polyseq_tensor::{NdArray, Scalar, Tensor, TensorError};

use crate::error::TrainError;

/// Cross-entropy of `logits` (`[rows, vocab]` or `[batch, len, vocab]`)
/// against labels with ignore markers. Errors with `DegenerateBatch` when
/// nothing is labeled so the caller can skip the batch.
pub fn mlm_loss<S: Scalar>(logits: &Tensor<S>, labels: &[i64]) -> Result<Tensor<S>, TrainError> {
    let shape = logits.shape();
    let vocab = *shape.last().expect("logits have a vocab axis");
    let rows = logits.numel() / vocab;
    let flat = logits.reshape(&[rows, vocab])?;
    flat.masked_cross_entropy(labels).map_err(|e| match e {
        TensorError::EmptyReduction(_) => TrainError::DegenerateBatch,
        other => TrainError::Tensor(other),
    })
}

/// Mean squared error between predictions `[batch, 1]` and labels.
pub fn regression_loss<S: Scalar>(
    preds: &Tensor<S>,
    labels: &[f64],
) -> Result<Tensor<S>, TrainError> {
    if preds.numel() != labels.len() {
        return Err(TrainError::LengthMismatch {
            preds: preds.numel(),
            labels: labels.len(),
        });
    }
    let target = Tensor::constant(NdArray::new(
        preds.shape(),
        labels.iter().map(|&v| S::from_f64(v)).collect(),
    )?);
    let diff = preds.sub(&target)?;
    Ok(diff.mul(&diff)?.mean_all())
}
