//! Scaled dot-product attention: `softmax(Q K^T / sqrt(d_k)) V` with pad
//! keys masked to -inf before the softmax.

use polyseq_tensor::{NdArray, Scalar, Tensor, TensorError};

/// Attention-weight dropout parameters (p, stream key).
#[derive(Debug, Clone, Copy)]
pub struct AttentionDropout {
    pub p: f64,
    pub key: u64,
}

pub struct AttentionOutput<S: Scalar> {
    /// `[batch, heads, len, d_k]` mixed values.
    pub context: Tensor<S>,
    /// `[batch, heads, len, len]` post-softmax weights (pre-dropout); every
    /// row sums to 1 and pad-key columns are exactly 0.
    pub weights: Tensor<S>,
}

/// `q`, `k`, `v` are `[batch, heads, len, d_k]`; `pad_mask` is `[batch,
/// len]` row-major with 1 marking real tokens. Masked key positions receive
/// -inf scores, so their weight underflows to exactly zero.
pub fn attention<S: Scalar>(
    q: &Tensor<S>,
    k: &Tensor<S>,
    v: &Tensor<S>,
    pad_mask: &[u8],
    dropout: Option<AttentionDropout>,
    training: bool,
) -> Result<AttentionOutput<S>, TensorError> {
    let shape = q.shape();
    if shape.len() != 4 || k.shape() != shape || v.shape() != shape {
        return Err(TensorError::shape("attention q/k/v", &shape, &k.shape()));
    }
    let (batch, len, d_k) = (shape[0], shape[2], shape[3]);
    if pad_mask.len() != batch * len {
        return Err(TensorError::shape(
            "attention pad_mask",
            &[batch * len],
            &[pad_mask.len()],
        ));
    }

    let scale = 1.0 / (d_k as f64).sqrt();
    let scores = q.matmul(&k.transpose(2, 3))?.mul_scalar(scale);

    // additive bias: 0 on real keys, -inf on pads, broadcast over heads
    // and query positions
    let bias_data: Vec<S> = pad_mask
        .iter()
        .map(|&m| {
            if m != 0 {
                S::ZERO
            } else {
                S::from_f64(f64::NEG_INFINITY)
            }
        })
        .collect();
    let bias = Tensor::constant(NdArray::new(vec![batch, 1, 1, len], bias_data)?);
    let masked = scores.add(&bias)?;
    let weights = masked.softmax(3);

    let mixed = match (dropout, training) {
        (Some(d), true) => weights.dropout(d.p, true, d.key),
        _ => weights.clone(),
    };
    let context = mixed.matmul(v)?;
    Ok(AttentionOutput { context, weights })
}
