//! Sinusoidal positional encodings:
//! `PE[pos, 2i] = sin(pos / 10000^(2i/d_model))`,
//! `PE[pos, 2i+1] = cos(pos / 10000^(2i/d_model))`.

use polyseq_tensor::{NdArray, Scalar};

/// Build the `max_length x d_model` table. Entries are computed in f64 and
/// cast to the working precision.
pub fn positional_encoding<S: Scalar>(max_length: usize, d_model: usize) -> NdArray<S> {
    let mut data = Vec::with_capacity(max_length * d_model);
    for pos in 0..max_length {
        for j in 0..d_model {
            let pair = (j - j % 2) as f64; // 2i
            let angle = pos as f64 / 10000f64.powf(pair / d_model as f64);
            let value = if j % 2 == 0 { angle.sin() } else { angle.cos() };
            data.push(S::from_f64(value));
        }
    }
    NdArray::new(vec![max_length, d_model], data).expect("table shape is consistent")
}
