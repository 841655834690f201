//! Parameter layout and forward passes. Layer structure is post-norm:
//! attention -> dropout -> residual -> layer norm -> feed-forward (GELU)
//! -> dropout -> residual -> layer norm. Embeddings and positional
//! encodings are added directly (no sqrt(d_model) scaling).

use thiserror::Error;

use polyseq_tensor::rng::{stream_key, SplitMix64};
use polyseq_tensor::{NdArray, ParamStore, Scalar, Tensor, TensorError};

use crate::attention::{attention, AttentionDropout};
use crate::config::{ModelConfig, PositionMode};
use crate::pos::positional_encoding;

const LN_EPS: f64 = 1e-5;
/// Dropout stream id for the regression head (encoder layers use l*4..l*4+2).
const REG_DROPOUT_OP: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model config: {0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Whether the eval/train forward uses dropout, and the stream it draws
/// from when it does.
#[derive(Debug, Clone, Copy)]
pub enum Mode {
    Eval,
    Train { seed: u64, step: u64 },
}

impl Mode {
    fn unpack(self) -> (bool, u64, u64) {
        match self {
            Mode::Eval => (false, 0, 0),
            Mode::Train { seed, step } => (true, seed, step),
        }
    }
}

/// Which output heads to build parameters for.
#[derive(Debug, Clone, Copy)]
pub struct Heads {
    pub mlm: bool,
    pub regressor: bool,
}

impl Heads {
    pub fn mlm_only() -> Self {
        Heads {
            mlm: true,
            regressor: false,
        }
    }

    pub fn regressor_only() -> Self {
        Heads {
            mlm: false,
            regressor: true,
        }
    }
}

pub struct Model<S: Scalar> {
    pub cfg: ModelConfig,
    pub params: ParamStore<S>,
    pub heads: Heads,
    sin_table: Option<NdArray<S>>,
}

impl<S: Scalar> Model<S> {
    pub fn new(cfg: ModelConfig, heads: Heads, seed: u64) -> Result<Self, ModelError> {
        cfg.validate().map_err(ModelError::Config)?;
        let mut params = ParamStore::new();
        let (d, f, v) = (cfg.d_model, cfg.d_ff(), cfg.vocab_size);

        // scale-aware init: Xavier for projections, unit-variance
        // embeddings so token identity is commensurate with the O(1)
        // positional encodings (which are added without rescaling)
        let normal = |params: &mut ParamStore<S>, name: &str, shape: &[usize], std: f64| {
            let mut rng = SplitMix64::new(seed ^ fnv1a(name));
            let numel: usize = shape.iter().product();
            let data = (0..numel)
                .map(|_| S::from_f64(rng.normal() * std))
                .collect();
            params.insert(name, NdArray::new(shape.to_vec(), data).unwrap());
        };
        let xavier = |params: &mut ParamStore<S>, name: &str, shape: &[usize]| {
            let std = (2.0 / (shape[0] + shape[1]) as f64).sqrt();
            normal(params, name, shape, std);
        };
        let zeros = |params: &mut ParamStore<S>, name: &str, shape: &[usize]| {
            params.insert(name, NdArray::zeros(shape));
        };
        let ones = |params: &mut ParamStore<S>, name: &str, shape: &[usize]| {
            params.insert(name, NdArray::full(shape, S::ONE));
        };

        normal(&mut params, "embed.tok.weight", &[v, d], 1.0);
        if cfg.positions == PositionMode::Learned {
            normal(&mut params, "embed.pos.weight", &[cfg.max_length, d], 1.0);
        }
        for l in 0..cfg.n_layers {
            for proj in ["q_proj", "k_proj", "v_proj", "out_proj"] {
                xavier(&mut params, &format!("enc.{l}.attn.{proj}.weight"), &[d, d]);
                zeros(&mut params, &format!("enc.{l}.attn.{proj}.bias"), &[d]);
            }
            ones(&mut params, &format!("enc.{l}.norm1.gamma"), &[d]);
            zeros(&mut params, &format!("enc.{l}.norm1.beta"), &[d]);
            xavier(&mut params, &format!("enc.{l}.ff.fc1.weight"), &[d, f]);
            zeros(&mut params, &format!("enc.{l}.ff.fc1.bias"), &[f]);
            xavier(&mut params, &format!("enc.{l}.ff.fc2.weight"), &[f, d]);
            zeros(&mut params, &format!("enc.{l}.ff.fc2.bias"), &[d]);
            ones(&mut params, &format!("enc.{l}.norm2.gamma"), &[d]);
            zeros(&mut params, &format!("enc.{l}.norm2.beta"), &[d]);
        }
        if heads.mlm {
            xavier(&mut params, "mlm.dense.weight", &[d, d]);
            zeros(&mut params, "mlm.dense.bias", &[d]);
            ones(&mut params, "mlm.norm.gamma", &[d]);
            zeros(&mut params, "mlm.norm.beta", &[d]);
            if !cfg.tie_mlm {
                xavier(&mut params, "mlm.out.weight", &[d, v]);
            }
            zeros(&mut params, "mlm.out.bias", &[v]);
        }
        if heads.regressor {
            xavier(&mut params, "reg.fc1.weight", &[d, d]);
            zeros(&mut params, "reg.fc1.bias", &[d]);
            xavier(&mut params, "reg.fc2.weight", &[d, 1]);
            zeros(&mut params, "reg.fc2.bias", &[1]);
        }

        let sin_table = match cfg.positions {
            PositionMode::Sinusoidal => Some(positional_encoding(cfg.max_length, d)),
            PositionMode::Learned => None,
        };
        Ok(Model {
            cfg,
            params,
            heads,
            sin_table,
        })
    }

    fn linear(&self, x: &Tensor<S>, prefix: &str) -> Result<Tensor<S>, TensorError> {
        let w = self.params.get(&format!("{prefix}.weight"));
        let b = self.params.get(&format!("{prefix}.bias"));
        x.matmul(&w)?.add(&b)
    }

    fn norm(&self, x: &Tensor<S>, prefix: &str) -> Result<Tensor<S>, TensorError> {
        let gamma = self.params.get(&format!("{prefix}.gamma"));
        let beta = self.params.get(&format!("{prefix}.beta"));
        x.layer_norm(LN_EPS).mul(&gamma)?.add(&beta)
    }

    /// Hidden states `[batch, len, d_model]` plus the per-layer attention
    /// weights `[batch, heads, len, len]`.
    pub fn encoder_forward(
        &self,
        ids: &[u32],
        pad_mask: &[u8],
        batch: usize,
        mode: Mode,
    ) -> Result<(Tensor<S>, Vec<Tensor<S>>), ModelError> {
        if batch == 0 || !ids.len().is_multiple_of(batch) {
            return Err(ModelError::Config(format!(
                "{} ids do not form {batch} whole rows",
                ids.len()
            )));
        }
        let len = ids.len() / batch;
        if len > self.cfg.max_length {
            return Err(ModelError::Config(format!(
                "sequence length {len} exceeds max_length {}",
                self.cfg.max_length
            )));
        }
        if pad_mask.len() != ids.len() {
            return Err(TensorError::shape("pad_mask", &[ids.len()], &[pad_mask.len()]).into());
        }
        let (training, seed, step) = mode.unpack();
        let (d, h, dk) = (self.cfg.d_model, self.cfg.n_heads, self.cfg.head_dim());

        let tok = self
            .params
            .get("embed.tok.weight")
            .embedding_lookup(ids, &[batch, len])?;
        let mut x = match self.cfg.positions {
            PositionMode::Sinusoidal => {
                let table = self.sin_table.as_ref().expect("built for sinusoidal mode");
                let pe = Tensor::constant(table.narrow(0, 0, len));
                tok.add(&pe)?
            }
            PositionMode::Learned => {
                let pos_ids: Vec<u32> = (0..len as u32).collect();
                let pe = self
                    .params
                    .get("embed.pos.weight")
                    .embedding_lookup(&pos_ids, &[len])?;
                tok.add(&pe)?
            }
        };

        let mut all_weights = Vec::with_capacity(self.cfg.n_layers);
        for l in 0..self.cfg.n_layers {
            let split = |t: Tensor<S>| -> Result<Tensor<S>, TensorError> {
                Ok(t.reshape(&[batch, len, h, dk])?.permute(&[0, 2, 1, 3]))
            };
            let q = split(self.linear(&x, &format!("enc.{l}.attn.q_proj"))?)?;
            let k = split(self.linear(&x, &format!("enc.{l}.attn.k_proj"))?)?;
            let v = split(self.linear(&x, &format!("enc.{l}.attn.v_proj"))?)?;
            let att = attention(
                &q,
                &k,
                &v,
                pad_mask,
                Some(AttentionDropout {
                    p: self.cfg.dropout_attn,
                    key: stream_key(seed, (l * 4) as u64, step),
                }),
                training,
            )?;
            all_weights.push(att.weights);
            let ctx = att
                .context
                .permute(&[0, 2, 1, 3])
                .reshape(&[batch, len, d])?;
            let attn_out = self
                .linear(&ctx, &format!("enc.{l}.attn.out_proj"))?
                .dropout(
                    self.cfg.dropout_hidden,
                    training,
                    stream_key(seed, (l * 4 + 1) as u64, step),
                );
            let x1 = self.norm(&x.add(&attn_out)?, &format!("enc.{l}.norm1"))?;

            let ff = self.linear(&x1, &format!("enc.{l}.ff.fc1"))?.gelu();
            let ff = self.linear(&ff, &format!("enc.{l}.ff.fc2"))?.dropout(
                self.cfg.dropout_hidden,
                training,
                stream_key(seed, (l * 4 + 2) as u64, step),
            );
            x = self.norm(&x1.add(&ff)?, &format!("enc.{l}.norm2"))?;
        }
        Ok((x, all_weights))
    }

    /// Vocabulary logits `[batch, len, vocab]` from hidden states.
    pub fn mlm_logits(&self, hidden: &Tensor<S>) -> Result<Tensor<S>, ModelError> {
        let h = self.linear(hidden, "mlm.dense")?.gelu();
        let h = self.norm(&h, "mlm.norm")?;
        let projected = if self.cfg.tie_mlm {
            h.matmul(&self.params.get("embed.tok.weight").transpose(0, 1))?
        } else {
            h.matmul(&self.params.get("mlm.out.weight"))?
        };
        Ok(projected.add(&self.params.get("mlm.out.bias"))?)
    }

    /// Property predictions `[batch, 1]` from the `<s>` hidden vector:
    /// dropout -> linear -> SiLU -> linear.
    pub fn regression(&self, hidden: &Tensor<S>, mode: Mode) -> Result<Tensor<S>, ModelError> {
        let (training, seed, step) = mode.unpack();
        let first = hidden.select(1, 0);
        let first = first.dropout(
            self.cfg.dropout_hidden,
            training,
            stream_key(seed, REG_DROPOUT_OP, step),
        );
        let h = self.linear(&first, "reg.fc1")?.silu();
        Ok(self.linear(&h, "reg.fc2")?)
    }

    /// Freeze or unfreeze every encoder/embedding parameter, leaving head
    /// parameters (`mlm.*`, `reg.*`) trainable.
    pub fn set_encoder_trainable(&self, trainable: bool) {
        for name in self.params.names() {
            if name.starts_with("enc.") || name.starts_with("embed.") {
                self.params.get(&name).set_requires_grad(trainable);
            }
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for b in s.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}
