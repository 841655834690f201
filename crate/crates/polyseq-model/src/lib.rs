//! The polymer-sequence encoder network: token embeddings plus sinusoidal
//! positional encodings, a stack of post-norm Transformer encoder layers
//! with multi-head self-attention, an MLM head for pretraining, and a
//! regression head reading the `<s>` position for property prediction.

pub mod attention;
pub mod config;
pub mod model;
pub mod pos;

pub use attention::{attention, AttentionDropout, AttentionOutput};
pub use config::{ModelConfig, PositionMode};
pub use model::{Heads, Mode, Model, ModelError};
pub use pos::positional_encoding;
