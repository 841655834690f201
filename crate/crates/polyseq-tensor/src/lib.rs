//! Minimal dense-tensor engine with reverse-mode automatic differentiation
//! and the AdamW optimizer. Everything runs on the CPU in row-major layout;
//! precision is generic (f32 for training, f64 for gradient checks).

pub mod checkpoint;
pub mod error;
pub mod io;
pub mod ndarray;
pub mod optim;
pub mod rng;
pub mod scalar;
pub mod tensor;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, OptState, CKPT_MAGIC};
pub use error::TensorError;
pub use ndarray::NdArray;
pub use optim::{AdamW, ParamGroup, ParamStore};
pub use rng::SplitMix64;
pub use scalar::Scalar;
pub use tensor::Tensor;

/// Label id marking positions excluded from the cross-entropy mean.
pub const IGNORE_INDEX: i64 = -100;
