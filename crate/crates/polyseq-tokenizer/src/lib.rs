//! Chemically-aware tokenization of polymer sequences.
//!
//! A polymer record (components with SMILES and descriptors, plus global
//! descriptors) is assembled into one flat string — components joined by
//! `|`, every descriptor preceded by `$` — then sliced into tokens: one
//! token per element symbol (multi-letter symbols like `Si` never split),
//! one token per descriptor value, `NAN_<name>` tokens for missing values.

pub mod assemble;
pub mod encode;
pub mod record;
pub mod schema;
pub mod tokenize;
pub mod vocab;

pub use assemble::{assemble_sequence, SchemaError};
pub use encode::{decode, encode, TokenSequence};
pub use record::{Descriptor, PolymerComponent, PolymerRecord};
pub use schema::{DescriptorKind, DescriptorSpec, GlobalDescriptorSpec, SequenceSchema};
pub use tokenize::{tokenize, TokenizeError};
pub use vocab::{
    build_vocab, VocabError, Vocabulary, BOS_ID, EOS_ID, MASK_ID, PAD_ID, SPECIAL_TOKENS, UNK_ID,
};
