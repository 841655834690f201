//! Map token lists to fixed-length id sequences with special tokens.

use crate::vocab::{Vocabulary, BOS_ID, EOS_ID, PAD_ID, SPECIAL_TOKENS};

/// An encoded sequence: `<s>`, body (truncated to fit), `</s>`, then
/// `<pad>` up to the fixed length. `attention_mask` is 1 on non-pad
/// positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub ids: Vec<u32>,
    pub attention_mask: Vec<u8>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of non-pad positions (including `<s>` and `</s>`).
    pub fn real_len(&self) -> usize {
        self.attention_mask.iter().map(|&m| m as usize).sum()
    }
}

pub fn encode(tokens: &[String], vocab: &Vocabulary, max_length: usize) -> TokenSequence {
    assert!(max_length >= 2, "max_length must fit <s> and </s>");
    let body = &tokens[..tokens.len().min(max_length - 2)];

    let mut out_tokens = Vec::with_capacity(max_length);
    let mut ids = Vec::with_capacity(max_length);
    out_tokens.push(SPECIAL_TOKENS[BOS_ID as usize].to_string());
    ids.push(BOS_ID);
    for token in body {
        let id = vocab.id(token);
        // unknown tokens encode as <unk> and echo it in the token column
        out_tokens.push(vocab.token(id).to_string());
        ids.push(id);
    }
    out_tokens.push(SPECIAL_TOKENS[EOS_ID as usize].to_string());
    ids.push(EOS_ID);

    let real = ids.len();
    while ids.len() < max_length {
        out_tokens.push(SPECIAL_TOKENS[PAD_ID as usize].to_string());
        ids.push(PAD_ID);
    }
    let mut attention_mask = vec![0u8; max_length];
    attention_mask[..real].fill(1);

    TokenSequence {
        tokens: out_tokens,
        ids,
        attention_mask,
    }
}

/// Drop the structural specials (`<s>`, `</s>`, `<pad>`) and map ids back
/// to tokens; the inverse of [`encode`] up to `<unk>` substitutions and
/// truncation. `<unk>` and `<mask>` stay, marking what happened there.
pub fn decode(seq: &TokenSequence, vocab: &Vocabulary) -> Vec<String> {
    seq.ids
        .iter()
        .filter(|&&id| id != BOS_ID && id != EOS_ID && id != PAD_ID)
        .map(|&id| vocab.token(id).to_string())
        .collect()
}
