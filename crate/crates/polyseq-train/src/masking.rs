//! MLM masking policy: select 15% of non-special positions, then replace
//! 80% of those with `<mask>`, 10% with a random non-special token, and
//! leave 10% unchanged.

use polyseq_tensor::{SplitMix64, IGNORE_INDEX};
use polyseq_tokenizer::{
    TokenSequence, Vocabulary, BOS_ID, EOS_ID, MASK_ID, PAD_ID, SPECIAL_TOKENS,
};

#[derive(Debug, Clone)]
pub struct MaskingPolicy {
    pub select_prob: f64,
    pub mask_frac: f64,
    pub random_frac: f64,
    pub keep_frac: f64,
    pub seed: u64,
}

impl Default for MaskingPolicy {
    fn default() -> Self {
        MaskingPolicy {
            select_prob: 0.15,
            mask_frac: 0.8,
            random_frac: 0.1,
            keep_frac: 0.1,
            seed: 0,
        }
    }
}

impl MaskingPolicy {
    pub fn with_seed(seed: u64) -> Self {
        MaskingPolicy {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.select_prob) {
            return Err(format!("select_prob {} out of [0,1]", self.select_prob));
        }
        let sum = self.mask_frac + self.random_frac + self.keep_frac;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(format!("mask/random/keep fractions sum to {sum}, not 1"));
        }
        if self.mask_frac < 0.0 || self.random_frac < 0.0 || self.keep_frac < 0.0 {
            return Err("fractions must be non-negative".into());
        }
        Ok(())
    }

    /// Number of positions selected out of `maskable`: round-half-up of
    /// `select_prob * maskable`, and at least 1 when any position exists.
    pub fn selected_count(&self, maskable: usize) -> usize {
        if maskable == 0 {
            return 0;
        }
        let count = (self.select_prob * maskable as f64 + 0.5).floor() as usize;
        count.max(1).min(maskable)
    }
}

/// Model input ids plus per-position labels; unselected positions carry
/// [`IGNORE_INDEX`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedExample {
    pub input_ids: Vec<u32>,
    pub labels: Vec<i64>,
}

pub fn apply_masking(
    seq: &TokenSequence,
    policy: &MaskingPolicy,
    vocab: &Vocabulary,
    rng: &mut SplitMix64,
) -> MaskedExample {
    let mut input_ids = seq.ids.clone();
    let mut labels = vec![IGNORE_INDEX; seq.ids.len()];

    let mut maskable: Vec<usize> = seq
        .ids
        .iter()
        .enumerate()
        .filter(|&(_, &id)| id != BOS_ID && id != EOS_ID && id != PAD_ID)
        .map(|(i, _)| i)
        .collect();
    let m = maskable.len();
    let count = policy.selected_count(m);

    // partial Fisher-Yates: the first `count` entries are a uniform sample
    // without replacement
    for i in 0..count {
        let j = i + rng.below(m - i);
        maskable.swap(i, j);
    }
    let content = vocab.len() - SPECIAL_TOKENS.len();
    for &pos in &maskable[..count] {
        labels[pos] = i64::from(seq.ids[pos]);
        let u = rng.f64();
        if u < policy.mask_frac {
            input_ids[pos] = MASK_ID;
        } else if u < policy.mask_frac + policy.random_frac {
            assert!(content > 0, "vocabulary has no non-special tokens to draw");
            input_ids[pos] = (SPECIAL_TOKENS.len() + rng.below(content)) as u32;
        }
        // else: keep the original token
    }
    MaskedExample { input_ids, labels }
}
