//! Token vocabulary with reserved special tokens.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// The five reserved tokens, in id order.
pub const SPECIAL_TOKENS: [&str; 5] = ["<s>", "</s>", "<pad>", "<unk>", "<mask>"];

pub const BOS_ID: u32 = 0;
pub const EOS_ID: u32 = 1;
pub const PAD_ID: u32 = 2;
pub const UNK_ID: u32 = 3;
pub const MASK_ID: u32 = 4;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("vocabulary io: {0}")]
    Io(#[from] std::io::Error),
    #[error("vocabulary file line {line}: expected special token '{expected}', found '{found}'")]
    BadSpecial {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("vocabulary file has a duplicate token '{0}'")]
    Duplicate(String),
}

/// Bijective token <-> id map. Ids are dense, specials occupy 0..5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    fn from_tokens(id_to_token: Vec<String>) -> Result<Self, VocabError> {
        let mut token_to_id = HashMap::with_capacity(id_to_token.len());
        for (id, token) in id_to_token.iter().enumerate() {
            if token_to_id.insert(token.clone(), id as u32).is_some() {
                return Err(VocabError::Duplicate(token.clone()));
            }
        }
        Ok(Vocabulary {
            token_to_id,
            id_to_token,
        })
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    /// Id of `token`, or [`UNK_ID`] when absent.
    pub fn id(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn lookup(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.id_to_token[id as usize]
    }

    pub fn is_special(&self, id: u32) -> bool {
        (id as usize) < SPECIAL_TOKENS.len()
    }

    /// Count of non-special tokens.
    pub fn content_len(&self) -> usize {
        self.len() - SPECIAL_TOKENS.len()
    }

    /// The file form: one token per line, line number = id, specials first.
    pub fn to_text(&self) -> String {
        let mut text = String::new();
        for token in &self.id_to_token {
            text.push_str(token);
            text.push('\n');
        }
        text
    }

    pub fn save(&self, path: &Path) -> Result<(), VocabError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VocabError> {
        let text = fs::read_to_string(path)?;
        let tokens: Vec<String> = text.lines().map(str::to_string).collect();
        for (i, expected) in SPECIAL_TOKENS.iter().enumerate() {
            let found = tokens.get(i).map(String::as_str).unwrap_or("");
            if found != *expected {
                return Err(VocabError::BadSpecial {
                    line: i + 1,
                    expected: (*expected).to_string(),
                    found: found.to_string(),
                });
            }
        }
        Self::from_tokens(tokens)
    }
}

/// Build a vocabulary: the five specials, then every schema NAN token, then
/// all corpus tokens with count >= `min_count` ordered by (count desc,
/// token asc). Two runs over the same corpus give identical ids.
pub fn build_vocab<'a, I>(corpus: I, nan_tokens: &[String], min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a Vec<String>>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for tokens in corpus {
        for token in tokens {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
    }

    let mut id_to_token: Vec<String> = SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
    for nan in nan_tokens {
        if !id_to_token.contains(nan) {
            id_to_token.push(nan.clone());
        }
    }

    let mut ranked: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|(token, count)| *count >= min_count && !id_to_token.iter().any(|t| t == token))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    id_to_token.extend(ranked.into_iter().map(|(t, _)| t.to_string()));

    Vocabulary::from_tokens(id_to_token).expect("construction cannot duplicate tokens")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_corpus() {
        let corpus = vec![vec!["C".to_string()]];
        let vocab = build_vocab(&corpus, &[], 0);
        assert_eq!(vocab.len(), 6);
        assert_eq!(vocab.id("C"), 5);
        assert_eq!(vocab.token(0), "<s>");
        assert_eq!(vocab.token(4), "<mask>");
    }

    #[test]
    fn min_count_prunes_to_unk() {
        let corpus = vec![
            vec!["C".to_string(), "C".to_string()],
            vec!["Si".to_string()],
        ];
        let vocab = build_vocab(&corpus, &[], 2);
        assert_eq!(vocab.lookup("Si"), None);
        assert_eq!(vocab.id("Si"), UNK_ID);
        assert_eq!(vocab.id("C"), 5);
    }

    #[test]
    fn deterministic_ordering() {
        let corpus = vec![
            vec!["O".to_string(), "C".to_string(), "C".to_string()],
            vec!["N".to_string(), "O".to_string(), "C".to_string()],
        ];
        let a = build_vocab(&corpus, &[], 1);
        let b = build_vocab(&corpus, &[], 1);
        assert_eq!(a, b);
        // C count 3, O count 2, N count 1
        assert_eq!(a.id("C"), 5);
        assert_eq!(a.id("O"), 6);
        assert_eq!(a.id("N"), 7);
    }

    #[test]
    fn nan_tokens_reserved_even_when_unseen() {
        let corpus = vec![vec!["C".to_string()]];
        let vocab = build_vocab(&corpus, &["NAN_Tg".to_string()], 1);
        assert_eq!(vocab.id("NAN_Tg"), 5);
        assert_eq!(vocab.id("C"), 6);
    }

    #[test]
    fn save_load_round_trip() {
        let corpus = vec![vec!["C".to_string(), "Si".to_string()]];
        let vocab = build_vocab(&corpus, &["NAN_Tg".to_string()], 1);
        let dir = std::env::temp_dir().join("polyseq-vocab-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("vocab.txt");
        vocab.save(&path).unwrap();
        let loaded = Vocabulary::load(&path).unwrap();
        assert_eq!(vocab, loaded);
        std::fs::remove_file(&path).ok();
    }
}
