//! Model hyperparameters.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionMode {
    Sinusoidal,
    Learned,
}

/// Encoder hyperparameters. The defaults are the full-scale configuration
/// (768-wide, 6 layers, 12 heads); tests and the bundled mini pipeline use
/// [`ModelConfig::toy`]-sized variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// 0 in a config file means "derive from the built vocabulary".
    #[serde(default)]
    pub vocab_size: usize,
    #[serde(default = "default_d_model")]
    pub d_model: usize,
    #[serde(default = "default_n_layers")]
    pub n_layers: usize,
    #[serde(default = "default_n_heads")]
    pub n_heads: usize,
    /// Feed-forward width; 0 means 4 * d_model.
    #[serde(default)]
    pub d_ff: usize,
    #[serde(default = "default_max_length")]
    pub max_length: usize,
    #[serde(default = "default_dropout")]
    pub dropout_hidden: f64,
    #[serde(default = "default_dropout")]
    pub dropout_attn: f64,
    #[serde(default = "default_positions")]
    pub positions: PositionMode,
    /// Share the MLM output projection with the token embedding.
    #[serde(default)]
    pub tie_mlm: bool,
}

fn default_d_model() -> usize {
    768
}
fn default_n_layers() -> usize {
    6
}
fn default_n_heads() -> usize {
    12
}
fn default_max_length() -> usize {
    256
}
fn default_dropout() -> f64 {
    0.1
}
fn default_positions() -> PositionMode {
    PositionMode::Sinusoidal
}

impl ModelConfig {
    /// Full-scale defaults for a given vocabulary.
    pub fn base(vocab_size: usize) -> Self {
        ModelConfig {
            vocab_size,
            d_model: default_d_model(),
            n_layers: default_n_layers(),
            n_heads: default_n_heads(),
            d_ff: 0,
            max_length: default_max_length(),
            dropout_hidden: default_dropout(),
            dropout_attn: default_dropout(),
            positions: default_positions(),
            tie_mlm: false,
        }
    }

    /// Small configuration for tests and the bundled mini pipeline.
    pub fn toy(
        vocab_size: usize,
        d_model: usize,
        n_layers: usize,
        n_heads: usize,
        max_length: usize,
    ) -> Self {
        ModelConfig {
            vocab_size,
            d_model,
            n_layers,
            n_heads,
            d_ff: 0,
            max_length,
            dropout_hidden: 0.1,
            dropout_attn: 0.1,
            positions: default_positions(),
            tie_mlm: false,
        }
    }

    pub fn d_ff(&self) -> usize {
        if self.d_ff == 0 {
            4 * self.d_model
        } else {
            self.d_ff
        }
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.vocab_size == 0 {
            return Err("vocab_size must be positive".into());
        }
        if self.d_model == 0 || self.n_layers == 0 || self.n_heads == 0 || self.max_length == 0 {
            return Err("model dimensions must be positive".into());
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(format!(
                "d_model {} must be divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        for (name, p) in [
            ("dropout_hidden", self.dropout_hidden),
            ("dropout_attn", self.dropout_attn),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(format!("{name} must be in [0, 1), got {p}"));
            }
        }
        Ok(())
    }

    /// Flat key/value pairs for the checkpoint manifest.
    pub fn to_meta(&self) -> Vec<(String, String)> {
        vec![
            ("vocab_size".into(), self.vocab_size.to_string()),
            ("d_model".into(), self.d_model.to_string()),
            ("n_layers".into(), self.n_layers.to_string()),
            ("n_heads".into(), self.n_heads.to_string()),
            ("d_ff".into(), self.d_ff().to_string()),
            ("max_length".into(), self.max_length.to_string()),
            ("dropout_hidden".into(), self.dropout_hidden.to_string()),
            ("dropout_attn".into(), self.dropout_attn.to_string()),
            (
                "positions".into(),
                match self.positions {
                    PositionMode::Sinusoidal => "sinusoidal".into(),
                    PositionMode::Learned => "learned".into(),
                },
            ),
            ("tie_mlm".into(), self.tie_mlm.to_string()),
        ]
    }

    pub fn from_meta(meta: &[(String, String)]) -> Result<Self, String> {
        let get = |key: &str| -> Result<&str, String> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| format!("checkpoint meta missing '{key}'"))
        };
        let parse_usize = |key: &str| -> Result<usize, String> {
            get(key)?.parse().map_err(|_| format!("bad meta '{key}'"))
        };
        let parse_f64 = |key: &str| -> Result<f64, String> {
            get(key)?.parse().map_err(|_| format!("bad meta '{key}'"))
        };
        Ok(ModelConfig {
            vocab_size: parse_usize("vocab_size")?,
            d_model: parse_usize("d_model")?,
            n_layers: parse_usize("n_layers")?,
            n_heads: parse_usize("n_heads")?,
            d_ff: parse_usize("d_ff")?,
            max_length: parse_usize("max_length")?,
            dropout_hidden: parse_f64("dropout_hidden")?,
            dropout_attn: parse_f64("dropout_attn")?,
            positions: match get("positions")? {
                "sinusoidal" => PositionMode::Sinusoidal,
                "learned" => PositionMode::Learned,
                other => return Err(format!("bad positions mode '{other}'")),
            },
            tie_mlm: get("tie_mlm")? == "true",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_scale_defaults() {
        let cfg = ModelConfig::base(100);
        assert_eq!(cfg.d_model, 768);
        assert_eq!(cfg.n_layers, 6);
        assert_eq!(cfg.n_heads, 12);
        assert_eq!(cfg.d_ff(), 3072);
        assert_eq!(cfg.max_length, 256);
        assert_eq!(cfg.dropout_hidden, 0.1);
        assert_eq!(cfg.dropout_attn, 0.1);
        assert_eq!(cfg.head_dim(), 64);
        cfg.validate().unwrap();
    }

    #[test]
    fn head_divisibility_enforced() {
        let cfg = ModelConfig::toy(50, 10, 2, 3, 16);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn meta_round_trip() {
        let mut cfg = ModelConfig::toy(77, 32, 2, 4, 48);
        cfg.tie_mlm = true;
        let meta = cfg.to_meta();
        let back = ModelConfig::from_meta(&meta).unwrap();
        // d_ff resolves to its concrete value through the manifest
        assert_eq!(back.d_ff, cfg.d_ff());
        assert_eq!(back.vocab_size, cfg.vocab_size);
        assert_eq!(back.positions, cfg.positions);
        assert!(back.tie_mlm);
    }
}
