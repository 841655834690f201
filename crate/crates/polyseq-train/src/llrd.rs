//! Layer-wise learning-rate decay: the regressor head gets `head_lr`, the
//! top encoder layer gets `top_layer_lr`, each layer below it is scaled by
//! another factor of `decay_factor`, and the embeddings sit at the bottom
//! with `top_layer_lr * decay_factor^n_layers`.

use serde::{Deserialize, Serialize};

use polyseq_tensor::{ParamGroup, ParamStore, Scalar};

use crate::error::TrainError;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LlrdConfig {
    pub head_lr: f64,
    pub top_layer_lr: f64,
    pub decay_factor: f64,
}

/// Partition every parameter into head / per-layer / embedding groups with
/// their decayed learning rates. Unrecognized names are an error.
pub fn build_llrd_groups<S: Scalar>(
    store: &ParamStore<S>,
    cfg: &LlrdConfig,
    n_layers: usize,
    weight_decay: f64,
) -> Result<Vec<ParamGroup>, TrainError> {
    if !(0.0..=1.0).contains(&cfg.decay_factor) || cfg.decay_factor == 0.0 {
        return Err(TrainError::Config(format!(
            "decay_factor must be in (0, 1], got {}",
            cfg.decay_factor
        )));
    }
    let mut head = Vec::new();
    let mut layers: Vec<Vec<String>> = vec![Vec::new(); n_layers];
    let mut embeddings = Vec::new();
    for name in store.names() {
        if name.starts_with("reg.") {
            head.push(name);
        } else if name.starts_with("embed.") {
            embeddings.push(name);
        } else if let Some(layer) = ParamStore::<S>::layer_of(&name) {
            if layer >= n_layers {
                return Err(TrainError::ParamName(name));
            }
            layers[layer].push(name);
        } else {
            return Err(TrainError::ParamName(name));
        }
    }

    let mut groups = Vec::new();
    if !head.is_empty() {
        groups.push(ParamGroup {
            label: "head".to_string(),
            params: head,
            lr: cfg.head_lr,
            weight_decay,
        });
    }
    for (layer, params) in layers.into_iter().enumerate().rev() {
        if params.is_empty() {
            continue;
        }
        // layer n_layers-1 is the top: exponent 0
        let exponent = (n_layers - 1 - layer) as i32;
        groups.push(ParamGroup {
            label: format!("layer{layer}"),
            params,
            lr: cfg.top_layer_lr * cfg.decay_factor.powi(exponent),
            weight_decay,
        });
    }
    if !embeddings.is_empty() {
        groups.push(ParamGroup {
            label: "embeddings".to_string(),
            params: embeddings,
            lr: cfg.top_layer_lr * cfg.decay_factor.powi(n_layers as i32),
            weight_decay,
        });
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyseq_model::{Heads, Model, ModelConfig};

    fn store() -> ParamStore<f32> {
        let cfg = ModelConfig::toy(30, 12, 6, 2, 8);
        Model::new(cfg, Heads::regressor_only(), 1).unwrap().params
    }

    #[test]
    fn decayed_rates_match_closed_form() {
        let store = store();
        let cfg = LlrdConfig {
            head_lr: 1e-4,
            top_layer_lr: 5e-5,
            decay_factor: 0.9,
        };
        let groups = build_llrd_groups(&store, &cfg, 6, 0.01).unwrap();
        let lr_of = |label: &str| {
            groups
                .iter()
                .find(|g| g.label == label)
                .unwrap_or_else(|| panic!("{label} missing"))
                .lr
        };
        // closed form top_lr * decay^(L - l); tolerance covers the one-ULP
        // difference between const-folded and runtime powi
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs();
        assert_eq!(lr_of("head"), 1e-4);
        assert_eq!(lr_of("layer5"), 5e-5);
        assert!(close(lr_of("layer4"), 5e-5 * 0.9));
        assert!(close(lr_of("layer0"), 5e-5 * 0.9 * 0.9 * 0.9 * 0.9 * 0.9));
        assert!(close(
            lr_of("embeddings"),
            5e-5 * 0.9 * 0.9 * 0.9 * 0.9 * 0.9 * 0.9
        ));
        assert!((lr_of("embeddings") - 2.657205e-5).abs() < 1e-11);
    }

    #[test]
    fn decay_one_makes_all_encoder_groups_equal() {
        let store = store();
        let cfg = LlrdConfig {
            head_lr: 5e-5,
            top_layer_lr: 5e-5,
            decay_factor: 1.0,
        };
        let groups = build_llrd_groups(&store, &cfg, 6, 0.0).unwrap();
        for g in &groups {
            assert_eq!(g.lr, 5e-5, "{}", g.label);
        }
    }

    #[test]
    fn every_parameter_in_exactly_one_group() {
        let store = store();
        let cfg = LlrdConfig {
            head_lr: 1e-4,
            top_layer_lr: 1e-4,
            decay_factor: 0.9,
        };
        let groups = build_llrd_groups(&store, &cfg, 6, 0.0).unwrap();
        let mut seen = std::collections::HashSet::new();
        for g in &groups {
            for name in &g.params {
                assert!(seen.insert(name.clone()), "{name} in two groups");
            }
        }
        assert_eq!(seen.len(), store.len());
    }

    #[test]
    fn rates_monotone_from_head_to_embeddings() {
        let store = store();
        let cfg = LlrdConfig {
            head_lr: 1e-4,
            top_layer_lr: 1e-4,
            decay_factor: 0.85,
        };
        let groups = build_llrd_groups(&store, &cfg, 6, 0.0).unwrap();
        let rates: Vec<f64> = groups.iter().map(|g| g.lr).collect();
        for pair in rates.windows(2) {
            assert!(pair[0] >= pair[1], "{rates:?}");
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        let mut store = store();
        store.insert("mystery.weight", polyseq_tensor::NdArray::zeros(&[1]));
        let cfg = LlrdConfig {
            head_lr: 1e-4,
            top_layer_lr: 1e-4,
            decay_factor: 0.9,
        };
        assert!(matches!(
            build_llrd_groups(&store, &cfg, 6, 0.0),
            Err(TrainError::ParamName(_))
        ));
    }
}
