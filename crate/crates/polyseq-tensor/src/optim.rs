//! Named parameter store and the AdamW optimizer with per-group learning
//! rates (the layer-wise decay groups are built on top of this).

use std::collections::BTreeMap;

use crate::error::TensorError;
use crate::ndarray::NdArray;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Named model parameters. Names encode the role and, for encoder layers,
/// the layer index: `enc.3.attn.q_proj.weight`. Iteration order is the
/// sorted name order, which keeps optimizer trajectories reproducible.
#[derive(Default)]
pub struct ParamStore<S: Scalar> {
    params: BTreeMap<String, Tensor<S>>,
}

impl<S: Scalar> ParamStore<S> {
    pub fn new() -> Self {
        ParamStore {
            params: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, data: NdArray<S>) {
        let name = name.into();
        debug_assert!(
            !name.contains(' '),
            "parameter names must not contain spaces"
        );
        self.params.insert(name, Tensor::param(data));
    }

    /// Panics when `name` is absent; model code owns the naming scheme.
    pub fn get(&self, name: &str) -> Tensor<S> {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("parameter '{name}' missing from store"))
            .clone()
    }

    pub fn try_get(&self, name: &str) -> Option<Tensor<S>> {
        self.params.get(name).cloned()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    pub fn names(&self) -> Vec<String> {
        self.params.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor<S>)> {
        self.params.iter()
    }

    pub fn zero_grad(&self) {
        for tensor in self.params.values() {
            tensor.zero_grad();
        }
    }

    /// Encoder layer index parsed from a parameter name (`enc.<l>.` prefix).
    pub fn layer_of(name: &str) -> Option<usize> {
        let rest = name.strip_prefix("enc.")?;
        let (idx, _) = rest.split_once('.')?;
        idx.parse().ok()
    }

    /// Raw values snapshot, e.g. for bitwise freeze checks.
    pub fn snapshot(&self) -> BTreeMap<String, NdArray<S>> {
        self.params
            .iter()
            .map(|(k, v)| (k.clone(), v.data().clone()))
            .collect()
    }

    /// Overwrite matching parameters from `values`; returns the names that
    /// were loaded. Extra entries in `values` are ignored.
    pub fn load_matching(&self, values: &BTreeMap<String, NdArray<S>>) -> Vec<String> {
        let mut loaded = Vec::new();
        for (name, tensor) in &self.params {
            if let Some(value) = values.get(name) {
                assert_eq!(
                    tensor.shape(),
                    value.shape(),
                    "checkpoint shape mismatch for '{name}'"
                );
                tensor.set_data(value.clone());
                loaded.push(name.clone());
            }
        }
        loaded
    }
}

/// One optimizer group: parameter names plus their peak learning rate and
/// weight decay.
#[derive(Debug, Clone)]
pub struct ParamGroup {
    pub label: String,
    pub params: Vec<String>,
    pub lr: f64,
    pub weight_decay: f64,
}

/// Borrowed optimizer state: (step, first moments, second moments).
pub type AdamWState<'a, S> = (
    u64,
    &'a BTreeMap<String, NdArray<S>>,
    &'a BTreeMap<String, NdArray<S>>,
);

/// AdamW with decoupled weight decay:
/// `theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)`.
pub struct AdamW<S: Scalar> {
    pub betas: (f64, f64),
    pub eps: f64,
    groups: Vec<ParamGroup>,
    step: u64,
    m: BTreeMap<String, NdArray<S>>,
    v: BTreeMap<String, NdArray<S>>,
}

impl<S: Scalar> AdamW<S> {
    pub fn new(groups: Vec<ParamGroup>) -> Self {
        AdamW {
            betas: (0.9, 0.999),
            eps: 1e-6,
            groups,
            step: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    /// Single group over every parameter in the store.
    pub fn uniform(store: &ParamStore<S>, lr: f64, weight_decay: f64) -> Self {
        AdamW::new(vec![ParamGroup {
            label: "all".to_string(),
            params: store.names(),
            lr,
            weight_decay,
        }])
    }

    pub fn groups(&self) -> &[ParamGroup] {
        &self.groups
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update. `lr_scale` multiplies every group's peak learning
    /// rate (this is where the warmup/decay schedule plugs in). Missing
    /// gradients are treated as zero, so unused embedding rows still decay
    /// their moments consistently.
    pub fn step(&mut self, store: &ParamStore<S>, lr_scale: f64) -> Result<(), TensorError> {
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = self.betas;
        let bias1 = 1.0 - b1.powi(t);
        let bias2 = 1.0 - b2.powi(t);
        for group in &self.groups {
            let lr = group.lr * lr_scale;
            let wd = group.weight_decay;
            for name in &group.params {
                let tensor = store.try_get(name).ok_or_else(|| {
                    TensorError::State(format!(
                        "group '{}' references missing parameter '{name}'",
                        group.label
                    ))
                })?;
                let shape = tensor.shape();
                let grad = tensor.grad();
                let m = self
                    .m
                    .entry(name.clone())
                    .or_insert_with(|| NdArray::zeros(&shape));
                let v = self
                    .v
                    .entry(name.clone())
                    .or_insert_with(|| NdArray::zeros(&shape));
                if m.shape() != shape.as_slice() {
                    return Err(TensorError::State(format!(
                        "moment shape mismatch for '{name}'"
                    )));
                }

                let mut data = tensor.data().clone();
                let values = data.data_mut();
                let ms = m.data_mut();
                let vs = v.data_mut();
                for i in 0..values.len() {
                    let g = grad.as_ref().map_or(0.0, |g| g.data()[i].to_f64());
                    let mi = b1 * ms[i].to_f64() + (1.0 - b1) * g;
                    let vi = b2 * vs[i].to_f64() + (1.0 - b2) * g * g;
                    ms[i] = S::from_f64(mi);
                    vs[i] = S::from_f64(vi);
                    let m_hat = mi / bias1;
                    let v_hat = vi / bias2;
                    let theta = values[i].to_f64();
                    let update = m_hat / (v_hat.sqrt() + self.eps) + wd * theta;
                    values[i] = S::from_f64(theta - lr * update);
                }
                tensor.set_data(data);
            }
        }
        Ok(())
    }

    /// Moment tensors for checkpointing: (step, first moments, second
    /// moments).
    pub fn state(&self) -> AdamWState<'_, S> {
        (self.step, &self.m, &self.v)
    }

    pub fn load_state(
        &mut self,
        step: u64,
        m: BTreeMap<String, NdArray<S>>,
        v: BTreeMap<String, NdArray<S>>,
    ) {
        self.step = step;
        self.m = m;
        self.v = v;
    }
}
