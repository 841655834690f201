//! Reverse-mode autodiff over [`NdArray`]. Each operation returns a new
//! tensor holding its parents and a closure that maps the output gradient
//! to parent gradients; `backward` walks the recorded graph in reverse
//! topological order. Graphs are built fresh every step and never reused.

use std::cell::{Ref, RefCell};
use std::collections::HashSet;
use std::rc::Rc;

use crate::error::TensorError;
use crate::ndarray::NdArray;
use crate::rng::counter_uniform;
use crate::scalar::Scalar;
use crate::IGNORE_INDEX;

type BackFn<S> = Box<dyn Fn(&NdArray<S>) -> Vec<NdArray<S>>>;

struct Node<S: Scalar> {
    data: NdArray<S>,
    grad: Option<NdArray<S>>,
    requires_grad: bool,
    tracked: bool,
    parents: Vec<Tensor<S>>,
    backward: Option<BackFn<S>>,
}

pub struct Tensor<S: Scalar> {
    node: Rc<RefCell<Node<S>>>,
}

impl<S: Scalar> Clone for Tensor<S> {
    fn clone(&self) -> Self {
        Tensor {
            node: Rc::clone(&self.node),
        }
    }
}

impl<S: Scalar> std::fmt::Debug for Tensor<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.node.borrow();
        f.debug_struct("Tensor")
            .field("shape", &n.data.shape())
            .field("requires_grad", &n.requires_grad)
            .finish()
    }
}

impl<S: Scalar> Tensor<S> {
    fn from_node(node: Node<S>) -> Self {
        Tensor {
            node: Rc::new(RefCell::new(node)),
        }
    }

    /// Leaf tensor without gradient tracking.
    pub fn constant(data: NdArray<S>) -> Self {
        Tensor::from_node(Node {
            data,
            grad: None,
            requires_grad: false,
            tracked: false,
            parents: Vec::new(),
            backward: None,
        })
    }

    /// Leaf tensor that accumulates gradients.
    pub fn param(data: NdArray<S>) -> Self {
        Tensor::from_node(Node {
            data,
            grad: None,
            requires_grad: true,
            tracked: true,
            parents: Vec::new(),
            backward: None,
        })
    }

    pub fn scalar(v: S) -> Self {
        Tensor::constant(NdArray::scalar(v))
    }

    /// Interior node; untracked results drop their history immediately.
    fn make(data: NdArray<S>, parents: Vec<Tensor<S>>, backward: BackFn<S>) -> Self {
        let tracked = parents.iter().any(Tensor::tracked);
        Tensor::from_node(Node {
            data,
            grad: None,
            requires_grad: false,
            tracked,
            parents: if tracked { parents } else { Vec::new() },
            backward: if tracked { Some(backward) } else { None },
        })
    }

    pub fn data(&self) -> Ref<'_, NdArray<S>> {
        Ref::map(self.node.borrow(), |n| &n.data)
    }

    /// Replace a leaf's value in place (optimizer updates, checkpoint loads).
    pub fn set_data(&self, data: NdArray<S>) {
        let mut n = self.node.borrow_mut();
        assert!(
            n.parents.is_empty(),
            "set_data is only valid on leaf tensors"
        );
        n.data = data;
    }

    pub fn shape(&self) -> Vec<usize> {
        self.node.borrow().data.shape().to_vec()
    }

    pub fn numel(&self) -> usize {
        self.node.borrow().data.numel()
    }

    /// Single value of a one-element tensor, as f64.
    pub fn item_f64(&self) -> f64 {
        self.node.borrow().data.item().to_f64()
    }

    pub fn grad(&self) -> Option<NdArray<S>> {
        self.node.borrow().grad.clone()
    }

    pub fn zero_grad(&self) {
        self.node.borrow_mut().grad = None;
    }

    pub fn requires_grad(&self) -> bool {
        self.node.borrow().requires_grad
    }

    /// Toggle gradient accumulation on a leaf (freeze/unfreeze).
    pub fn set_requires_grad(&self, flag: bool) {
        let mut n = self.node.borrow_mut();
        assert!(n.parents.is_empty(), "only leaves can change requires_grad");
        n.requires_grad = flag;
        n.tracked = flag;
    }

    fn tracked(&self) -> bool {
        self.node.borrow().tracked
    }

    // ---- backward ------------------------------------------------------

    /// Populate gradients of every tracked leaf reachable from this scalar.
    /// Repeated calls accumulate until `zero_grad`.
    pub fn backward(&self) -> Result<(), TensorError> {
        if self.numel() != 1 {
            return Err(TensorError::Graph(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape()
            )));
        }
        if !self.tracked() {
            return Err(TensorError::Graph(
                "loss does not depend on any tracked tensor".to_string(),
            ));
        }
        let order = self.topo_order();
        accumulate(self, &NdArray::full(&self.shape(), S::ONE));
        for t in order.iter().rev() {
            let (parents, contributions) = {
                let n = t.node.borrow();
                let Some(back) = &n.backward else { continue };
                let grad = match &n.grad {
                    Some(g) => g.clone(),
                    None => continue,
                };
                (n.parents.clone(), back(&grad))
            };
            for (parent, contribution) in parents.iter().zip(&contributions) {
                if parent.tracked() {
                    accumulate(parent, contribution);
                }
            }
            // free the intermediate gradient; leaves keep theirs
            let mut n = t.node.borrow_mut();
            if !n.requires_grad && n.backward.is_some() {
                n.grad = None;
            }
        }
        Ok(())
    }

    fn topo_order(&self) -> Vec<Tensor<S>> {
        enum Frame<S: Scalar> {
            Enter(Tensor<S>),
            Exit(Tensor<S>),
        }
        let mut order = Vec::new();
        let mut visited: HashSet<*const ()> = HashSet::new();
        let mut stack = vec![Frame::Enter(self.clone())];
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Enter(t) => {
                    let ptr = Rc::as_ptr(&t.node) as *const ();
                    if !visited.insert(ptr) {
                        continue;
                    }
                    stack.push(Frame::Exit(t.clone()));
                    for p in &t.node.borrow().parents {
                        if p.tracked() {
                            stack.push(Frame::Enter(p.clone()));
                        }
                    }
                }
                Frame::Exit(t) => order.push(t),
            }
        }
        order
    }

    // ---- elementwise and broadcast ops ----------------------------------

    pub fn add(&self, other: &Tensor<S>) -> Result<Tensor<S>, TensorError> {
        let out = self.data().zip_broadcast(&other.data(), |a, b| a + b)?;
        let (sa, sb) = (self.shape(), other.shape());
        Ok(Tensor::make(
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| vec![g.reduce_to(&sa), g.reduce_to(&sb)]),
        ))
    }

    pub fn mul(&self, other: &Tensor<S>) -> Result<Tensor<S>, TensorError> {
        let out = self.data().zip_broadcast(&other.data(), |a, b| a * b)?;
        let (sa, sb) = (self.shape(), other.shape());
        let (da, db) = (self.data().clone(), other.data().clone());
        Ok(Tensor::make(
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| {
                let ga = g
                    .zip_broadcast(&db, |gv, bv| gv * bv)
                    .expect("forward shapes already checked")
                    .reduce_to(&sa);
                let gb = g
                    .zip_broadcast(&da, |gv, av| gv * av)
                    .expect("forward shapes already checked")
                    .reduce_to(&sb);
                vec![ga, gb]
            }),
        ))
    }

    pub fn mul_scalar(&self, c: f64) -> Tensor<S> {
        let cs = S::from_f64(c);
        let out = self.data().map(|v| v * cs);
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| vec![g.map(|v| v * cs)]),
        )
    }

    pub fn add_scalar(&self, c: f64) -> Tensor<S> {
        let cs = S::from_f64(c);
        let out = self.data().map(|v| v + cs);
        Tensor::make(out, vec![self.clone()], Box::new(|g| vec![g.clone()]))
    }

    pub fn neg(&self) -> Tensor<S> {
        self.mul_scalar(-1.0)
    }

    pub fn sub(&self, other: &Tensor<S>) -> Result<Tensor<S>, TensorError> {
        self.add(&other.neg())
    }

    // ---- linear algebra --------------------------------------------------

    pub fn matmul(&self, other: &Tensor<S>) -> Result<Tensor<S>, TensorError> {
        let out = self.data().matmul(&other.data())?;
        let (da, db) = (self.data().clone(), other.data().clone());
        Ok(Tensor::make(
            out,
            vec![self.clone(), other.clone()],
            Box::new(move |g| {
                let ga = g
                    .matmul(&db.transpose_last2())
                    .expect("grad shapes follow forward shapes");
                let gb = if db.ndim() == 2 && da.ndim() > 2 {
                    // shared weights: fold the batch into rows
                    let k = *da.shape().last().unwrap();
                    let n = *db.shape().last().unwrap();
                    let rows = da.numel() / k;
                    let a2 = da.reshape(&[rows, k]).unwrap();
                    let g2 = g.reshape(&[rows, n]).unwrap();
                    a2.transpose_last2().matmul(&g2).unwrap()
                } else {
                    da.transpose_last2().matmul(g).unwrap()
                };
                vec![ga, gb]
            }),
        ))
    }

    // ---- shape ops -------------------------------------------------------

    pub fn permute(&self, axes: &[usize]) -> Tensor<S> {
        let out = self.data().permute(axes);
        let mut inverse = vec![0usize; axes.len()];
        for (i, &a) in axes.iter().enumerate() {
            inverse[a] = i;
        }
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| vec![g.permute(&inverse)]),
        )
    }

    pub fn transpose(&self, a: usize, b: usize) -> Tensor<S> {
        let mut axes: Vec<usize> = (0..self.data().ndim()).collect();
        axes.swap(a, b);
        self.permute(&axes)
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor<S>, TensorError> {
        let out = self.data().reshape(shape)?;
        let original = self.shape();
        Ok(Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| vec![g.reshape(&original).unwrap()]),
        ))
    }

    pub fn concat(parts: &[Tensor<S>], axis: usize) -> Result<Tensor<S>, TensorError> {
        let datas: Vec<NdArray<S>> = parts.iter().map(|p| p.data().clone()).collect();
        let refs: Vec<&NdArray<S>> = datas.iter().collect();
        let out = NdArray::concat(&refs, axis)?;
        let lens: Vec<usize> = datas.iter().map(|d| d.shape()[axis]).collect();
        Ok(Tensor::make(
            out,
            parts.to_vec(),
            Box::new(move |g| {
                let mut start = 0;
                lens.iter()
                    .map(|&len| {
                        let piece = g.narrow(axis, start, len);
                        start += len;
                        piece
                    })
                    .collect()
            }),
        ))
    }

    /// Pick index `idx` along `axis`, dropping the axis (e.g. the `<s>`
    /// position of a hidden-state batch).
    pub fn select(&self, axis: usize, idx: usize) -> Tensor<S> {
        let out = self.data().select(axis, idx);
        let full_shape = self.shape();
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| vec![g.scatter_select(axis, idx, &full_shape)]),
        )
    }

    // ---- reductions -------------------------------------------------------

    pub fn sum_all(&self) -> Tensor<S> {
        let out = NdArray::scalar(self.data().sum_all());
        let shape = self.shape();
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| vec![NdArray::full(&shape, g.item())]),
        )
    }

    pub fn mean_all(&self) -> Tensor<S> {
        let n = self.numel() as f64;
        let out = NdArray::scalar(S::from_f64(self.data().sum_all().to_f64() / n));
        let shape = self.shape();
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| vec![NdArray::full(&shape, S::from_f64(g.item().to_f64() / n))]),
        )
    }

    // ---- nonlinearities ----------------------------------------------------

    /// Softmax along `axis`, shift-invariant via max subtraction.
    pub fn softmax(&self, axis: usize) -> Tensor<S> {
        let rank = self.data().ndim();
        if axis + 1 == rank {
            self.softmax_last()
        } else {
            let mut axes: Vec<usize> = (0..rank).collect();
            axes.swap(axis, rank - 1);
            self.permute(&axes).softmax_last().permute(&axes)
        }
    }

    fn softmax_last(&self) -> Tensor<S> {
        let data = self.data();
        let lane = *data.shape().last().expect("softmax needs rank >= 1");
        let mut out = data.clone();
        for row in out.data_mut().chunks_mut(lane) {
            let mut max = row[0];
            for &v in row.iter() {
                max = max.maximum(v);
            }
            let mut sum = 0.0f64;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += v.to_f64();
            }
            let inv = S::from_f64(1.0 / sum);
            for v in row.iter_mut() {
                *v = *v * inv;
            }
        }
        drop(data);
        let saved = out.clone();
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let mut gx = g.clone();
                for (grow, yrow) in gx
                    .data_mut()
                    .chunks_mut(lane)
                    .zip(saved.data().chunks(lane))
                {
                    let mut dot = 0.0f64;
                    for (gv, yv) in grow.iter().zip(yrow) {
                        dot += gv.to_f64() * yv.to_f64();
                    }
                    let dot = S::from_f64(dot);
                    for (gv, yv) in grow.iter_mut().zip(yrow) {
                        *gv = *yv * (*gv - dot);
                    }
                }
                vec![gx]
            }),
        )
    }

    /// Layer normalization over the last axis with population variance.
    /// Affine parameters are applied separately via `mul`/`add`.
    pub fn layer_norm(&self, eps: f64) -> Tensor<S> {
        let data = self.data();
        let lane = *data.shape().last().expect("layer_norm needs rank >= 1");
        let rows = data.numel() / lane;
        let mut out = data.clone();
        let mut inv_std = Vec::with_capacity(rows);
        for row in out.data_mut().chunks_mut(lane) {
            let mean = row.iter().map(|v| v.to_f64()).sum::<f64>() / lane as f64;
            let var = row
                .iter()
                .map(|v| {
                    let d = v.to_f64() - mean;
                    d * d
                })
                .sum::<f64>()
                / lane as f64;
            let inv = 1.0 / (var + eps).sqrt();
            inv_std.push(inv);
            for v in row.iter_mut() {
                *v = S::from_f64((v.to_f64() - mean) * inv);
            }
        }
        drop(data);
        let saved_y = out.clone();
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let mut gx = g.clone();
                for ((grow, yrow), &inv) in gx
                    .data_mut()
                    .chunks_mut(lane)
                    .zip(saved_y.data().chunks(lane))
                    .zip(&inv_std)
                {
                    let m1 = grow.iter().map(|v| v.to_f64()).sum::<f64>() / lane as f64;
                    let m2 = grow
                        .iter()
                        .zip(yrow)
                        .map(|(gv, yv)| gv.to_f64() * yv.to_f64())
                        .sum::<f64>()
                        / lane as f64;
                    for (gv, yv) in grow.iter_mut().zip(yrow) {
                        *gv = S::from_f64(inv * (gv.to_f64() - m1 - yv.to_f64() * m2));
                    }
                }
                vec![gx]
            }),
        )
    }

    /// GELU, tanh form; the backward uses the exact derivative of this
    /// form. Computed in working precision (native tanh).
    pub fn gelu(&self) -> Tensor<S> {
        let c = S::from_f64(0.797_884_560_802_865_4); // sqrt(2/pi)
        let a = S::from_f64(0.044_715);
        let half = S::from_f64(0.5);
        let three = S::from_f64(3.0);
        let saved = self.data().clone();
        let out = saved.map(|x| {
            let t = (c * (x + a * x * x * x)).tanh();
            half * x * (S::ONE + t)
        });
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let gx = g
                    .zip(&saved, |gv, x| {
                        let t = (c * (x + a * x * x * x)).tanh();
                        let du = c * (S::ONE + three * a * x * x);
                        let d = half * (S::ONE + t) + half * x * (S::ONE - t * t) * du;
                        gv * d
                    })
                    .expect("same shape");
                vec![gx]
            }),
        )
    }

    /// SiLU: `x * sigmoid(x)`, in working precision.
    pub fn silu(&self) -> Tensor<S> {
        let saved = self.data().clone();
        let out = saved.map(|x| x * sigmoid(x));
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let gx = g
                    .zip(&saved, |gv, x| {
                        let s = sigmoid(x);
                        gv * (s * (S::ONE + x * (S::ONE - s)))
                    })
                    .expect("same shape");
                vec![gx]
            }),
        )
    }

    // ---- embedding, dropout, loss -------------------------------------------

    /// Row lookup into `self` (`[vocab, dim]`): output is `prefix ++ [dim]`.
    pub fn embedding_lookup(
        &self,
        ids: &[u32],
        prefix: &[usize],
    ) -> Result<Tensor<S>, TensorError> {
        let table = self.data();
        let table_shape = table.shape().to_vec();
        if table_shape.len() != 2 {
            return Err(TensorError::shape("embedding table", &[0, 0], &table_shape));
        }
        let (vocab, dim) = (table_shape[0], table_shape[1]);
        let expect: usize = prefix.iter().product();
        if ids.len() != expect {
            return Err(TensorError::shape("embedding ids", &[expect], &[ids.len()]));
        }
        let mut out_shape = prefix.to_vec();
        out_shape.push(dim);
        let mut data = Vec::with_capacity(ids.len() * dim);
        for &id in ids {
            let id = id as usize;
            if id >= vocab {
                return Err(TensorError::shape("embedding id", &[vocab], &[id]));
            }
            data.extend_from_slice(&table.data()[id * dim..(id + 1) * dim]);
        }
        drop(table);
        let out = NdArray::new(out_shape, data)?;
        let ids: Vec<u32> = ids.to_vec();
        Ok(Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let mut acc = vec![0.0f64; vocab * dim];
                for (row, &id) in g.data().chunks(dim).zip(&ids) {
                    let base = id as usize * dim;
                    for (j, v) in row.iter().enumerate() {
                        acc[base + j] += v.to_f64();
                    }
                }
                vec![
                    NdArray::new(vec![vocab, dim], acc.into_iter().map(S::from_f64).collect())
                        .unwrap(),
                ]
            }),
        ))
    }

    /// Inverted dropout: survivors scale by `1/(1-p)`; identity when not
    /// training. The mask depends only on `key` and the element index.
    pub fn dropout(&self, p: f64, training: bool, key: u64) -> Tensor<S> {
        assert!((0.0..1.0).contains(&p), "dropout p must be in [0, 1)");
        if !training || p == 0.0 {
            return self.clone();
        }
        let scale = S::from_f64(1.0 / (1.0 - p));
        let shape = self.shape();
        let mask_data: Vec<S> = (0..self.numel() as u64)
            .map(|i| {
                if counter_uniform(key, i) >= p {
                    scale
                } else {
                    S::ZERO
                }
            })
            .collect();
        let mask = NdArray::new(shape, mask_data).expect("mask matches input shape");
        let out = self.data().zip(&mask, |a, m| a * m).expect("same shape");
        let saved = mask;
        Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| vec![g.zip(&saved, |gv, m| gv * m).expect("same shape")]),
        )
    }

    /// Mean categorical cross-entropy over rows whose label is not
    /// [`IGNORE_INDEX`]. `self` is `[rows, vocab]` logits.
    pub fn masked_cross_entropy(&self, labels: &[i64]) -> Result<Tensor<S>, TensorError> {
        let data = self.data();
        let shape = data.shape().to_vec();
        if shape.len() != 2 || labels.len() != shape[0] {
            return Err(TensorError::shape(
                "masked_cross_entropy",
                &[labels.len(), 0],
                &shape,
            ));
        }
        let (rows, vocab) = (shape[0], shape[1]);
        let count = labels.iter().filter(|&&l| l != IGNORE_INDEX).count();
        if count == 0 {
            return Err(TensorError::EmptyReduction(
                "no labeled positions in batch".to_string(),
            ));
        }
        // softmax rows are saved for the backward pass; ignored rows stay 0
        let mut probs = NdArray::zeros(&[rows, vocab]);
        let mut total = 0.0f64;
        for (r, &label) in labels.iter().enumerate() {
            if label == IGNORE_INDEX {
                continue;
            }
            let label = label as usize;
            if label >= vocab {
                return Err(TensorError::shape("label id", &[vocab], &[label]));
            }
            let row = &data.data()[r * vocab..(r + 1) * vocab];
            let mut max = row[0];
            for &v in row {
                max = max.maximum(v);
            }
            let mut sum = 0.0f64;
            for &v in row {
                sum += (v - max).to_f64().exp();
            }
            let lse = max.to_f64() + sum.ln();
            total += lse - row[label].to_f64();
            let dst = &mut probs.data_mut()[r * vocab..(r + 1) * vocab];
            for (j, &v) in row.iter().enumerate() {
                dst[j] = S::from_f64(((v - max).to_f64().exp()) / sum);
            }
        }
        drop(data);
        let out = NdArray::scalar(S::from_f64(total / count as f64));
        let labels: Vec<i64> = labels.to_vec();
        Ok(Tensor::make(
            out,
            vec![self.clone()],
            Box::new(move |g| {
                let scale = g.item().to_f64() / count as f64;
                let mut gx = NdArray::zeros(&[rows, vocab]);
                for (r, &label) in labels.iter().enumerate() {
                    if label == IGNORE_INDEX {
                        continue;
                    }
                    let src = &probs.data()[r * vocab..(r + 1) * vocab];
                    let dst = &mut gx.data_mut()[r * vocab..(r + 1) * vocab];
                    for j in 0..vocab {
                        let onehot = if j == label as usize { 1.0 } else { 0.0 };
                        dst[j] = S::from_f64((src[j].to_f64() - onehot) * scale);
                    }
                }
                vec![gx]
            }),
        ))
    }
}

fn sigmoid<S: Scalar>(x: S) -> S {
    S::ONE / (S::ONE + (-x).exp())
}

fn accumulate<S: Scalar>(t: &Tensor<S>, g: &NdArray<S>) {
    let mut n = t.node.borrow_mut();
    debug_assert_eq!(n.data.shape(), g.shape(), "gradient shape mismatch");
    match &mut n.grad {
        Some(existing) => {
            for (e, v) in existing.data_mut().iter_mut().zip(g.data()) {
                *e = *e + *v;
            }
        }
        None => n.grad = Some(g.clone()),
    }
}
