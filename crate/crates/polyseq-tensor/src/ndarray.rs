//! Dense row-major n-dimensional array. All the raw math lives here; the
//! autodiff layer in [`crate::tensor`] wraps these routines and records how
//! to run them backwards.

use crate::error::TensorError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct NdArray<S> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> NdArray<S> {
    pub fn new(shape: Vec<usize>, data: Vec<S>) -> Result<Self, TensorError> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(TensorError::shape("NdArray::new", &[data.len()], &shape));
        }
        Ok(NdArray { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let numel = shape.iter().product();
        NdArray {
            shape: shape.to_vec(),
            data: vec![S::ZERO; numel],
        }
    }

    pub fn full(shape: &[usize], value: S) -> Self {
        let numel = shape.iter().product();
        NdArray {
            shape: shape.to_vec(),
            data: vec![value; numel],
        }
    }

    /// Rank-0 array holding one value.
    pub fn scalar(value: S) -> Self {
        NdArray {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    pub fn from_vec(data: Vec<S>) -> Self {
        NdArray {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    /// The single value of a rank-0 or one-element array.
    pub fn item(&self) -> S {
        debug_assert_eq!(self.numel(), 1);
        self.data[0]
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.shape.len()];
        for i in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.shape[i + 1];
        }
        strides
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> NdArray<S> {
        NdArray {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(
        &self,
        other: &NdArray<S>,
        f: impl Fn(S, S) -> S,
    ) -> Result<NdArray<S>, TensorError> {
        if self.shape != other.shape {
            return Err(TensorError::shape("zip", &self.shape, &other.shape));
        }
        Ok(NdArray {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    // ---- broadcasting -------------------------------------------------

    /// Shape both operands broadcast to (right-aligned; dims equal or 1).
    pub fn broadcast_shape(a: &[usize], b: &[usize]) -> Result<Vec<usize>, TensorError> {
        let rank = a.len().max(b.len());
        let mut out = vec![0usize; rank];
        for i in 0..rank {
            let da = if i < rank - a.len() {
                1
            } else {
                a[i - (rank - a.len())]
            };
            let db = if i < rank - b.len() {
                1
            } else {
                b[i - (rank - b.len())]
            };
            out[i] = match (da, db) {
                (x, y) if x == y => x,
                (1, y) => y,
                (x, 1) => x,
                _ => return Err(TensorError::shape("broadcast", a, b)),
            };
        }
        Ok(out)
    }

    /// Strides for reading an array of `shape` as if it were `out_shape`
    /// (0 on broadcast axes).
    fn broadcast_strides(shape: &[usize], out_shape: &[usize]) -> Vec<usize> {
        let offset = out_shape.len() - shape.len();
        let base = {
            let mut s = vec![1usize; shape.len()];
            for i in (0..shape.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * shape[i + 1];
            }
            s
        };
        let mut out = vec![0usize; out_shape.len()];
        for i in 0..shape.len() {
            out[offset + i] = if shape[i] == 1 { 0 } else { base[i] };
        }
        out
    }

    /// True when `short` equals the trailing dims of `long` (the bias-add
    /// pattern), so broadcasting is a plain chunked zip.
    fn is_suffix(long: &[usize], short: &[usize]) -> bool {
        short.len() <= long.len() && long[long.len() - short.len()..] == *short
    }

    pub fn zip_broadcast(
        &self,
        other: &NdArray<S>,
        f: impl Fn(S, S) -> S,
    ) -> Result<NdArray<S>, TensorError> {
        if self.shape == other.shape {
            return self.zip(other, f);
        }
        // fast path: [.., d...] op [d...]
        if Self::is_suffix(&self.shape, &other.shape) && other.numel() > 0 {
            let lane = other.numel();
            let mut data = Vec::with_capacity(self.numel());
            for chunk in self.data.chunks(lane) {
                data.extend(chunk.iter().zip(&other.data).map(|(&a, &b)| f(a, b)));
            }
            return Ok(NdArray {
                shape: self.shape.clone(),
                data,
            });
        }
        if Self::is_suffix(&other.shape, &self.shape) && self.numel() > 0 {
            let lane = self.numel();
            let mut data = Vec::with_capacity(other.numel());
            for chunk in other.data.chunks(lane) {
                data.extend(self.data.iter().zip(chunk).map(|(&a, &b)| f(a, b)));
            }
            return Ok(NdArray {
                shape: other.shape.clone(),
                data,
            });
        }
        let out_shape = Self::broadcast_shape(&self.shape, &other.shape)?;
        let sa = Self::broadcast_strides(&self.shape, &out_shape);
        let sb = Self::broadcast_strides(&other.shape, &out_shape);
        let numel: usize = out_shape.iter().product();
        let mut data = Vec::with_capacity(numel);
        let mut idx = vec![0usize; out_shape.len()];
        let (mut off_a, mut off_b) = (0usize, 0usize);
        for _ in 0..numel {
            data.push(f(self.data[off_a], other.data[off_b]));
            // odometer increment
            for d in (0..out_shape.len()).rev() {
                idx[d] += 1;
                off_a += sa[d];
                off_b += sb[d];
                if idx[d] < out_shape[d] {
                    break;
                }
                idx[d] = 0;
                off_a -= sa[d] * out_shape[d];
                off_b -= sb[d] * out_shape[d];
            }
        }
        NdArray::new(out_shape, data)
    }

    /// Sum-reduce down to `target` (right-aligned), undoing a broadcast.
    /// Accumulates in f64.
    pub fn reduce_to(&self, target: &[usize]) -> NdArray<S> {
        if self.shape == target {
            return self.clone();
        }
        if target.is_empty() {
            return NdArray::scalar(self.sum_all());
        }
        // fast path for the bias-gradient pattern: [.., d...] -> [d...]
        if Self::is_suffix(&self.shape, target) {
            let lane: usize = target.iter().product();
            let mut acc = vec![0.0f64; lane];
            for chunk in self.data.chunks(lane) {
                for (a, &v) in acc.iter_mut().zip(chunk) {
                    *a += v.to_f64();
                }
            }
            return NdArray {
                shape: target.to_vec(),
                data: acc.into_iter().map(S::from_f64).collect(),
            };
        }
        let target_numel: usize = target.iter().product();
        let mut acc = vec![0.0f64; target_numel];
        let strides = Self::broadcast_strides(target, &self.shape);
        let mut idx = vec![0usize; self.shape.len()];
        let mut off_t = 0usize;
        for i in 0..self.numel() {
            acc[off_t] += self.data[i].to_f64();
            for d in (0..self.shape.len()).rev() {
                idx[d] += 1;
                off_t += strides[d];
                if idx[d] < self.shape[d] {
                    break;
                }
                idx[d] = 0;
                off_t -= strides[d] * self.shape[d];
            }
        }
        NdArray {
            shape: target.to_vec(),
            data: acc.into_iter().map(S::from_f64).collect(),
        }
    }

    // ---- linear algebra ------------------------------------------------

    /// Batched matrix product. `self` is `[..batch, m, k]`; `rhs` is either
    /// `[k, n]` (shared across the batch) or `[..batch, k, n]`.
    pub fn matmul(&self, rhs: &NdArray<S>) -> Result<NdArray<S>, TensorError> {
        let ar = self.ndim();
        let br = rhs.ndim();
        if ar < 2 || br < 2 {
            return Err(TensorError::shape("matmul rank", &self.shape, &rhs.shape));
        }
        let (m, k) = (self.shape[ar - 2], self.shape[ar - 1]);
        let (k2, n) = (rhs.shape[br - 2], rhs.shape[br - 1]);
        let a_batch = &self.shape[..ar - 2];
        let b_batch = &rhs.shape[..br - 2];
        if k != k2 || !(b_batch.is_empty() || b_batch == a_batch) {
            return Err(TensorError::shape("matmul", &self.shape, &rhs.shape));
        }
        let batch: usize = a_batch.iter().product();
        let mut out_shape = a_batch.to_vec();
        out_shape.push(m);
        out_shape.push(n);
        let mut out = Vec::with_capacity(batch * m * n);
        let shared_rhs = b_batch.is_empty();
        let mut row_acc = vec![0.0f64; n];
        for bi in 0..batch {
            let a_off = bi * m * k;
            let b_off = if shared_rhs { 0 } else { bi * k * n };
            for i in 0..m {
                let a_row = &self.data[a_off + i * k..a_off + (i + 1) * k];
                row_acc.fill(0.0);
                for (kk, &a_val) in a_row.iter().enumerate() {
                    let a_val = a_val.to_f64();
                    let b_row = &rhs.data[b_off + kk * n..b_off + kk * n + n];
                    for (acc, &bv) in row_acc.iter_mut().zip(b_row) {
                        *acc += a_val * bv.to_f64();
                    }
                }
                out.extend(row_acc.iter().map(|&v| S::from_f64(v)));
            }
        }
        NdArray::new(out_shape, out)
    }

    /// Swap the last two axes.
    pub fn transpose_last2(&self) -> NdArray<S> {
        let r = self.ndim();
        assert!(r >= 2);
        let mut axes: Vec<usize> = (0..r).collect();
        axes.swap(r - 2, r - 1);
        self.permute(&axes)
    }

    /// General axis permutation: output axis `i` is input axis `axes[i]`.
    pub fn permute(&self, axes: &[usize]) -> NdArray<S> {
        assert_eq!(axes.len(), self.ndim());
        let in_strides = self.strides();
        let out_shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let numel = self.numel();
        let mut data = Vec::with_capacity(numel);
        let mut idx = vec![0usize; out_shape.len()];
        let mut in_off = 0usize;
        let mapped: Vec<usize> = axes.iter().map(|&a| in_strides[a]).collect();
        for _ in 0..numel {
            data.push(self.data[in_off]);
            for d in (0..out_shape.len()).rev() {
                idx[d] += 1;
                in_off += mapped[d];
                if idx[d] < out_shape[d] {
                    break;
                }
                idx[d] = 0;
                in_off -= mapped[d] * out_shape[d];
            }
        }
        NdArray {
            shape: out_shape,
            data,
        }
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<NdArray<S>, TensorError> {
        let numel: usize = shape.iter().product();
        if numel != self.numel() {
            return Err(TensorError::shape("reshape", shape, &self.shape));
        }
        Ok(NdArray {
            shape: shape.to_vec(),
            data: self.data.clone(),
        })
    }

    /// Concatenate along `axis`; shapes must agree elsewhere.
    pub fn concat(parts: &[&NdArray<S>], axis: usize) -> Result<NdArray<S>, TensorError> {
        let first = parts
            .first()
            .ok_or_else(|| TensorError::EmptyReduction("concat of zero arrays".to_string()))?;
        let rank = first.ndim();
        let mut axis_total = 0usize;
        for p in parts {
            if p.ndim() != rank {
                return Err(TensorError::shape("concat rank", &first.shape, &p.shape));
            }
            for d in 0..rank {
                if d != axis && p.shape[d] != first.shape[d] {
                    return Err(TensorError::shape("concat", &first.shape, &p.shape));
                }
            }
            axis_total += p.shape[axis];
        }
        let mut out_shape = first.shape.clone();
        out_shape[axis] = axis_total;
        let outer: usize = first.shape[..axis].iter().product();
        let inner: usize = first.shape[axis + 1..].iter().product();
        let mut data = Vec::with_capacity(outer * axis_total * inner);
        for o in 0..outer {
            for p in parts {
                let rows = p.shape[axis];
                let start = o * rows * inner;
                data.extend_from_slice(&p.data[start..start + rows * inner]);
            }
        }
        NdArray::new(out_shape, data)
    }

    /// Contiguous slice `start..start+len` along `axis`.
    pub fn narrow(&self, axis: usize, start: usize, len: usize) -> NdArray<S> {
        assert!(axis < self.ndim() && start + len <= self.shape[axis]);
        let outer: usize = self.shape[..axis].iter().product();
        let axis_len = self.shape[axis];
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut data = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let begin = (o * axis_len + start) * inner;
            data.extend_from_slice(&self.data[begin..begin + len * inner]);
        }
        let mut shape = self.shape.clone();
        shape[axis] = len;
        NdArray { shape, data }
    }

    /// Pick index `idx` along `axis` and drop that axis.
    pub fn select(&self, axis: usize, idx: usize) -> NdArray<S> {
        assert!(axis < self.ndim() && idx < self.shape[axis]);
        let outer: usize = self.shape[..axis].iter().product();
        let axis_len = self.shape[axis];
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut data = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let start = (o * axis_len + idx) * inner;
            data.extend_from_slice(&self.data[start..start + inner]);
        }
        let mut shape = self.shape.clone();
        shape.remove(axis);
        NdArray { shape, data }
    }

    /// Inverse of [`select`]: embed `self` as slab `idx` of `axis` in a
    /// zero array of `full_shape`.
    pub fn scatter_select(&self, axis: usize, idx: usize, full_shape: &[usize]) -> NdArray<S> {
        let mut out = NdArray::zeros(full_shape);
        let outer: usize = full_shape[..axis].iter().product();
        let axis_len = full_shape[axis];
        let inner: usize = full_shape[axis + 1..].iter().product();
        for o in 0..outer {
            let dst = (o * axis_len + idx) * inner;
            let src = o * inner;
            out.data[dst..dst + inner].copy_from_slice(&self.data[src..src + inner]);
        }
        out
    }

    pub fn sum_all(&self) -> S {
        let mut acc = 0.0f64;
        for &v in &self.data {
            acc += v.to_f64();
        }
        S::from_f64(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arr(shape: &[usize], vals: &[f64]) -> NdArray<f64> {
        NdArray::new(shape.to_vec(), vals.to_vec()).unwrap()
    }

    #[test]
    fn matmul_2d() {
        let a = arr(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = arr(&[3, 2], &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.shape(), &[2, 2]);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn matmul_batched_with_shared_rhs() {
        let a = arr(&[2, 1, 2], &[1.0, 0.0, 0.0, 1.0]);
        let w = arr(&[2, 2], &[1.0, 2.0, 3.0, 4.0]);
        let c = a.matmul(&w).unwrap();
        assert_eq!(c.shape(), &[2, 1, 2]);
        assert_eq!(c.data(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn matmul_shape_error() {
        let a = arr(&[2, 3], &[0.0; 6]);
        let b = arr(&[2, 2], &[0.0; 4]);
        assert!(matches!(a.matmul(&b), Err(TensorError::Shape { .. })));
    }

    #[test]
    fn broadcast_add_bias() {
        let x = arr(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let bias = arr(&[3], &[10.0, 20.0, 30.0]);
        let y = x.zip_broadcast(&bias, |a, b| a + b).unwrap();
        assert_eq!(y.data(), &[11.0, 22.0, 33.0, 14.0, 25.0, 36.0]);
    }

    #[test]
    fn reduce_to_undoes_broadcast() {
        let g = arr(&[2, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = g.reduce_to(&[3]);
        assert_eq!(r.data(), &[5.0, 7.0, 9.0]);
        let r0 = g.reduce_to(&[]);
        assert_eq!(r0.item(), 21.0);
    }

    #[test]
    fn permute_roundtrip() {
        let x = arr(&[2, 3, 4], &(0..24).map(|v| v as f64).collect::<Vec<_>>());
        let p = x.permute(&[2, 0, 1]);
        assert_eq!(p.shape(), &[4, 2, 3]);
        let back = p.permute(&[1, 2, 0]);
        assert_eq!(back, x);
    }

    #[test]
    fn concat_and_select() {
        let a = arr(&[1, 2], &[1.0, 2.0]);
        let b = arr(&[2, 2], &[3.0, 4.0, 5.0, 6.0]);
        let c = NdArray::concat(&[&a, &b], 0).unwrap();
        assert_eq!(c.shape(), &[3, 2]);
        assert_eq!(c.select(0, 1).data(), &[3.0, 4.0]);
        let back = c.select(0, 2).scatter_select(0, 2, &[3, 2]);
        assert_eq!(back.data(), &[0.0, 0.0, 0.0, 0.0, 5.0, 6.0]);
    }
}
