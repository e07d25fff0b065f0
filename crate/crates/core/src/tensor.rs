//! Dense order-N tensors and the multilinear primitives built on them.
//!
//! Storage is row-major (last index fastest). The mode-n unfolding is defined
//! independently of storage: element `(i_1, .., i_N)` lands in row `i_n` and
//! column `sum_{k != n} i_k * prod_{m < k, m != n} I_m`, i.e. earlier modes
//! vary fastest along the columns. With this convention
//!
//! ```text
//! unfold(G x_1 U1 .. x_N UN, n) = Un * unfold(G, n) * kron(UN, .., Un+1, Un-1, .., U1)^T
//! ```

use std::fmt;

use crate::error::{shape_err, Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(shape_err("tensor order must be at least 1"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(shape_err(format!("tensor dims must be positive, got {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(shape_err(format!(
                "dims {dims:?} need {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Self::new(dims.to_vec(), vec![0.0; len]).expect("positive dims")
    }

    /// Builds a tensor from a function of the multi-index.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        let mut idx = vec![0usize; dims.len()];
        for v in t.data.iter_mut() {
            *v = f(&idx);
            increment(&mut idx, dims);
        }
        t
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            dims: vec![m.rows(), m.cols()],
            data: m.data().to_vec(),
        }
    }

    pub fn from_vector(v: &[f64]) -> Result<Self> {
        Self::new(vec![v.len()], v.to_vec())
    }

    /// Interprets an order-2 tensor as a matrix.
    pub fn to_matrix(&self) -> Result<Matrix> {
        if self.dims.len() != 2 {
            return Err(shape_err(format!(
                "expected an order-2 tensor, got dims {:?}",
                self.dims
            )));
        }
        Matrix::new(self.dims[0], self.dims[1], self.data.clone())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseTensor {
        DenseTensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    fn zip_map(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        if self.dims != other.dims {
            return Err(shape_err(format!(
                "dims differ: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(DenseTensor {
            dims: self.dims.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    /// Sub-tensor with the last mode fixed at `k` (order drops by one).
    pub fn last_mode_slice(&self, k: usize) -> Result<DenseTensor> {
        let n = self.order();
        if n < 2 {
            return Err(shape_err("cannot slice an order-1 tensor"));
        }
        let last = self.dims[n - 1];
        if k >= last {
            return Err(Error::InvalidArgument(format!("slice {k} out of range {last}")));
        }
        let dims = self.dims[..n - 1].to_vec();
        let data = self.data.iter().skip(k).step_by(last).copied().collect();
        DenseTensor::new(dims, data)
    }

    /// Sub-tensor with the first mode restricted to `rows`.
    pub fn select_first_mode(&self, rows: &[usize]) -> Result<DenseTensor> {
        let stride: usize = self.dims[1..].iter().product();
        let mut data = Vec::with_capacity(rows.len() * stride);
        for &r in rows {
            if r >= self.dims[0] {
                return Err(Error::InvalidArgument(format!("row {r} out of range")));
            }
            data.extend_from_slice(&self.data[r * stride..(r + 1) * stride]);
        }
        let mut dims = self.dims.clone();
        dims[0] = rows.len();
        DenseTensor::new(dims, data)
    }

    /// Stacks equally shaped tensors along a new trailing mode.
    pub fn stack_last(items: &[DenseTensor]) -> Result<DenseTensor> {
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to stack".into()))?;
        if items.iter().any(|t| t.dims != first.dims) {
            return Err(shape_err("stack: tensors have different dims"));
        }
        let k = items.len();
        let mut dims = first.dims.clone();
        dims.push(k);
        let mut data = vec![0.0; first.len() * k];
        for (s, t) in items.iter().enumerate() {
            for (i, &v) in t.data.iter().enumerate() {
                data[i * k + s] = v;
            }
        }
        DenseTensor::new(dims, data)
    }
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseTensor {:?} {:?}", self.dims, self.data)
    }
}

fn increment(idx: &mut [usize], dims: &[usize]) {
    for k in (0..dims.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

fn check_mode(t: &DenseTensor, mode: usize) -> Result<()> {
    if mode >= t.order() {
        return Err(Error::InvalidMode {
            mode,
            order: t.order(),
        });
    }
    Ok(())
}

/// For a block of modes stored row-major, maps each row-major linear index to
/// the corresponding first-index-fastest linear index.
fn colmajor_positions(dims: &[usize]) -> Vec<usize> {
    let len: usize = dims.iter().product();
    let mut strides = vec![1usize; dims.len()];
    for k in 1..dims.len() {
        strides[k] = strides[k - 1] * dims[k - 1];
    }
    let mut idx = vec![0usize; dims.len()];
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(idx.iter().zip(&strides).map(|(i, s)| i * s).sum());
        increment(&mut idx, dims);
    }
    out
}

/// Mode-`mode` matricization, shape `I_mode x prod_{k != mode} I_k`.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<Matrix> {
    check_mode(t, mode)?;
    let dims = t.dims();
    let rows = dims[mode];
    let before = &dims[..mode];
    let after = &dims[mode + 1..];
    let outer: usize = before.iter().product();
    let inner: usize = after.iter().product();
    let cols = outer * inner;
    let pos_before = colmajor_positions(before);
    let pos_after = colmajor_positions(after);
    let mut out = vec![0.0; rows * cols];
    let src = t.data();
    for o in 0..outer {
        let cb = pos_before[o];
        for i in 0..rows {
            let base = (o * rows + i) * inner;
            let orow = &mut out[i * cols..(i + 1) * cols];
            for r in 0..inner {
                orow[cb + outer * pos_after[r]] = src[base + r];
            }
        }
    }
    Matrix::new(rows, cols, out)
}

/// Inverse of [`unfold`].
pub fn fold(m: &Matrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    if mode >= dims.len() {
        return Err(Error::InvalidMode {
            mode,
            order: dims.len(),
        });
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(shape_err(format!("dims must be positive, got {dims:?}")));
    }
    let rows = dims[mode];
    let before = &dims[..mode];
    let after = &dims[mode + 1..];
    let outer: usize = before.iter().product();
    let inner: usize = after.iter().product();
    if m.rows() != rows || m.cols() != outer * inner {
        return Err(shape_err(format!(
            "cannot fold {}x{} into dims {dims:?} along mode {mode}",
            m.rows(),
            m.cols()
        )));
    }
    let cols = m.cols();
    let pos_before = colmajor_positions(before);
    let pos_after = colmajor_positions(after);
    let mut data = vec![0.0; rows * cols];
    let src = m.data();
    for o in 0..outer {
        let cb = pos_before[o];
        for i in 0..rows {
            let base = (o * rows + i) * inner;
            let srow = &src[i * cols..(i + 1) * cols];
            for r in 0..inner {
                data[base + r] = srow[cb + outer * pos_after[r]];
            }
        }
    }
    DenseTensor::new(dims.to_vec(), data)
}

/// `t x_mode u`: contracts mode `mode` of `t` with the columns of `u`.
pub fn mode_product(t: &DenseTensor, u: &Matrix, mode: usize) -> Result<DenseTensor> {
    check_mode(t, mode)?;
    let dims = t.dims();
    if u.cols() != dims[mode] {
        return Err(shape_err(format!(
            "mode-{mode} product: matrix has {} columns, tensor dim is {}",
            u.cols(),
            dims[mode]
        )));
    }
    let outer: usize = dims[..mode].iter().product();
    let inner: usize = dims[mode + 1..].iter().product();
    let (nr, nc) = (u.rows(), u.cols());
    let mut new_dims = dims.to_vec();
    new_dims[mode] = nr;
    let mut out = vec![0.0; outer * nr * inner];
    let src = t.data();
    for o in 0..outer {
        for i in 0..nr {
            let dst = &mut out[(o * nr + i) * inner..(o * nr + i + 1) * inner];
            for j in 0..nc {
                let w = u.get(i, j);
                if w == 0.0 {
                    continue;
                }
                let s = &src[(o * nc + j) * inner..(o * nc + j + 1) * inner];
                for (d, &v) in dst.iter_mut().zip(s) {
                    *d += w * v;
                }
            }
        }
    }
    DenseTensor::new(new_dims, out)
}

/// Applies several mode products in sequence; at most one matrix per mode.
pub fn multi_mode_product(t: &DenseTensor, factors: &[(&Matrix, usize)]) -> Result<DenseTensor> {
    let mut seen = vec![false; t.order()];
    for &(_, mode) in factors {
        check_mode(t, mode)?;
        if seen[mode] {
            return Err(Error::InvalidArgument(format!("mode {mode} given twice")));
        }
        seen[mode] = true;
    }
    let mut out = t.clone();
    for &(u, mode) in factors {
        out = mode_product(&out, u, mode)?;
    }
    Ok(out)
}

/// `t x_1 U1 x_2 U2 .. x_N UN` with one matrix per mode.
pub fn product_all(t: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    if factors.len() != t.order() {
        return Err(shape_err(format!(
            "need {} factors, got {}",
            t.order(),
            factors.len()
        )));
    }
    let pairs: Vec<(&Matrix, usize)> = factors.iter().zip(0..).collect();
    multi_mode_product(t, &pairs)
}

/// `t x_1 U1^T .. x_N UN^T`, the projection onto orthonormal bases.
pub fn project_all_transposed(t: &DenseTensor, factors: &[Matrix]) -> Result<DenseTensor> {
    let transposed: Vec<Matrix> = factors.iter().map(Matrix::transpose).collect();
    product_all(t, &transposed)
}

/// Outer product of two or more vectors.
pub fn outer_product(vectors: &[Vec<f64>]) -> Result<DenseTensor> {
    if vectors.len() < 2 {
        return Err(Error::InvalidArgument(
            "outer product needs at least two vectors".into(),
        ));
    }
    if vectors.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("outer product of an empty vector".into()));
    }
    let dims: Vec<usize> = vectors.iter().map(Vec::len).collect();
    Ok(DenseTensor::from_fn(&dims, |idx| {
        idx.iter().zip(vectors).map(|(&i, v)| v[i]).product()
    }))
}

pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (br, bc) = b.shape();
    Matrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a.get(i / br, j / bc) * b.get(i % br, j % bc)
    })
}

/// Column-wise Kronecker product; `a` and `b` must have equal column counts.
pub fn khatri_rao(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(shape_err("khatri-rao: column counts differ"));
    }
    let br = b.rows();
    Ok(Matrix::from_fn(a.rows() * br, a.cols(), |i, j| {
        a.get(i / br, j) * b.get(i % br, j)
    }))
}

pub fn frobenius_norm(t: &DenseTensor) -> f64 {
    t.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub use crate::linalg::pseudo_inverse;
