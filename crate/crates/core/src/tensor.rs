//! Dense N-way tensors and the multilinear algebra built on them.
//!
//! Values are stored flat with the **first index varying fastest**: the entry at
//! `(i_1, ..., i_N)` lives at `i_1 + I_1 * (i_2 + I_2 * (i_3 + ...))`. Every unfolding,
//! fold and file format in this crate uses that order.
//!
//! The mode-`k` unfolding is the `I_k x prod_{n != k} I_n` matrix whose column index
//! enumerates the remaining modes in the same first-fastest order.

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{Error, Result};

/// Dimensions `(I_1, ..., I_N)` of a tensor. Every dimension is at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() {
            return Err(Error::InvalidShape {
                dims,
                reason: "a tensor needs at least one mode",
            });
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape {
                dims,
                reason: "every dimension must be at least 1",
            });
        }
        let Some(len) = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)) else {
            return Err(Error::InvalidShape {
                dims,
                reason: "element count overflows",
            });
        };
        Ok(Shape { dims, len })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Number of elements, `prod I_n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(prod of dims before mode, dims[mode], prod of dims after mode)`.
    pub fn split(&self, mode: usize) -> (usize, usize, usize) {
        let left = self.dims[..mode].iter().product();
        let right = self.dims[mode + 1..].iter().product();
        (left, self.dims[mode], right)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.order() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            })
        }
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order());
        index.iter().zip(&self.dims).rev().fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let i = linear % d;
                linear /= d;
                i
            })
            .collect()
    }

    /// Same shape with every singleton mode removed (a single `1` if all are singleton).
    pub fn squeezed(&self) -> Shape {
        let dims: Vec<usize> = self.dims.iter().copied().filter(|&d| d > 1).collect();
        let dims = if dims.is_empty() { vec![1] } else { dims };
        Shape {
            dims,
            len: self.len,
        }
    }

    fn with_dim(&self, mode: usize, dim: usize) -> Result<Shape> {
        let mut dims = self.dims.clone();
        dims[mode] = dim;
        Shape::new(dims)
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Real-valued N-way array.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Builds a tensor from flat values in first-index-fastest order. Rejects
    /// wrong lengths and non-finite values.
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values supplied for shape {shape}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor values"));
        }
        Ok(DenseTensor { shape, data })
    }

    pub(crate) fn from_raw(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        DenseTensor { shape, data }
    }

    pub fn zeros(shape: Shape) -> Self {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: Shape, value: f64) -> Self {
        let data = vec![value; shape.len()];
        DenseTensor { shape, data }
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut index = vec![0usize; shape.order()];
        let mut data = Vec::with_capacity(shape.len());
        for _ in 0..shape.len() {
            data.push(f(&index));
            for (i, &d) in index.iter_mut().zip(shape.dims()) {
                *i += 1;
                if *i < d {
                    break;
                }
                *i = 0;
            }
        }
        DenseTensor { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.shape.linear_index(index)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Drops singleton modes. The values are untouched.
    pub fn squeeze(&self) -> DenseTensor {
        DenseTensor {
            shape: self.shape.squeezed(),
            data: self.data.clone(),
        }
    }

    /// Same values under a different shape with the same element count.
    pub fn reshape(self, shape: Shape) -> Result<DenseTensor> {
        if shape.len() != self.data.len() {
            return Err(Error::ShapeMismatch {
                left: self.dims().to_vec(),
                right: shape.dims().to_vec(),
            });
        }
        Ok(DenseTensor {
            shape,
            data: self.data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination of two same-shape tensors.
    pub fn zip_with(
        &self,
        other: &DenseTensor,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseTensor> {
        ensure_same_shape(&self.shape, &other.shape)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a - b)
    }
}

/// Observation indicator: `true` where an entry is observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskTensor {
    shape: Shape,
    flags: Vec<bool>,
}

impl MaskTensor {
    pub fn new(shape: Shape, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} flags supplied for shape {shape}",
                flags.len()
            )));
        }
        Ok(MaskTensor { shape, flags })
    }

    pub fn all_observed(shape: Shape) -> Self {
        let flags = vec![true; shape.len()];
        MaskTensor { shape, flags }
    }

    pub fn all_missing(shape: Shape) -> Self {
        let flags = vec![false; shape.len()];
        MaskTensor { shape, flags }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> bool) -> Self {
        let t = DenseTensor::from_fn(shape, |i| if f(i) { 1.0 } else { 0.0 });
        MaskTensor {
            flags: t.data.iter().map(|&v| v != 0.0).collect(),
            shape: t.shape,
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.flags
    }

    pub fn get(&self, index: &[usize]) -> bool {
        self.flags[self.shape.linear_index(index)]
    }

    pub fn observed_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn missing_fraction(&self) -> f64 {
        1.0 - self.observed_count() as f64 / self.flags.len() as f64
    }

    /// The complement `1 - Q`.
    pub fn complement(&self) -> MaskTensor {
        MaskTensor {
            shape: self.shape.clone(),
            flags: self.flags.iter().map(|f| !f).collect(),
        }
    }

    /// 0/1 promotion.
    pub fn to_dense(&self) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.flags.iter().map(|&f| f as u8 as f64).collect(),
        }
    }
}

pub(crate) fn ensure_same_shape(a: &Shape, b: &Shape) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left: a.dims().to_vec(),
            right: b.dims().to_vec(),
        })
    }
}

pub fn frobenius_norm(t: &DenseTensor) -> f64 {
    squared_norm(t).sqrt()
}

pub(crate) fn squared_norm(t: &DenseTensor) -> f64 {
    t.data.iter().map(|v| v * v).sum()
}

/// Elementwise product of two same-shape tensors.
pub fn hadamard(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    a.zip_with(b, |x, y| x * y)
}

/// `Q ⊛ T`: observed entries of `t`, zero elsewhere.
pub fn masked(q: &MaskTensor, t: &DenseTensor) -> Result<DenseTensor> {
    ensure_same_shape(&q.shape, &t.shape)?;
    Ok(DenseTensor {
        shape: t.shape.clone(),
        data: t
            .data
            .iter()
            .zip(&q.flags)
            .map(|(&v, &f)| if f { v } else { 0.0 })
            .collect(),
    })
}

/// Mode-`mode` unfolding (matricization), see the module docs for column order.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<DMatrix<f64>> {
    t.shape.check_mode(mode)?;
    let (left, mid, right) = t.shape.split(mode);
    let cols = left * right;
    Ok(DMatrix::from_fn(mid, cols, |i, c| {
        let (l, r) = (c % left, c / left);
        t.data[l + left * (i + mid * r)]
    }))
}

/// Inverse of [`unfold`] for a tensor of shape `target`.
pub fn fold(m: &DMatrix<f64>, mode: usize, target: &Shape) -> Result<DenseTensor> {
    target.check_mode(mode)?;
    let (left, mid, right) = target.split(mode);
    if m.nrows() != mid || m.ncols() != left * right {
        return Err(Error::DimensionMismatch(format!(
            "cannot fold a {}x{} matrix along mode {mode} into {target}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut data = vec![0.0; target.len()];
    for r in 0..right {
        for i in 0..mid {
            for l in 0..left {
                data[l + left * (i + mid * r)] = m[(i, l + left * r)];
            }
        }
    }
    Ok(DenseTensor::from_raw(target.clone(), data))
}

/// `t ×_mode a`: replaces dimension `I_mode` by `a.nrows()`.
pub fn mode_multiply(t: &DenseTensor, a: &DMatrix<f64>, mode: usize) -> Result<DenseTensor> {
    t.shape.check_mode(mode)?;
    let (left, mid, right) = t.shape.split(mode);
    if a.ncols() != mid {
        return Err(Error::DimensionMismatch(format!(
            "mode-{mode} product needs {mid} columns, matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let rows = a.nrows();
    let shape = t.shape.with_dim(mode, rows)?;
    let mut out = vec![0.0; shape.len()];
    if left == 1 {
        let x = DMatrixView::from_slice(&t.data, mid, right);
        let mut o = DMatrixViewMut::from_slice(&mut out, rows, right);
        o.gemm(1.0, a, &x, 0.0);
    } else {
        // each slab is a column-major left x mid block; out slab = slab * a^T
        let at = a.transpose();
        for (xs, os) in t
            .data
            .chunks_exact(left * mid)
            .zip(out.chunks_exact_mut(left * rows))
        {
            let x = DMatrixView::from_slice(xs, left, mid);
            let mut o = DMatrixViewMut::from_slice(os, left, rows);
            o.gemm(1.0, &x, &at, 0.0);
        }
    }
    Ok(DenseTensor::from_raw(shape, out))
}

/// `unfold(t, mode) * unfold(t, mode)^T` without materializing the unfolding.
pub(crate) fn mode_gram(t: &DenseTensor, mode: usize) -> DMatrix<f64> {
    let (left, mid, right) = t.shape.split(mode);
    let mut g = DMatrix::zeros(mid, mid);
    if left == 1 {
        let x = DMatrixView::from_slice(&t.data, mid, right);
        g.gemm(1.0, &x, &x.transpose(), 0.0);
    } else {
        for xs in t.data.chunks_exact(left * mid) {
            let x = DMatrixView::from_slice(xs, left, mid);
            g.gemm(1.0, &x.transpose(), &x, 1.0);
        }
    }
    g
}

fn check_factors(g: &DenseTensor, factors: &[DMatrix<f64>]) -> Result<()> {
    if factors.len() != g.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors supplied for an order-{} tensor",
            factors.len(),
            g.order()
        )));
    }
    for (n, (f, &d)) in factors.iter().zip(g.dims()).enumerate() {
        if f.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "factor {n} is {}x{} but mode {n} has size {d}",
                f.nrows(),
                f.ncols()
            )));
        }
    }
    Ok(())
}

fn product_over(
    g: &DenseTensor,
    factors: &[DMatrix<f64>],
    mut modes: Vec<usize>,
) -> Result<DenseTensor> {
    // shrink first, expand last: keeps intermediates small
    modes.sort_by(|&a, &b| {
        let ra = factors[a].nrows() as f64 / factors[a].ncols() as f64;
        let rb = factors[b].nrows() as f64 / factors[b].ncols() as f64;
        ra.total_cmp(&rb).then(a.cmp(&b))
    });
    let mut out = g.clone();
    for m in modes {
        out = mode_multiply(&out, &factors[m], m)?;
    }
    Ok(out)
}

/// `g ×_1 U1 ×_2 U2 ... ×_N UN`.
pub fn multilinear_product(g: &DenseTensor, factors: &[DMatrix<f64>]) -> Result<DenseTensor> {
    check_factors(g, factors)?;
    product_over(g, factors, (0..g.order()).collect())
}

/// Like [`multilinear_product`] but leaves mode `skip` untouched. The factor at
/// position `skip` is ignored.
pub fn multilinear_product_excluding(
    g: &DenseTensor,
    factors: &[DMatrix<f64>],
    skip: usize,
) -> Result<DenseTensor> {
    g.shape.check_mode(skip)?;
    if factors.len() != g.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors supplied for an order-{} tensor",
            factors.len(),
            g.order()
        )));
    }
    for (n, (f, &d)) in factors.iter().zip(g.dims()).enumerate() {
        if n != skip && f.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "factor {n} is {}x{} but mode {n} has size {d}",
                f.nrows(),
                f.ncols()
            )));
        }
    }
    product_over(g, factors, (0..g.order()).filter(|&n| n != skip).collect())
}
