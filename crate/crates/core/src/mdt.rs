//! Multi-way delay embedding (Hankelization) and its least-squares inverse.
//!
//! A length-`L` signal embedded with window `tau` becomes the `tau x (L - tau + 1)`
//! Hankel matrix `H[a, b] = v[a + b]`. The tensor transform applies this along
//! every mode and interleaves the new modes as `(tau_1, I_1 - tau_1 + 1, tau_2, ...)`.
//!
//! Duplication matrices are never formed. The forward map copies by index
//! arithmetic and the inverse averages every duplicated copy of an element,
//! which is exactly the Moore-Penrose pseudo-inverse of the duplication.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, MaskTensor, Shape};

/// Windows and shapes of one multi-way delay embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingSpec {
    input_shape: Shape,
    taus: Vec<usize>,
    embedded_shape: Shape,
}

impl EmbeddingSpec {
    pub fn new(input_shape: Shape, taus: &[usize]) -> Result<Self> {
        if taus.len() != input_shape.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} windows given for an order-{} tensor",
                taus.len(),
                input_shape.order()
            )));
        }
        let mut dims = Vec::with_capacity(2 * taus.len());
        for (mode, (&tau, &len)) in taus.iter().zip(input_shape.dims()).enumerate() {
            if tau == 0 || tau > len {
                return Err(Error::InvalidWindow { mode, tau, len });
            }
            dims.push(tau);
            dims.push(len - tau + 1);
        }
        Ok(EmbeddingSpec {
            input_shape,
            taus: taus.to_vec(),
            embedded_shape: Shape::new(dims)?,
        })
    }

    /// Recovers the spec from an embedded shape `(tau_1, K_1, tau_2, K_2, ...)`,
    /// using `I_n = tau_n + K_n - 1`.
    pub fn from_embedded_shape(embedded: &Shape) -> Result<Self> {
        let dims = embedded.dims();
        if !dims.len().is_multiple_of(2) {
            return Err(Error::InvalidShape {
                dims: dims.to_vec(),
                reason: "an embedded tensor has an even number of modes",
            });
        }
        let taus: Vec<usize> = dims.iter().step_by(2).copied().collect();
        let input: Vec<usize> = dims.chunks(2).map(|p| p[0] + p[1] - 1).collect();
        Self::new(Shape::new(input)?, &taus)
    }

    pub fn input_shape(&self) -> &Shape {
        &self.input_shape
    }

    pub fn taus(&self) -> &[usize] {
        &self.taus
    }

    pub fn embedded_shape(&self) -> &Shape {
        &self.embedded_shape
    }

    /// How often each element of input mode `mode` is duplicated.
    pub fn duplication_counts(&self, mode: usize) -> Vec<usize> {
        counts(self.input_shape.dims()[mode], self.taus[mode])
    }

    /// Embedded element count as a wide integer, for size guards.
    pub fn embedded_len(&self) -> u128 {
        self.embedded_shape
            .dims()
            .iter()
            .map(|&d| d as u128)
            .product()
    }
}

/// Delay embedding of a vector: `tau x (L - tau + 1)` Hankel matrix.
pub fn delay_embed_vector(v: &[f64], tau: usize) -> Result<DMatrix<f64>> {
    check_window(v.len(), tau)?;
    Ok(DMatrix::from_fn(tau, v.len() - tau + 1, |i, j| v[i + j]))
}

/// Number of times each `v_i` appears in the Hankel matrix of window `tau`.
pub fn duplication_counts(len: usize, tau: usize) -> Result<Vec<usize>> {
    check_window(len, tau)?;
    Ok(counts(len, tau))
}

fn counts(len: usize, tau: usize) -> Vec<usize> {
    (1..=len)
        .map(|i| i.min(tau).min(len - i + 1).min(len - tau + 1))
        .collect()
}

fn check_window(len: usize, tau: usize) -> Result<()> {
    if tau == 0 || tau > len {
        Err(Error::InvalidWindow { mode: 0, tau, len })
    } else {
        Ok(())
    }
}

/// Pseudo-inverse of [`delay_embed_vector`]: averages every anti-diagonal.
pub fn inverse_delay_embed_vector(h: &DMatrix<f64>, len: usize, tau: usize) -> Result<Vec<f64>> {
    check_window(len, tau)?;
    if h.nrows() != tau || h.ncols() != len - tau + 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected a {}x{} Hankel matrix, got {}x{}",
            tau,
            len - tau + 1,
            h.nrows(),
            h.ncols()
        )));
    }
    let mut out = vec![0.0; len];
    for j in 0..h.ncols() {
        for i in 0..tau {
            out[i + j] += h[(i, j)];
        }
    }
    for (v, c) in out.iter_mut().zip(counts(len, tau)) {
        *v /= c as f64;
    }
    Ok(out)
}

// Replaces the (left, len, right) block layout by (left, tau, len - tau + 1, right).
fn embed_mode<T: Copy>(src: &[T], left: usize, len: usize, right: usize, tau: usize) -> Vec<T> {
    let windows = len - tau + 1;
    let mut out = Vec::with_capacity(left * tau * windows * right);
    for r in 0..right {
        let block = &src[r * left * len..(r + 1) * left * len];
        for b in 0..windows {
            for a in 0..tau {
                let start = (a + b) * left;
                out.extend_from_slice(&block[start..start + left]);
            }
        }
    }
    out
}

// Inverse of `embed_mode` for one mode: sums duplicates then divides by counts.
fn collapse_mode(src: &[f64], left: usize, len: usize, right: usize, tau: usize) -> Vec<f64> {
    let windows = len - tau + 1;
    let mut out = vec![0.0; left * len * right];
    for r in 0..right {
        let block = &src[r * left * tau * windows..(r + 1) * left * tau * windows];
        let dst = &mut out[r * left * len..(r + 1) * left * len];
        for b in 0..windows {
            for a in 0..tau {
                let s = &block[(a + tau * b) * left..(a + tau * b + 1) * left];
                let d = &mut dst[(a + b) * left..(a + b + 1) * left];
                for (x, y) in d.iter_mut().zip(s) {
                    *x += y;
                }
            }
        }
        for (i, c) in counts(len, tau).into_iter().enumerate() {
            let c = c as f64;
            for x in &mut dst[i * left..(i + 1) * left] {
                *x /= c;
            }
        }
    }
    out
}

fn embed_all<T: Copy>(values: &[T], spec: &EmbeddingSpec) -> Vec<T> {
    let dims = spec.input_shape.dims();
    let mut data = values.to_vec();
    let mut left = 1usize;
    for (n, (&len, &tau)) in dims.iter().zip(&spec.taus).enumerate() {
        let right: usize = dims[n + 1..].iter().product();
        if tau > 1 {
            data = embed_mode(&data, left, len, right, tau);
        }
        left *= tau * (len - tau + 1);
    }
    data
}

/// Multi-way delay embedding of an order-N tensor into an order-2N Hankel tensor.
pub fn mdt(x: &DenseTensor, taus: &[usize]) -> Result<(DenseTensor, EmbeddingSpec)> {
    let spec = EmbeddingSpec::new(x.shape().clone(), taus)?;
    let data = embed_all(x.as_slice(), &spec);
    Ok((
        DenseTensor::from_raw(spec.embedded_shape.clone(), data),
        spec,
    ))
}

/// Embeds an observation mask with the same duplication as [`mdt`].
pub fn mdt_mask(q: &MaskTensor, taus: &[usize]) -> Result<MaskTensor> {
    let spec = EmbeddingSpec::new(q.shape().clone(), taus)?;
    let flags = embed_all(q.as_slice(), &spec);
    MaskTensor::new(spec.embedded_shape, flags)
}

/// Least-squares inverse of [`mdt`]: every output element is the mean of all its
/// duplicated copies in `xh`.
pub fn inverse_mdt(xh: &DenseTensor, spec: &EmbeddingSpec) -> Result<DenseTensor> {
    if xh.shape() != &spec.embedded_shape {
        return Err(Error::ShapeMismatch {
            left: xh.dims().to_vec(),
            right: spec.embedded_shape.dims().to_vec(),
        });
    }
    let dims = spec.input_shape.dims();
    let mut data = xh.as_slice().to_vec();
    // collapse from the last mode so the left extent of pending modes stays embedded
    for n in (0..dims.len()).rev() {
        let left: usize = spec.embedded_shape.dims()[..2 * n].iter().product();
        let right: usize = dims[n + 1..].iter().product();
        let tau = spec.taus[n];
        if tau > 1 {
            data = collapse_mode(&data, left, dims[n], right, tau);
        }
    }
    Ok(DenseTensor::from_raw(spec.input_shape.clone(), data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn hankel_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let h = delay_embed_vector(&v, 3).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0, 3.0, 4.0, 5.0]);
        assert_eq!(h, want);
        let row = delay_embed_vector(&v, 1).unwrap();
        assert_eq!((row.nrows(), row.ncols()), (1, 5));
        assert_eq!(row.as_slice(), &v);
        let col = delay_embed_vector(&v, 5).unwrap();
        assert_eq!((col.nrows(), col.ncols()), (5, 1));
        assert_eq!(col.as_slice(), &v);
        assert!(delay_embed_vector(&v, 0).is_err());
        assert!(delay_embed_vector(&v, 6).is_err());
    }

    #[test]
    fn counts_examples() {
        assert_eq!(duplication_counts(5, 2).unwrap(), vec![1, 2, 2, 2, 1]);
        assert_eq!(duplication_counts(5, 3).unwrap(), vec![1, 2, 3, 2, 1]);
        assert_eq!(duplication_counts(4, 1).unwrap(), vec![1; 4]);
        assert!(duplication_counts(3, 4).is_err());
    }

    #[test]
    fn inverse_vector_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let h = delay_embed_vector(&v, 3).unwrap();
        assert_eq!(inverse_delay_embed_vector(&h, 5, 3).unwrap(), v.to_vec());

        let h = DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 3.0, 7.0]);
        assert_eq!(
            inverse_delay_embed_vector(&h, 3, 2).unwrap(),
            vec![1.0, 4.0, 7.0]
        );

        let ones = DMatrix::from_element(4, 3, 1.0);
        assert_eq!(
            inverse_delay_embed_vector(&ones, 6, 4).unwrap(),
            vec![1.0; 6]
        );

        assert!(inverse_delay_embed_vector(&ones, 6, 3).is_err());
    }

    #[test]
    fn color_image_shape() {
        let spec = EmbeddingSpec::new(shape(&[256, 256, 3]), &[32, 32, 1]).unwrap();
        assert_eq!(spec.embedded_shape().dims(), &[32, 225, 32, 225, 1, 3]);
    }

    #[test]
    fn unit_windows_copy() {
        let x = DenseTensor::from_fn(shape(&[3, 2, 4]), |i| {
            (i[0] + 10 * i[1] + 100 * i[2]) as f64
        });
        let (xh, spec) = mdt(&x, &[1, 1, 1]).unwrap();
        assert_eq!(xh.dims(), &[1, 3, 1, 2, 1, 4]);
        assert_eq!(xh.as_slice(), x.as_slice());
        assert_eq!(inverse_mdt(&xh, &spec).unwrap(), x);
    }

    #[test]
    fn vector_paths_agree() {
        let v: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = DenseTensor::new(shape(&[9]), v.clone()).unwrap();
        let (xh, spec) = mdt(&x, &[4]).unwrap();
        let h = delay_embed_vector(&v, 4).unwrap();
        assert_eq!(xh.dims(), &[4, 6]);
        assert_eq!(xh.as_slice(), h.as_slice());

        let noisy = DenseTensor::from_fn(xh.shape().clone(), |i| (i[0] * 3 + i[1] * 5 % 7) as f64);
        let m = DMatrix::from_column_slice(4, 6, noisy.as_slice());
        let a = inverse_mdt(&noisy, &spec).unwrap();
        let b = inverse_delay_embed_vector(&m, 9, 4).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn entry_formula() {
        let x = DenseTensor::from_fn(shape(&[5, 4]), |i| (i[0] * 4 + i[1]) as f64);
        let (xh, _) = mdt(&x, &[2, 3]).unwrap();
        assert_eq!(xh.dims(), &[2, 4, 3, 2]);
        for a1 in 0..2 {
            for b1 in 0..4 {
                for a2 in 0..3 {
                    for b2 in 0..2 {
                        assert_eq!(xh.get(&[a1, b1, a2, b2]), x.get(&[a1 + b1, a2 + b2]));
                    }
                }
            }
        }
    }

    #[test]
    fn mask_embedding() {
        let s = shape(&[5, 4]);
        let full = mdt_mask(&MaskTensor::all_observed(s.clone()), &[2, 3]).unwrap();
        assert_eq!(full.observed_count(), full.as_slice().len());
        let none = mdt_mask(&MaskTensor::all_missing(s.clone()), &[2, 3]).unwrap();
        assert_eq!(none.observed_count(), 0);

        let p = [2usize, 1usize];
        let q = MaskTensor::from_fn(s, |i| i != p);
        let qh = mdt_mask(&q, &[2, 3]).unwrap();
        let missing = qh.as_slice().len() - qh.observed_count();
        let c0 = duplication_counts(5, 2).unwrap()[p[0]];
        let c1 = duplication_counts(4, 3).unwrap()[p[1]];
        assert_eq!(missing, c0 * c1);
    }

    #[test]
    fn inverse_rejects_wrong_shape() {
        let spec = EmbeddingSpec::new(shape(&[5, 4]), &[2, 3]).unwrap();
        let bad = DenseTensor::zeros(shape(&[2, 4, 3, 3]));
        assert!(inverse_mdt(&bad, &spec).is_err());
        assert!(EmbeddingSpec::new(shape(&[5, 4]), &[2]).is_err());
        assert!(matches!(
            EmbeddingSpec::new(shape(&[5, 4]), &[2, 5]),
            Err(Error::InvalidWindow {
                mode: 1,
                tau: 5,
                len: 4
            })
        ));
    }

    #[test]
    fn spec_from_embedded_shape() {
        let spec = EmbeddingSpec::new(shape(&[64, 64, 3]), &[8, 8, 1]).unwrap();
        assert_eq!(spec.embedded_shape().dims(), &[8, 57, 8, 57, 1, 3]);
        assert_eq!(
            EmbeddingSpec::from_embedded_shape(spec.embedded_shape()).unwrap(),
            spec
        );
    }

    #[test]
    fn constant_embedded_inverts_to_constant() {
        let spec = EmbeddingSpec::new(shape(&[6, 5]), &[3, 2]).unwrap();
        let c = DenseTensor::filled(spec.embedded_shape().clone(), 2.5);
        let x = inverse_mdt(&c, &spec).unwrap();
        assert!(x.as_slice().iter().all(|&v| (v - 2.5).abs() < 1e-15));
    }
}
