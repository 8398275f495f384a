//! PSNR, SNR and SSIM.
//!
//! Exact matches report `f64::INFINITY` for the decibel metrics.

use crate::error::{Error, Result};
use crate::tensor::{ensure_same_shape, DenseTensor, Shape};

/// `10 log10(peak² / MSE)` over all entries.
pub fn psnr(reference: &DenseTensor, estimate: &DenseTensor, peak: f64) -> Result<f64> {
    ensure_same_shape(reference.shape(), estimate.shape())?;
    if !(peak > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "peak must be positive, got {peak}"
        )));
    }
    let mse = squared_error(reference, estimate) / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// `10 log10(‖ref‖² / ‖ref - est‖²)`.
pub fn snr(reference: &DenseTensor, estimate: &DenseTensor) -> Result<f64> {
    ensure_same_shape(reference.shape(), estimate.shape())?;
    let signal: f64 = reference.as_slice().iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::InvalidParameter(
            "SNR of an all-zero reference".into(),
        ));
    }
    let noise = squared_error(reference, estimate);
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}

fn squared_error(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SsimWindow {
    Gaussian { sigma: f64 },
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsimParams {
    /// Side length of the square window, odd.
    pub window: usize,
    pub kind: SsimWindow,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            window: 11,
            kind: SsimWindow::Gaussian { sigma: 1.5 },
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "SSIM window must be odd and positive, got {}",
                self.window
            )));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.dynamic_range > 0.0) {
            return Err(Error::InvalidParameter(
                "SSIM constants and dynamic range must be positive".into(),
            ));
        }
        if let SsimWindow::Gaussian { sigma } = self.kind {
            if !(sigma > 0.0) {
                return Err(Error::InvalidParameter(
                    "Gaussian sigma must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Normalized 1-D window; the 2-D window is its outer product with itself.
    pub fn weights(&self) -> Vec<f64> {
        let w = self.window;
        let raw: Vec<f64> = match self.kind {
            SsimWindow::Uniform => vec![1.0; w],
            SsimWindow::Gaussian { sigma } => {
                let c = (w as f64 - 1.0) / 2.0;
                (0..w)
                    .map(|k| {
                        let d = k as f64 - c;
                        (-d * d / (2.0 * sigma * sigma)).exp()
                    })
                    .collect()
            }
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    }
}

// valid-mode separable filter of a column-major rows x cols plane
fn filter_valid(data: &[f64], rows: usize, cols: usize, w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let (or, oc) = (rows - n + 1, cols - n + 1);
    let mut tmp = vec![0.0; or * cols];
    for c in 0..cols {
        let col = &data[c * rows..(c + 1) * rows];
        for r in 0..or {
            tmp[r + or * c] = w.iter().zip(&col[r..r + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for c in 0..oc {
        for (k, &wk) in w.iter().enumerate() {
            let src = &tmp[(c + k) * or..(c + k + 1) * or];
            for (o, s) in out[c * or..(c + 1) * or].iter_mut().zip(src) {
                *o += wk * s;
            }
        }
    }
    out
}

/// Local SSIM at every position where the window fits entirely inside the image.
/// Inputs are order-2 tensors; the map has shape `(H - w + 1, W - w + 1)`.
pub fn ssim_map(
    reference: &DenseTensor,
    estimate: &DenseTensor,
    p: &SsimParams,
) -> Result<DenseTensor> {
    ensure_same_shape(reference.shape(), estimate.shape())?;
    p.validate()?;
    if reference.order() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "SSIM needs a 2-D image, got order {}",
            reference.order()
        )));
    }
    let (rows, cols) = (reference.dims()[0], reference.dims()[1]);
    if rows < p.window || cols < p.window {
        return Err(Error::DimensionMismatch(format!(
            "image {rows}x{cols} is smaller than the {0}x{0} SSIM window",
            p.window
        )));
    }
    let w = p.weights();
    let x = reference.as_slice();
    let y = estimate.as_slice();
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        x.iter().zip(y).map(|(&a, &b)| f(a, b)).collect()
    };
    let mu_x = filter_valid(x, rows, cols, &w);
    let mu_y = filter_valid(y, rows, cols, &w);
    let e_xx = filter_valid(&prod(&|a, _| a * a), rows, cols, &w);
    let e_yy = filter_valid(&prod(&|_, b| b * b), rows, cols, &w);
    let e_xy = filter_valid(&prod(&|a, b| a * b), rows, cols, &w);

    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let values = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let vx = e_xx[i] - mx * mx;
            let vy = e_yy[i] - my * my;
            let cxy = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
        })
        .collect();
    let shape = Shape::new(vec![rows - p.window + 1, cols - p.window + 1])?;
    Ok(DenseTensor::from_raw(shape, values))
}

/// Mean of [`ssim_map`].
pub fn ssim(reference: &DenseTensor, estimate: &DenseTensor, p: &SsimParams) -> Result<f64> {
    let map = ssim_map(reference, estimate, p)?;
    Ok(map.as_slice().iter().sum::<f64>() / map.len() as f64)
}

/// 2-D slices of an order-3 tensor taken at each index of `slice_mode`; an
/// order-2 tensor is its own single slice.
pub fn slices(t: &DenseTensor, slice_mode: usize) -> Result<Vec<DenseTensor>> {
    match t.order() {
        2 => Ok(vec![t.clone()]),
        3 => {
            t.shape().check_mode(slice_mode)?;
            let keep: Vec<usize> = (0..3).filter(|&m| m != slice_mode).collect();
            let plane = Shape::new(vec![t.dims()[keep[0]], t.dims()[keep[1]]])?;
            Ok((0..t.dims()[slice_mode])
                .map(|s| {
                    DenseTensor::from_fn(plane.clone(), |i| {
                        let mut idx = [0usize; 3];
                        idx[keep[0]] = i[0];
                        idx[keep[1]] = i[1];
                        idx[slice_mode] = s;
                        t.get(&idx)
                    })
                })
                .collect())
        }
        n => Err(Error::DimensionMismatch(format!(
            "mean SSIM needs an order-2 or order-3 tensor, got order {n}"
        ))),
    }
}

/// Average SSIM over the 2-D slices along `slice_mode` (channels of a color
/// image, or slices of a volume).
pub fn mean_ssim(
    reference: &DenseTensor,
    estimate: &DenseTensor,
    slice_mode: usize,
    p: &SsimParams,
) -> Result<f64> {
    ensure_same_shape(reference.shape(), estimate.shape())?;
    let a = slices(reference, slice_mode)?;
    let b = slices(estimate, slice_mode)?;
    let mut total = 0.0;
    for (x, y) in a.iter().zip(&b) {
        total += ssim(x, y, p)?;
    }
    Ok(total / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn psnr_edges() {
        let a = DenseTensor::filled(shape(&[4, 4]), 10.0);
        assert_eq!(psnr(&a, &a, 255.0).unwrap(), f64::INFINITY);
        let b = a.map(|v| v + 255.0);
        assert!(psnr(&a, &b, 255.0).unwrap().abs() < 1e-12);
        assert!(psnr(&a, &b, 0.0).is_err());
        assert!(psnr(&a, &DenseTensor::zeros(shape(&[2, 8])), 1.0).is_err());
    }

    #[test]
    fn snr_edges() {
        let a = DenseTensor::from_fn(shape(&[3, 5]), |i| (i[0] + i[1]) as f64 - 2.0);
        assert_eq!(snr(&a, &a).unwrap(), f64::INFINITY);
        let zero = DenseTensor::zeros(a.shape().clone());
        assert!(snr(&a, &zero).unwrap().abs() < 1e-12);
        assert!(snr(&zero, &a).is_err());
    }

    #[test]
    fn ssim_identity_and_inversion() {
        let p = SsimParams::default();
        let x = DenseTensor::from_fn(shape(&[16, 16]), |i| {
            128.0 + ((i[0] as f64 * 0.9).sin() + (i[1] as f64 * 0.4).cos()) * 60.0
        });
        assert!((ssim(&x, &x, &p).unwrap() - 1.0).abs() < 1e-12);
        let neg = x.map(|v| 255.0 - v);
        assert!(ssim(&x, &neg, &p).unwrap() < 0.0);
        let small = DenseTensor::zeros(shape(&[8, 16]));
        assert!(ssim(&small, &small, &p).is_err());
    }

    #[test]
    fn params_validation() {
        let p = SsimParams {
            window: 4,
            ..SsimParams::default()
        };
        assert!(p.validate().is_err());
        let w = SsimParams::default().weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w[5] > w[0]);
    }

    #[test]
    fn single_slice_mean_equals_ssim() {
        let p = SsimParams::default();
        let x = DenseTensor::from_fn(shape(&[12, 13, 1]), |i| (i[0] * i[1]) as f64);
        let y = x.map(|v| v * 0.9 + 3.0);
        let plane = |t: &DenseTensor| t.clone().reshape(shape(&[12, 13])).unwrap();
        let want = ssim(&plane(&x), &plane(&y), &p).unwrap();
        assert!((mean_ssim(&x, &y, 2, &p).unwrap() - want).abs() < 1e-15);
    }
}
