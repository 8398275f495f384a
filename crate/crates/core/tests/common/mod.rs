//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use hankel_tucker::linalg::OrthonormalBasis;
use hankel_tucker::metrics::{SsimParams, SsimWindow};
use hankel_tucker::tensor::{DenseTensor, MaskTensor, Shape};
use hankel_tucker::TuckerModel;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn shape(d: &[usize]) -> Shape {
    Shape::new(d.to_vec()).unwrap()
}

pub fn gaussian_tensor(dims: &[usize], r: &mut ChaCha8Rng) -> DenseTensor {
    DenseTensor::from_fn(shape(dims), |_| r.sample(StandardNormal))
}

pub fn gaussian_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

/// `rows x cols` matrix with orthonormal columns, from a QR factorization.
pub fn orthonormal(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let q = gaussian_matrix(rows, cols, r).qr().q();
    q.columns(0, cols).into_owned()
}

/// Random Tucker model with Gaussian core and orthonormal factors.
pub fn planted_model(dims: &[usize], ranks: &[usize], r: &mut ChaCha8Rng) -> TuckerModel {
    let core = gaussian_tensor(ranks, r);
    let factors = dims
        .iter()
        .zip(ranks)
        .map(|(&j, &k)| OrthonormalBasis::new(orthonormal(j, k, r), 1e-12).unwrap())
        .collect();
    TuckerModel::new(core, factors).unwrap()
}

/// Mask hiding each entry independently with probability `missing`.
pub fn bernoulli_mask(dims: &[usize], missing: f64, r: &mut ChaCha8Rng) -> MaskTensor {
    MaskTensor::from_fn(shape(dims), |_| r.random::<f64>() >= missing)
}

/// Relative Frobenius error over the entries where `select` is true.
pub fn rel_error_on(truth: &DenseTensor, est: &DenseTensor, select: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((a, b), &s) in truth.as_slice().iter().zip(est.as_slice()).zip(select) {
        if s {
            num += (a - b) * (a - b);
            den += a * a;
        }
    }
    (num / den).sqrt()
}

/// SSIM computed window by window with explicit 2-D weights.
pub fn naive_ssim(x: &DenseTensor, y: &DenseTensor, p: &SsimParams) -> f64 {
    let w = p.window;
    let c = (w as f64 - 1.0) / 2.0;
    let mut weights = vec![vec![0.0; w]; w];
    let mut total = 0.0;
    for (a, row) in weights.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = match p.kind {
                SsimWindow::Uniform => 1.0,
                SsimWindow::Gaussian { sigma } => {
                    let d2 = (a as f64 - c).powi(2) + (b as f64 - c).powi(2);
                    (-d2 / (2.0 * sigma * sigma)).exp()
                }
            };
            total += *v;
        }
    }
    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let (rows, cols) = (x.dims()[0], x.dims()[1]);
    let mut sum = 0.0;
    let mut count = 0;
    for r0 in 0..=rows - w {
        for c0 in 0..=cols - w {
            let (mut mx, mut my) = (0.0, 0.0);
            for (a, row) in weights.iter().enumerate() {
                for (b, wt) in row.iter().enumerate() {
                    let g = wt / total;
                    mx += g * x.get(&[r0 + a, c0 + b]);
                    my += g * y.get(&[r0 + a, c0 + b]);
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for (a, row) in weights.iter().enumerate() {
                for (b, wt) in row.iter().enumerate() {
                    let g = wt / total;
                    let dx = x.get(&[r0 + a, c0 + b]) - mx;
                    let dy = y.get(&[r0 + a, c0 + b]) - my;
                    vx += g * dx * dx;
                    vy += g * dy * dy;
                    cxy += g * dx * dy;
                }
            }
            sum += (2.0 * mx * my + c1) * (2.0 * cxy + c2)
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    sum / count as f64
}
