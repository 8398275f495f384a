//! Tucker decomposition of an incomplete tensor at fixed multilinear rank.
//!
//! Each outer iteration fills the missing entries with the current model
//! (`Z = Q ⊛ T + (1 - Q) ⊛ X`) and runs a single ALS cycle on `Z`. The masked
//! cost `‖Q ⊛ (T - X)‖²` never increases from one iteration to the next.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dominant_eigenvectors, orthonormalize_columns, OrthonormalBasis};
use crate::tensor::{
    ensure_same_shape, mode_gram, multilinear_product, multilinear_product_excluding, DenseTensor,
    MaskTensor, Shape,
};

/// Core tensor plus one orthonormal factor per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    core: DenseTensor,
    factors: Vec<OrthonormalBasis>,
}

impl TuckerModel {
    pub fn new(core: DenseTensor, factors: Vec<OrthonormalBasis>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for an order-{} core",
                factors.len(),
                core.order()
            )));
        }
        for (m, (f, &r)) in factors.iter().zip(core.dims()).enumerate() {
            if f.rank() != r {
                return Err(Error::InvalidRank {
                    mode: m,
                    rank: f.rank(),
                    reason: format!("core has size {r} along this mode"),
                });
            }
        }
        Ok(TuckerModel { core, factors })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[OrthonormalBasis] {
        &self.factors
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rank()).collect()
    }

    /// Shape of the reconstructed tensor.
    pub fn full_shape(&self) -> Shape {
        Shape::new(self.factors.iter().map(|f| f.rows()).collect::<Vec<_>>())
            .expect("factor row counts are positive")
    }

    /// `G ×_1 U1 ... ×_M UM`.
    pub fn reconstruct(&self) -> DenseTensor {
        let us: Vec<DMatrix<f64>> = self.factors.iter().map(|f| f.matrix().clone()).collect();
        multilinear_product(&self.core, &us).expect("model dimensions are consistent")
    }

    pub(crate) fn into_parts(self) -> (DenseTensor, Vec<OrthonormalBasis>) {
        (self.core, self.factors)
    }
}

/// Loop control for [`tucker_complete`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_sweeps: usize,
    pub seed: u64,
    /// Keep every per-sweep cost in the trace, not just the first and last.
    pub record_cost: bool,
    /// Stop once `|f_k - f_{k+1}| <= conv_tol * max(1, f_0)`.
    pub conv_tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_sweeps: 500,
            seed: 0,
            record_cost: true,
            conv_tol: 1e-8,
        }
    }
}

/// Masked squared error after each sweep. Sweep 0 is the initial model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostTrace {
    points: Vec<(usize, f64)>,
}

impl CostTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sweep: usize, cost: f64) {
        self.points.push((sweep, cost));
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    pub fn costs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn last(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when no cost exceeds its predecessor by more than `slack`.
    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

/// `‖Q ⊛ (T - X)‖²`.
pub fn cost(t: &DenseTensor, q: &MaskTensor, x: &DenseTensor) -> Result<f64> {
    ensure_same_shape(t.shape(), q.shape())?;
    ensure_same_shape(t.shape(), x.shape())?;
    Ok(t.as_slice()
        .iter()
        .zip(x.as_slice())
        .zip(q.as_slice())
        .filter(|(_, &f)| f)
        .map(|((a, b), _)| (a - b) * (a - b))
        .sum())
}

/// Majorizer `‖Q ⊛ (T - X)‖² + ‖(1 - Q) ⊛ (X_prev - X)‖²` of [`cost`] at `x_prev`.
pub fn auxiliary_cost(
    t: &DenseTensor,
    q: &MaskTensor,
    x_prev: &DenseTensor,
    x: &DenseTensor,
) -> Result<f64> {
    let z = auxiliary_fill(t, q, x_prev)?;
    Ok(z.as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// `Z = Q ⊛ T + (1 - Q) ⊛ X`.
pub fn auxiliary_fill(t: &DenseTensor, q: &MaskTensor, x: &DenseTensor) -> Result<DenseTensor> {
    ensure_same_shape(t.shape(), q.shape())?;
    ensure_same_shape(t.shape(), x.shape())?;
    let data = t
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .zip(q.as_slice())
        .map(|((&a, &b), &f)| if f { a } else { b })
        .collect();
    Ok(DenseTensor::from_raw(t.shape().clone(), data))
}

pub(crate) fn check_ranks(ranks: &[usize], shape: &Shape) -> Result<()> {
    if ranks.len() != shape.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} ranks given for an order-{} tensor",
            ranks.len(),
            shape.order()
        )));
    }
    for (m, (&r, &j)) in ranks.iter().zip(shape.dims()).enumerate() {
        if r == 0 || r > j {
            return Err(Error::InvalidRank {
                mode: m,
                rank: r,
                reason: format!("must lie in 1..={j}"),
            });
        }
    }
    Ok(())
}

pub(crate) fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DMatrix::from_column_slice(rows, cols, &values)
}

/// Random model with orthonormalized Gaussian factors and a Gaussian core.
pub fn init_model(ranks: &[usize], shape: &Shape, seed: u64) -> Result<TuckerModel> {
    check_ranks(ranks, shape)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = ranks
        .iter()
        .zip(shape.dims())
        .map(|(&r, &j)| {
            if j == 1 {
                OrthonormalBasis::identity(1)
            } else {
                let g = gaussian_matrix(&mut rng, j, r);
                OrthonormalBasis::from_raw(orthonormalize_columns(g, None))
            }
        })
        .collect();
    let core_shape = Shape::new(ranks.to_vec())?;
    let core_values: Vec<f64> = (0..core_shape.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    TuckerModel::new(DenseTensor::from_raw(core_shape, core_values), factors)
}

/// One ALS cycle on a complete tensor: each factor in mode order, then the core.
pub fn als_sweep(z: &DenseTensor, model: TuckerModel) -> Result<TuckerModel> {
    ensure_same_shape(z.shape(), &model.full_shape())?;
    let ranks = model.ranks();
    let (_, mut factors) = model.into_parts();
    let mut transposed: Vec<DMatrix<f64>> =
        factors.iter().map(|f| f.matrix().transpose()).collect();
    for m in 0..factors.len() {
        if factors[m].rows() == 1 {
            continue;
        }
        let y = multilinear_product_excluding(z, &transposed, m)?;
        let basis = dominant_eigenvectors(mode_gram(&y, m), ranks[m]);
        transposed[m] = basis.matrix().transpose();
        factors[m] = basis;
    }
    let core = multilinear_product(z, &transposed)?;
    TuckerModel::new(core, factors)
}

/// Fixed-rank completion of `t` observed on `q`.
pub fn tucker_complete(
    t: &DenseTensor,
    q: &MaskTensor,
    ranks: &[usize],
    cfg: &FitConfig,
) -> Result<(TuckerModel, CostTrace)> {
    ensure_same_shape(t.shape(), q.shape())?;
    if cfg.max_sweeps == 0 {
        return Err(Error::InvalidParameter(
            "max_sweeps must be at least 1".into(),
        ));
    }
    let mut model = init_model(ranks, t.shape(), cfg.seed)?;
    let mut x = model.reconstruct();
    let f0 = cost(t, q, &x)?;
    let threshold = cfg.conv_tol * f0.max(1.0);
    let mut trace = CostTrace::new();
    trace.push(0, f0);
    let mut prev = f0;
    for sweep in 1..=cfg.max_sweeps {
        let z = auxiliary_fill(t, q, &x)?;
        model = als_sweep(&z, model)?;
        x = model.reconstruct();
        let f = cost(t, q, &x)?;
        let done = (prev - f).abs() <= threshold || sweep == cfg.max_sweeps;
        if cfg.record_cost || done {
            trace.push(sweep, f);
        }
        if done {
            break;
        }
        prev = f;
    }
    Ok((model, trace))
}
