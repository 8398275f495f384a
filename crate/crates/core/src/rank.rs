//! Automatic rank selection by rank increment.
//!
//! The fit starts at the first entry of every per-mode rank sequence. Whenever the
//! masked cost stops improving, the mode whose projected residual is largest moves
//! to its next rank and the model is padded, so the new fit starts from the old
//! one. The run ends once the cost reaches `epsilon`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize_columns, OrthonormalBasis};
use crate::tensor::{
    ensure_same_shape, multilinear_product_excluding, squared_norm, DenseTensor, MaskTensor, Shape,
};
use crate::tucker::{
    als_sweep, auxiliary_fill, cost, gaussian_matrix, init_model, CostTrace, TuckerModel,
};

/// Default `epsilon`, relative to the observed energy `‖Q ⊛ T‖²`.
pub const DEFAULT_EPSILON_REL: f64 = 1e-4;
/// Default plateau tolerance, relative to the observed energy.
pub const DEFAULT_TOL_REL: f64 = 1e-6;
pub const DEFAULT_MAX_TOTAL_SWEEPS: usize = 5000;

/// Per-mode rank sequences with a cursor into each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSchedule {
    sequences: Vec<Vec<usize>>,
    cursors: Vec<usize>,
}

impl RankSchedule {
    /// Validates sequences against the mode sizes of the tensor being fitted.
    /// Each sequence must be nonempty, strictly increasing and within `1..=J_m`.
    pub fn new(sequences: Vec<Vec<usize>>, shape: &Shape) -> Result<Self> {
        if sequences.len() != shape.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} rank sequences for an order-{} tensor",
                sequences.len(),
                shape.order()
            )));
        }
        for (m, (seq, &j)) in sequences.iter().zip(shape.dims()).enumerate() {
            let Some(&first) = seq.first() else {
                return Err(Error::InvalidParameter(format!(
                    "rank sequence {m} is empty"
                )));
            };
            if first == 0 || seq.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "rank sequence {m} must be positive and strictly increasing: {seq:?}"
                )));
            }
            let last = *seq.last().unwrap();
            if last > j {
                return Err(Error::InvalidRank {
                    mode: m,
                    rank: last,
                    reason: format!("exceeds mode size {j}"),
                });
            }
        }
        let cursors = vec![0; sequences.len()];
        Ok(RankSchedule { sequences, cursors })
    }

    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    pub fn cursors(&self) -> &[usize] {
        &self.cursors
    }

    pub fn current_ranks(&self) -> Vec<usize> {
        self.sequences
            .iter()
            .zip(&self.cursors)
            .map(|(s, &k)| s[k])
            .collect()
    }

    pub fn has_headroom(&self, mode: usize) -> bool {
        self.cursors[mode] + 1 < self.sequences[mode].len()
    }

    pub fn is_exhausted(&self) -> bool {
        (0..self.sequences.len()).all(|m| !self.has_headroom(m))
    }

    /// Moves `mode` to its next rank and returns it.
    pub fn advance(&mut self, mode: usize) -> Result<usize> {
        if !self.has_headroom(mode) {
            return Err(Error::ScheduleExhausted);
        }
        self.cursors[mode] += 1;
        Ok(self.sequences[mode][self.cursors[mode]])
    }
}

/// Thresholds for [`complete_with_rank_increment`], in squared-error units.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingCriteria {
    /// Stop once the masked cost is at or below this.
    pub epsilon: f64,
    /// Plateau detector: a sweep that changes the cost by at most this triggers a rank step.
    pub tol: f64,
    pub max_total_sweeps: usize,
}

impl StoppingCriteria {
    pub fn new(epsilon: f64, tol: f64, max_total_sweeps: usize) -> Result<Self> {
        if !(epsilon >= 0.0) || !(tol >= 0.0) || !epsilon.is_finite() || !tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon ({epsilon}) and tol ({tol}) must be finite and nonnegative"
            )));
        }
        if max_total_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "max_total_sweeps must be at least 1".into(),
            ));
        }
        Ok(StoppingCriteria {
            epsilon,
            tol,
            max_total_sweeps,
        })
    }

    /// Thresholds scaled by the observed energy `‖Q ⊛ T‖²`.
    pub fn relative(
        t: &DenseTensor,
        q: &MaskTensor,
        epsilon_rel: f64,
        tol_rel: f64,
        max_total_sweeps: usize,
    ) -> Result<Self> {
        let energy = observed_energy(t, q)?;
        Self::new(epsilon_rel * energy, tol_rel * energy, max_total_sweeps)
    }

    pub fn default_for(t: &DenseTensor, q: &MaskTensor) -> Result<Self> {
        Self::relative(
            t,
            q,
            DEFAULT_EPSILON_REL,
            DEFAULT_TOL_REL,
            DEFAULT_MAX_TOTAL_SWEEPS,
        )
    }
}

/// `‖Q ⊛ T‖²`.
pub fn observed_energy(t: &DenseTensor, q: &MaskTensor) -> Result<f64> {
    ensure_same_shape(t.shape(), q.shape())?;
    Ok(t.as_slice()
        .iter()
        .zip(q.as_slice())
        .filter(|(_, &f)| f)
        .map(|(v, _)| v * v)
        .sum())
}

/// Doubling sequences `1, 2, 4, ...` capped by the mode size, which is always the
/// final entry.
pub fn default_rank_sequences(shape: &Shape) -> RankSchedule {
    let sequences = shape
        .dims()
        .iter()
        .map(|&j| {
            let mut seq = Vec::new();
            let mut r = 1;
            while r < j {
                seq.push(r);
                r *= 2;
            }
            seq.push(j);
            seq
        })
        .collect();
    RankSchedule::new(sequences, shape).expect("doubling sequences are valid")
}

/// `‖(Q ⊛ (T - X)) ×_{-m} {Uᵀ}‖²` for every mode `m`.
pub fn mode_residuals(
    t: &DenseTensor,
    q: &MaskTensor,
    x: &DenseTensor,
    factors: &[OrthonormalBasis],
) -> Result<Vec<f64>> {
    ensure_same_shape(t.shape(), q.shape())?;
    ensure_same_shape(t.shape(), x.shape())?;
    let residual = crate::tensor::masked(q, &t.sub(x)?)?;
    let transposed: Vec<DMatrix<f64>> = factors.iter().map(|f| f.matrix().transpose()).collect();
    (0..t.order())
        .map(|m| {
            let projected = multilinear_product_excluding(&residual, &transposed, m)?;
            Ok(squared_norm(&projected))
        })
        .collect()
}

/// Mode with the largest residual among those that can still grow. Ties go to
/// the lowest mode index.
pub fn select_increment_mode(residuals: &[f64], schedule: &RankSchedule) -> Result<usize> {
    if residuals.len() != schedule.sequences.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} residuals for {} modes",
            residuals.len(),
            schedule.sequences.len()
        )));
    }
    let mut best: Option<usize> = None;
    for (m, &r) in residuals.iter().enumerate() {
        if schedule.has_headroom(m) && best.is_none_or(|b| r > residuals[b]) {
            best = Some(m);
        }
    }
    best.ok_or(Error::ScheduleExhausted)
}

/// Grows factor `mode` to `new_rank` columns without changing the reconstruction:
/// new columns are random and orthonormal to the old ones, and the core is
/// zero-padded along `mode`.
pub fn pad_model(
    model: &TuckerModel,
    mode: usize,
    new_rank: usize,
    seed: u64,
) -> Result<TuckerModel> {
    let ranks = model.ranks();
    model.core().shape().check_mode(mode)?;
    let old = ranks[mode];
    let rows = model.factors()[mode].rows();
    if new_rank <= old || new_rank > rows {
        return Err(Error::InvalidRank {
            mode,
            rank: new_rank,
            reason: format!("padding needs {old} < rank <= {rows}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let existing = model.factors()[mode].matrix();
    let extra = orthonormalize_columns(
        gaussian_matrix(&mut rng, rows, new_rank - old),
        Some(existing),
    );
    let mut grown = existing.clone().resize_horizontally(new_rank, 0.0);
    grown.columns_mut(old, new_rank - old).copy_from(&extra);

    let mut factors = model.factors().to_vec();
    factors[mode] = OrthonormalBasis::from_raw(grown);

    let mut dims = ranks.clone();
    dims[mode] = new_rank;
    let new_shape = Shape::new(dims)?;
    let core = model.core();
    let padded = DenseTensor::from_fn(new_shape, |i| if i[mode] < old { core.get(i) } else { 0.0 });
    TuckerModel::new(padded, factors)
}

/// Why a rank-increment run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The masked cost reached `epsilon`.
    Converged,
    /// A plateau was hit with every mode at its final rank.
    ScheduleExhausted,
    /// `max_total_sweeps` ran out first.
    SweepLimit,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::ScheduleExhausted => "schedule-exhausted",
            Termination::SweepLimit => "sweep-limit",
        })
    }
}

/// One rank step, applied after sweep `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankEvent {
    pub sweep: usize,
    pub mode: usize,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct RankIncrementFit {
    pub model: TuckerModel,
    pub trace: CostTrace,
    pub history: Vec<RankEvent>,
    pub termination: Termination,
}

/// Tucker completion with automatic rank increment.
pub fn complete_with_rank_increment(
    t: &DenseTensor,
    q: &MaskTensor,
    schedule: RankSchedule,
    criteria: &StoppingCriteria,
    seed: u64,
) -> Result<RankIncrementFit> {
    ensure_same_shape(t.shape(), q.shape())?;
    let mut schedule = schedule;
    RankSchedule::new(schedule.sequences.clone(), t.shape())?;

    let mut model = init_model(&schedule.current_ranks(), t.shape(), seed)?;
    let mut x = model.reconstruct();
    let mut f1 = cost(t, q, &x)?;
    let mut trace = CostTrace::new();
    trace.push(0, f1);
    let mut history = Vec::new();
    let mut termination = Termination::SweepLimit;

    for sweep in 1..=criteria.max_total_sweeps {
        let z = auxiliary_fill(t, q, &x)?;
        model = als_sweep(&z, model)?;
        x = model.reconstruct();
        let f2 = cost(t, q, &x)?;
        trace.push(sweep, f2);
        if f2 <= criteria.epsilon {
            termination = Termination::Converged;
            break;
        }
        if (f2 - f1).abs() <= criteria.tol {
            let residuals = mode_residuals(t, q, &x, model.factors())?;
            let mode = match select_increment_mode(&residuals, &schedule) {
                Ok(m) => m,
                Err(Error::ScheduleExhausted) => {
                    termination = Termination::ScheduleExhausted;
                    break;
                }
                Err(e) => return Err(e),
            };
            let rank = schedule.advance(mode)?;
            let pad_seed = seed.wrapping_add(1 + history.len() as u64);
            model = pad_model(&model, mode, rank, pad_seed)?;
            history.push(RankEvent { sweep, mode, rank });
            x = model.reconstruct();
            f1 = cost(t, q, &x)?;
        } else {
            f1 = f2;
        }
    }

    Ok(RankIncrementFit {
        model,
        trace,
        history,
        termination,
    })
}
