//! End-to-end recovery: embed, complete in the embedded space, invert.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::mdt::{inverse_mdt, mdt, mdt_mask, EmbeddingSpec};
use crate::metrics::{mean_ssim, psnr, snr, SsimParams};
use crate::rank::{
    complete_with_rank_increment, default_rank_sequences, RankEvent, RankSchedule,
    StoppingCriteria, Termination, DEFAULT_EPSILON_REL, DEFAULT_MAX_TOTAL_SWEEPS, DEFAULT_TOL_REL,
};
use crate::signal::{generate_signal, linear_fill, SignalKind};
use crate::tensor::{ensure_same_shape, DenseTensor, MaskTensor, Shape};
use crate::tucker::{tucker_complete, CostTrace, FitConfig};

/// Refuse embedded tensors larger than this many elements by default.
pub const DEFAULT_MAX_EMBEDDED_ELEMENTS: u128 = 200_000_000;

/// Thresholds for the rank-increment fit.
#[derive(Debug, Clone, PartialEq)]
pub enum Criteria {
    /// `epsilon` and `tol` as fractions of the embedded observed energy `‖Q_H ⊛ T_H‖²`.
    Relative {
        epsilon: f64,
        tol: f64,
        max_total_sweeps: usize,
    },
    Absolute(StoppingCriteria),
}

impl Default for Criteria {
    fn default() -> Self {
        Criteria::Relative {
            epsilon: DEFAULT_EPSILON_REL,
            tol: DEFAULT_TOL_REL,
            max_total_sweeps: DEFAULT_MAX_TOTAL_SWEEPS,
        }
    }
}

/// How ranks in the embedded space are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum RankPlan {
    /// Fixed ranks, one per embedded mode. The request seed replaces `config.seed`.
    Fixed {
        ranks: Vec<usize>,
        config: FitConfig,
    },
    /// Rank increment; `None` uses the doubling sequences of the embedded shape.
    Increment {
        sequences: Option<Vec<Vec<usize>>>,
        criteria: Criteria,
    },
}

impl Default for RankPlan {
    fn default() -> Self {
        RankPlan::Increment {
            sequences: None,
            criteria: Criteria::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryRequest {
    pub data: DenseTensor,
    pub mask: MaskTensor,
    pub taus: Vec<usize>,
    pub plan: RankPlan,
    pub seed: u64,
    pub max_embedded_elements: u128,
}

impl RecoveryRequest {
    /// Rank increment with default sequences and thresholds.
    pub fn new(data: DenseTensor, mask: MaskTensor, taus: Vec<usize>) -> Self {
        RecoveryRequest {
            data,
            mask,
            taus,
            plan: RankPlan::default(),
            seed: 0,
            max_embedded_elements: DEFAULT_MAX_EMBEDDED_ELEMENTS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    /// Inverse embedding of the fitted model. Observed entries carry model values.
    pub estimate: DenseTensor,
    pub spec: EmbeddingSpec,
    pub ranks: Vec<usize>,
    pub trace: CostTrace,
    pub history: Vec<RankEvent>,
    /// `None` for fixed-rank fits.
    pub termination: Option<Termination>,
    pub elapsed: Duration,
}

/// Full-frame quality of an estimate against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quality {
    pub psnr: f64,
    pub snr: f64,
    /// Mean SSIM over channels, when the data is an image at least one window wide.
    pub ssim: Option<f64>,
}

impl RecoveryReport {
    pub fn evaluate(&self, truth: &DenseTensor, peak: f64) -> Result<Quality> {
        let ssim = match truth.order() {
            2 | 3 => mean_ssim(truth, &self.estimate, 2, &SsimParams::default()).ok(),
            _ => None,
        };
        Ok(Quality {
            psnr: psnr(truth, &self.estimate, peak)?,
            snr: snr(truth, &self.estimate)?,
            ssim,
        })
    }
}

/// Embedding spec for `req`, after the size guard.
pub fn plan_embedding(data_shape: &Shape, taus: &[usize], cap: u128) -> Result<EmbeddingSpec> {
    let spec = EmbeddingSpec::new(data_shape.clone(), taus)?;
    let elements = spec.embedded_len();
    if elements > cap {
        return Err(Error::TooLarge {
            elements,
            cap,
            factor: elements as f64 / data_shape.len() as f64,
        });
    }
    Ok(spec)
}

pub fn recover(req: &RecoveryRequest) -> Result<RecoveryReport> {
    let start = Instant::now();
    ensure_same_shape(req.data.shape(), req.mask.shape())?;
    let spec = plan_embedding(req.data.shape(), &req.taus, req.max_embedded_elements)?;
    let (th, _) = mdt(&req.data, &req.taus)?;
    let qh = mdt_mask(&req.mask, &req.taus)?;

    let (model, trace, history, termination) = match &req.plan {
        RankPlan::Fixed { ranks, config } => {
            let cfg = FitConfig {
                seed: req.seed,
                ..config.clone()
            };
            let (model, trace) = tucker_complete(&th, &qh, ranks, &cfg)?;
            (model, trace, Vec::new(), None)
        }
        RankPlan::Increment {
            sequences,
            criteria,
        } => {
            let schedule = match sequences {
                Some(s) => RankSchedule::new(s.clone(), spec.embedded_shape())?,
                None => default_rank_sequences(spec.embedded_shape()),
            };
            let criteria = match criteria {
                Criteria::Relative {
                    epsilon,
                    tol,
                    max_total_sweeps,
                } => StoppingCriteria::relative(&th, &qh, *epsilon, *tol, *max_total_sweeps)?,
                Criteria::Absolute(c) => c.clone(),
            };
            let fit = complete_with_rank_increment(&th, &qh, schedule, &criteria, req.seed)?;
            (fit.model, fit.trace, fit.history, Some(fit.termination))
        }
    };

    let estimate = inverse_mdt(&model.reconstruct(), &spec)?;
    if !estimate.is_finite() {
        return Err(Error::NonFinite("recovered estimate"));
    }
    Ok(RecoveryReport {
        estimate,
        ranks: model.ranks(),
        spec,
        trace,
        history,
        termination,
        elapsed: start.elapsed(),
    })
}

/// CSV `sweep,cost,rank_event` rows; a rank event reads `m<mode>:<rank>`.
pub fn trace_csv(trace: &CostTrace, history: &[RankEvent]) -> String {
    let mut out = String::from("sweep,cost,rank_event\n");
    for &(sweep, cost) in trace.points() {
        let events: Vec<String> = history
            .iter()
            .filter(|e| e.sweep == sweep)
            .map(|e| format!("m{}:{}", e.mode, e.rank))
            .collect();
        out.push_str(&format!("{sweep},{cost},{}\n", events.join(" ")));
    }
    out
}

/// Settings for the 1-D gap-filling experiment: a noiseless damped sinusoid with
/// one contiguous run of missing samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GapDemo {
    pub length: usize,
    /// 0-based index of the first missing sample.
    pub gap_start: usize,
    pub gap_len: usize,
    pub tau: usize,
    pub noise_std: f64,
    pub epsilon_rel: f64,
    pub seed: u64,
}

impl Default for GapDemo {
    fn default() -> Self {
        GapDemo {
            length: 200,
            gap_start: 85,
            gap_len: 30,
            tau: 50,
            noise_std: 0.0,
            epsilon_rel: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GapDemoResult {
    pub truth: Vec<f64>,
    pub observed: Vec<bool>,
    pub recovered: Vec<f64>,
    pub linear: Vec<f64>,
    /// Peak absolute value of the clean signal.
    pub amplitude: f64,
    pub rmse_recovered: f64,
    pub rmse_linear: f64,
    pub report: RecoveryReport,
}

impl GapDemo {
    pub fn run(&self) -> Result<GapDemoResult> {
        if self.gap_start + self.gap_len > self.length {
            return Err(Error::InvalidParameter(format!(
                "gap {}..{} exceeds signal length {}",
                self.gap_start,
                self.gap_start + self.gap_len,
                self.length
            )));
        }
        let kind = SignalKind::demo();
        let clean = generate_signal(&kind, self.length, 0.0, self.seed)?;
        let noisy = generate_signal(&kind, self.length, self.noise_std, self.seed)?;
        let gap = self.gap_start..self.gap_start + self.gap_len;
        let observed: Vec<bool> = (0..self.length).map(|i| !gap.contains(&i)).collect();
        let input: Vec<f64> = noisy
            .iter()
            .zip(&observed)
            .map(|(&v, &o)| if o { v } else { 0.0 })
            .collect();

        let shape = Shape::new(vec![self.length])?;
        let mut req = RecoveryRequest::new(
            DenseTensor::new(shape.clone(), input.clone())?,
            MaskTensor::new(shape, observed.clone())?,
            vec![self.tau],
        );
        req.seed = self.seed;
        req.plan = RankPlan::Increment {
            sequences: None,
            criteria: Criteria::Relative {
                epsilon: self.epsilon_rel,
                tol: DEFAULT_TOL_REL,
                max_total_sweeps: DEFAULT_MAX_TOTAL_SWEEPS,
            },
        };
        let report = recover(&req)?;
        let recovered = report.estimate.as_slice().to_vec();
        let linear = linear_fill(&input, &observed)?;

        let rmse = |est: &[f64]| {
            let se: f64 = gap.clone().map(|i| (est[i] - clean[i]).powi(2)).sum();
            (se / self.gap_len.max(1) as f64).sqrt()
        };
        Ok(GapDemoResult {
            amplitude: clean.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
            rmse_recovered: rmse(&recovered),
            rmse_linear: rmse(&linear),
            truth: clean,
            observed,
            recovered,
            linear,
            report,
        })
    }
}

impl GapDemoResult {
    /// CSV `t,truth,observed,recovered,linear`; `observed` is empty inside the gap.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,truth,observed,recovered,linear\n");
        for i in 0..self.truth.len() {
            let obs = if self.observed[i] {
                self.truth[i].to_string()
            } else {
                String::new()
            };
            out.push_str(&format!(
                "{i},{},{obs},{},{}\n",
                self.truth[i], self.recovered[i], self.linear[i]
            ));
        }
        out
    }
}
