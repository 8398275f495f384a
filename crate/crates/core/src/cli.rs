//! The `htc` command line.
//!
//! Failures print a single line `error: <kind>: <message>` to stderr and exit
//! with status 1 (2 for usage errors). Mode indices are 0-based throughout.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io::{load, load_mask, save, save_mask};
use crate::mask::{make_mask, MaskPattern};
use crate::mdt::{inverse_mdt, mdt, EmbeddingSpec};
use crate::metrics::{mean_ssim, psnr, snr, SsimParams};
use crate::pipeline::{
    recover, trace_csv, Criteria, GapDemo, RankPlan, RecoveryRequest, DEFAULT_MAX_EMBEDDED_ELEMENTS,
};
use crate::rank::{DEFAULT_EPSILON_REL, DEFAULT_MAX_TOTAL_SWEEPS, DEFAULT_TOL_REL};
use crate::tensor::{DenseTensor, MaskTensor, Shape};
use crate::tucker::FitConfig;

#[derive(Debug, Parser)]
#[command(
    name = "htc",
    version,
    about = "Tensor completion by delay embedding and low-rank Tucker decomposition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fill the missing entries of a tensor or image.
    Recover(RecoverArgs),
    /// Delay-embed a tensor and write the embedded tensor.
    Embed(EmbedArgs),
    /// Map an embedded tensor back to its original shape.
    Invert(InvertArgs),
    /// Write a mask file for a shape or an existing data file.
    Mask(MaskArgs),
    /// Compare two tensors or images.
    Metrics(MetricsArgs),
    /// Gap-filling experiment on a damped sinusoid, written as CSV.
    DemoSignal(DemoArgs),
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Data file (.pgm, .ppm or HTEN).
    #[arg(long)]
    pub input: PathBuf,
    /// Mask file; nonzero means observed. Omit when every entry is observed.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Window size per mode, e.g. 32,32,1.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<usize>,
    /// Fixed ranks, one per embedded mode (twice the data order).
    #[arg(long, value_delimiter = ',', conflicts_with = "rank_seq")]
    pub ranks: Option<Vec<usize>>,
    /// Rank sequences per embedded mode: modes separated by ';', entries by ','.
    #[arg(long)]
    pub rank_seq: Option<String>,
    /// Target cost as a fraction of the observed embedded energy.
    #[arg(long, default_value_t = DEFAULT_EPSILON_REL)]
    pub epsilon: f64,
    /// Plateau threshold as a fraction of the observed embedded energy.
    #[arg(long, default_value_t = DEFAULT_TOL_REL)]
    pub tol: f64,
    /// Sweep budget (total for rank increment, per fit for fixed ranks).
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Estimate, unclamped for HTEN, clamped and rounded for images.
    #[arg(long)]
    pub output: PathBuf,
    /// Extra image copy of the estimate.
    #[arg(long)]
    pub output_image: Option<PathBuf>,
    /// Cost trace as CSV.
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
    /// Ground truth; prints PSNR, SNR and SSIM of the estimate.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 255.0)]
    pub peak: f64,
    /// Refuse embeddings with more elements than this.
    #[arg(long, default_value_t = DEFAULT_MAX_EMBEDDED_ELEMENTS)]
    pub max_elements: u128,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<usize>,
    /// Embedded tensor (HTEN).
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_EMBEDDED_ELEMENTS)]
    pub max_elements: u128,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Embedded tensor; the original shape is read off its dimensions.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    /// Shape of the mask, e.g. 64,64,3.
    #[arg(
        long,
        value_delimiter = ',',
        required_unless_present = "like",
        conflicts_with = "like"
    )]
    pub shape: Option<Vec<usize>>,
    /// Take the shape from this data file.
    #[arg(long)]
    pub like: Option<PathBuf>,
    /// random:p | slices:mode,start,count | random-slices:mode,p | rect:r,c,h,w;...
    #[arg(long)]
    pub pattern: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub est: PathBuf,
    #[arg(long)]
    pub psnr: bool,
    #[arg(long)]
    pub ssim: bool,
    #[arg(long)]
    pub snr: bool,
    #[arg(long, default_value_t = 255.0)]
    pub peak: f64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 200)]
    pub length: usize,
    /// 0-based index of the first missing sample.
    #[arg(long, default_value_t = 85)]
    pub gap_start: usize,
    #[arg(long, default_value_t = 30)]
    pub gap_len: usize,
    #[arg(long, default_value_t = 50)]
    pub tau: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `"1,2,4;1,2;3"` into per-mode sequences.
pub fn parse_rank_sequences(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split(';')
        .map(|mode| {
            mode.split(',')
                .map(|v| {
                    v.trim().parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad rank {v:?} in --rank-seq"))
                    })
                })
                .collect()
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn load_or_full_mask(path: Option<&Path>, shape: &Shape) -> Result<MaskTensor> {
    match path {
        Some(p) => load_mask(p, shape),
        None => Ok(MaskTensor::all_observed(shape.clone())),
    }
}

fn run_recover(a: RecoverArgs) -> Result<()> {
    let data = load(&a.input)?;
    let mask = load_or_full_mask(a.mask.as_deref(), data.shape())?;
    let plan = match (&a.ranks, &a.rank_seq) {
        (Some(ranks), _) => RankPlan::Fixed {
            ranks: ranks.clone(),
            config: FitConfig {
                max_sweeps: a.max_sweeps.unwrap_or(FitConfig::default().max_sweeps),
                ..FitConfig::default()
            },
        },
        (None, seq) => RankPlan::Increment {
            sequences: seq.as_deref().map(parse_rank_sequences).transpose()?,
            criteria: Criteria::Relative {
                epsilon: a.epsilon,
                tol: a.tol,
                max_total_sweeps: a.max_sweeps.unwrap_or(DEFAULT_MAX_TOTAL_SWEEPS),
            },
        },
    };
    let req = RecoveryRequest {
        data,
        mask,
        taus: a.tau.clone(),
        plan,
        seed: a.seed,
        max_embedded_elements: a.max_elements,
    };
    let report = recover(&req)?;
    save(&a.output, &report.estimate)?;
    if let Some(p) = &a.output_image {
        save(p, &report.estimate)?;
    }
    if let Some(p) = &a.trace_csv {
        write_text(p, &trace_csv(&report.trace, &report.history))?;
    }

    let ranks: Vec<String> = report.ranks.iter().map(usize::to_string).collect();
    println!("embedded_shape {}", report.spec.embedded_shape());
    println!("ranks {}", ranks.join(","));
    println!("sweeps {}", report.trace.points().last().map_or(0, |p| p.0));
    if let Some(c) = report.trace.last() {
        println!("cost {c}");
    }
    if let Some(t) = report.termination {
        println!("termination {t}");
    }
    if let Some(p) = &a.truth {
        let q = report.evaluate(&load(p)?, a.peak)?;
        println!("psnr {}", q.psnr);
        println!("snr {}", q.snr);
        if let Some(s) = q.ssim {
            println!("ssim {s}");
        }
    }
    Ok(())
}

fn run_embed(a: EmbedArgs) -> Result<()> {
    let x = load(&a.input)?;
    crate::pipeline::plan_embedding(x.shape(), &a.tau, a.max_elements)?;
    let (h, spec) = mdt(&x, &a.tau)?;
    save(&a.output, &h)?;
    println!("embedded_shape {}", spec.embedded_shape());
    Ok(())
}

fn run_invert(a: InvertArgs) -> Result<()> {
    let h = load(&a.input)?;
    let spec = EmbeddingSpec::from_embedded_shape(h.shape())?;
    let x = inverse_mdt(&h, &spec)?;
    save(&a.output, &x)?;
    println!("shape {}", x.shape());
    Ok(())
}

fn run_mask(a: MaskArgs) -> Result<()> {
    let shape = match (&a.shape, &a.like) {
        (Some(d), _) => Shape::new(d.clone())?,
        (None, Some(p)) => load(p)?.shape().clone(),
        (None, None) => {
            return Err(Error::InvalidParameter("give --shape or --like".into()));
        }
    };
    let pattern: MaskPattern = a.pattern.parse()?;
    let q = make_mask(&shape, &pattern, a.seed)?;
    save_mask(&a.output, &q)?;
    println!("missing {}", q.as_slice().len() - q.observed_count());
    Ok(())
}

fn ssim_of(reference: &DenseTensor, estimate: &DenseTensor, peak: f64) -> Result<f64> {
    let p = SsimParams {
        dynamic_range: peak,
        ..SsimParams::default()
    };
    mean_ssim(reference, estimate, 2, &p)
}

fn run_metrics(a: MetricsArgs) -> Result<()> {
    let r = load(&a.reference)?;
    let e = load(&a.est)?;
    let all = !(a.psnr || a.ssim || a.snr);
    let mut rows: Vec<(&str, f64)> = Vec::new();
    if a.psnr || all {
        rows.push(("psnr", psnr(&r, &e, a.peak)?));
    }
    if a.ssim || all {
        rows.push(("ssim", ssim_of(&r, &e, a.peak)?));
    }
    if a.snr || all {
        rows.push(("snr", snr(&r, &e)?));
    }
    if let [(_, v)] = rows.as_slice() {
        println!("{v}");
    } else {
        for (name, v) in rows {
            println!("{name} {v}");
        }
    }
    Ok(())
}

fn run_demo(a: DemoArgs) -> Result<()> {
    let demo = GapDemo {
        length: a.length,
        gap_start: a.gap_start,
        gap_len: a.gap_len,
        tau: a.tau,
        noise_std: a.noise,
        epsilon_rel: a.epsilon,
        seed: a.seed,
    };
    let res = demo.run()?;
    let csv = res.to_csv();
    match &a.output {
        Some(p) => {
            write_text(p, &csv)?;
            println!("rmse_recovered {}", res.rmse_recovered);
            println!("rmse_linear {}", res.rmse_linear);
            println!("amplitude {}", res.amplitude);
        }
        None => print!("{csv}"),
    }
    Ok(())
}

/// Executes an already parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Recover(a) => run_recover(a),
        Command::Embed(a) => run_embed(a),
        Command::Invert(a) => run_invert(a),
        Command::Mask(a) => run_mask(a),
        Command::Metrics(a) => run_metrics(a),
        Command::DemoSignal(a) => run_demo(a),
    }
}

/// Entry point for the `htc` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .map(|l| l.trim_start_matches("error: ").trim())
                .find(|l| !l.is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("error: usage: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
