//! Acceptance checks. Prints one PASS/FAIL line per check and exits nonzero
//! if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{
    bernoulli_mask, gaussian_tensor, naive_ssim, planted_model, rel_error_on, rng, shape,
};
use hankel_tucker::io::{save, save_mask};
use hankel_tucker::mask::{make_mask, MaskPattern};
use hankel_tucker::mdt::{inverse_mdt, mdt, EmbeddingSpec};
use hankel_tucker::metrics::{psnr, snr, ssim, SsimParams};
use hankel_tucker::pipeline::GapDemo;
use hankel_tucker::rank::{complete_with_rank_increment, default_rank_sequences, StoppingCriteria};
use hankel_tucker::signal::sinusoid_texture;
use hankel_tucker::tensor::{frobenius_norm, masked, DenseTensor};
use hankel_tucker::tucker::{tucker_complete, FitConfig};
use hankel_tucker::{recover, RecoveryRequest};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, budget: Duration, detail: String) -> Outcome {
    if elapsed <= budget {
        Ok(format!("{detail}, {elapsed:.2?}"))
    } else {
        Err(format!("{detail}, took {elapsed:.2?} (budget {budget:?})"))
    }
}

fn mdt_round_trip() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let order = r.random_range(1..=4);
        let dims: Vec<usize> = (0..order).map(|_| r.random_range(1..=9)).collect();
        let taus: Vec<usize> = dims.iter().map(|&d| r.random_range(1..=d)).collect();
        let x = gaussian_tensor(&dims, &mut r);
        let (h, spec) = mdt(&x, &taus).map_err(|e| e.to_string())?;
        let back = inverse_mdt(&h, &spec).map_err(|e| e.to_string())?;
        let rel = frobenius_norm(&back.sub(&x).unwrap()) / frobenius_norm(&x);
        worst = worst.max(rel);
    }
    check(worst <= 1e-10, format!("worst relative error {worst:.2e}"))
        .and_then(|d| within(start.elapsed(), Duration::from_secs(10), d))
}

fn embedded_shape() -> Outcome {
    let spec =
        EmbeddingSpec::new(shape(&[256, 256, 3]), &[32, 32, 1]).map_err(|e| e.to_string())?;
    let got = spec.embedded_shape().dims().to_vec();
    check(
        got == [32, 225, 32, 225, 1, 3],
        format!("{}", spec.embedded_shape()),
    )
}

fn monotonicity() -> Outcome {
    let start = Instant::now();
    let mut worst_orth = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng(1000 + seed);
        let order = r.random_range(3..=4);
        let dims: Vec<usize> = (0..order).map(|_| r.random_range(2..=7)).collect();
        let ranks: Vec<usize> = dims.iter().map(|&d| r.random_range(1..=d.min(4))).collect();
        let missing = r.random_range(0.0..=0.95);
        let t = gaussian_tensor(&dims, &mut r);
        let t = t.map(|v| v / frobenius_norm(&t));
        let q = bernoulli_mask(&dims, missing, &mut r);
        let cfg = FitConfig {
            max_sweeps: 200,
            seed,
            ..FitConfig::default()
        };
        let (model, trace) = tucker_complete(&t, &q, &ranks, &cfg).map_err(|e| e.to_string())?;
        if !trace.is_non_increasing(1e-12) {
            return Err(format!(
                "instance {seed} ({dims:?}, ranks {ranks:?}) increased"
            ));
        }
        for u in model.factors() {
            worst_orth = worst_orth.max(u.orthonormality_error());
        }
    }
    check(
        worst_orth <= 1e-10,
        format!("100 traces non-increasing, worst orthonormality {worst_orth:.1e}"),
    )
    .and_then(|d| within(start.elapsed(), Duration::from_secs(120), d))
}

fn planted_oracle() -> Outcome {
    let start = Instant::now();
    let dims = [10, 12, 10];
    let mut r = rng(4);
    let truth = planted_model(&dims, &[2, 3, 2], &mut r).reconstruct();
    let q = bernoulli_mask(&dims, 0.3, &mut r);
    let hidden: Vec<bool> = q.complement().as_slice().to_vec();

    let cfg = FitConfig {
        max_sweeps: 5000,
        conv_tol: 1e-16,
        ..FitConfig::default()
    };
    let (fixed, _) = tucker_complete(&truth, &q, &[2, 3, 2], &cfg).map_err(|e| e.to_string())?;
    let fixed_err = rel_error_on(&truth, &fixed.reconstruct(), &hidden);

    let criteria =
        StoppingCriteria::relative(&truth, &q, 1e-12, 1e-14, 5000).map_err(|e| e.to_string())?;
    let fit = complete_with_rank_increment(
        &truth,
        &q,
        default_rank_sequences(truth.shape()),
        &criteria,
        0,
    )
    .map_err(|e| e.to_string())?;
    let ranks = fit.model.ranks();
    let inc_err = rel_error_on(&truth, &fit.model.reconstruct(), &hidden);
    let covers = ranks.iter().zip([2, 3, 2]).all(|(&a, b)| a >= b);
    check(
        fixed_err < 1e-5 && covers && inc_err < 1e-3,
        format!("fixed {fixed_err:.1e}, increment {inc_err:.1e} at ranks {ranks:?}"),
    )
    .and_then(|d| within(start.elapsed(), Duration::from_secs(30), d))
}

fn signal_recovery() -> Outcome {
    let start = Instant::now();
    let res = GapDemo::default().run().map_err(|e| e.to_string())?;
    let (rec, lin) = (
        res.rmse_recovered / res.amplitude,
        res.rmse_linear / res.amplitude,
    );
    check(
        rec < 0.05 && lin > 0.25,
        format!(
            "gap RMSE {:.2e} of amplitude vs {:.1}% for linear fill",
            rec,
            100.0 * lin
        ),
    )
    .and_then(|d| within(start.elapsed(), Duration::from_secs(60), d))
}

fn slice_inpainting() -> Outcome {
    let start = Instant::now();
    let truth = sinusoid_texture(64, 64, 3).map_err(|e| e.to_string())?;
    let pattern = MaskPattern::ContiguousSlices {
        mode: 1,
        start: 30,
        count: 5,
    };
    let q = make_mask(truth.shape(), &pattern, 0).map_err(|e| e.to_string())?;
    let input = masked(&q, &truth).map_err(|e| e.to_string())?;
    let report = recover(&RecoveryRequest::new(input.clone(), q, vec![8, 8, 1]))
        .map_err(|e| e.to_string())?;
    let got = psnr(&truth, &report.estimate, 255.0).map_err(|e| e.to_string())?;
    let base = psnr(&truth, &input, 255.0).map_err(|e| e.to_string())?;
    check(
        got >= 30.0 && got >= base + 10.0,
        format!("PSNR {got:.2} dB vs zero-fill {base:.2} dB"),
    )
    .and_then(|d| within(start.elapsed(), Duration::from_secs(300), d))
}

fn metric_correctness() -> Outcome {
    let mut r = rng(7);
    let mut worst_db = 0.0f64;
    for _ in 0..100 {
        let a = gaussian_tensor(&[9, 11], &mut r).map(|v| 120.0 + 40.0 * v);
        let b = gaussian_tensor(&[9, 11], &mut r).map(|v| 120.0 + 40.0 * v);
        let n = a.len() as f64;
        let se: f64 = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).powi(2))
            .sum();
        let energy: f64 = a.as_slice().iter().map(|v| v * v).sum();
        let want_psnr = 10.0 * (255.0f64 * 255.0 / (se / n)).log10();
        let want_snr = 10.0 * (energy / se).log10();
        worst_db = worst_db
            .max((psnr(&a, &b, 255.0).unwrap() - want_psnr).abs())
            .max((snr(&a, &b).unwrap() - want_snr).abs());
    }
    let p = SsimParams::default();
    let x = DenseTensor::from_fn(shape(&[16, 16]), |i| (i[0] * 11 + i[1] * 5) as f64 % 256.0);
    let y = DenseTensor::from_fn(shape(&[16, 16]), |i| {
        128.0 + 100.0 * ((i[0] as f64) * 0.6).sin() * ((i[1] as f64) * 0.25).cos()
    });
    let z = DenseTensor::from_fn(shape(&[16, 16]), |_| r.random_range(0.0..255.0));
    let self_ssim = ssim(&x, &x, &p).unwrap();
    let mut worst_ssim = 0.0f64;
    for (a, b) in [(&x, &y), (&y, &z), (&x, &z)] {
        worst_ssim = worst_ssim.max((ssim(a, b, &p).unwrap() - naive_ssim(a, b, &p)).abs());
    }
    check(
        worst_db <= 1e-10 && (self_ssim - 1.0).abs() < 1e-12 && worst_ssim <= 1e-8,
        format!(
            "dB error {worst_db:.1e}, ssim(x,x) = {self_ssim}, naive SSIM diff {worst_ssim:.1e}"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let truth = sinusoid_texture(24, 24, 3).map_err(|e| e.to_string())?;
    let q = make_mask(
        truth.shape(),
        &MaskPattern::RandomVoxels { missing: 0.5 },
        3,
    )
    .map_err(|e| e.to_string())?;
    save(d.join("in.hten"), &masked(&q, &truth).unwrap()).map_err(|e| e.to_string())?;
    save_mask(d.join("mask.hten"), &q).map_err(|e| e.to_string())?;
    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_htc"))
            .args(["recover", "--input"])
            .arg(d.join("in.hten"))
            .arg("--mask")
            .arg(d.join("mask.hten"))
            .args([
                "--tau",
                "4,4,1",
                "--seed",
                "11",
                "--max-sweeps",
                "300",
                "--output",
            ])
            .arg(out)
            .output()
    };
    let (a, b) = (d.join("a.hten"), d.join("b.hten"));
    for out in [&a, &b] {
        let o = run(out).map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).trim().to_string());
        }
    }
    let (ba, bb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    check(
        ba == bb,
        format!("{} bytes, identical: {}", ba.len(), ba == bb),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("MDT round-trip", mdt_round_trip),
        ("embedded-shape reproduction", embedded_shape),
        ("monotonicity suite", monotonicity),
        ("planted-model oracle", planted_oracle),
        ("toy dynamical-signal recovery", signal_recovery),
        ("desk-scale slice inpainting", slice_inpainting),
        ("metric correctness", metric_correctness),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS {} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {} {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
