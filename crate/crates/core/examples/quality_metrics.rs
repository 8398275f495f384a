//! PSNR, SNR and SSIM of a few degraded versions of a texture.

use hankel_tucker::metrics::{mean_ssim, psnr, snr, SsimParams, SsimWindow};
use hankel_tucker::signal::sinusoid_texture;
use hankel_tucker::tensor::DenseTensor;

fn report(name: &str, truth: &DenseTensor, est: &DenseTensor) -> hankel_tucker::Result<()> {
    let p = SsimParams::default();
    println!(
        "{name:<12} PSNR {:>7.2} dB  SNR {:>7.2} dB  SSIM {:.4}",
        psnr(truth, est, 255.0)?,
        snr(truth, est)?,
        mean_ssim(truth, est, 2, &p)?
    );
    Ok(())
}

fn main() -> hankel_tucker::Result<()> {
    let truth = sinusoid_texture(48, 48, 3)?;
    report("identical", &truth, &truth)?;
    report("brighter", &truth, &truth.map(|v| (v + 10.0).min(255.0)))?;
    report(
        "contrast",
        &truth,
        &truth.map(|v| 128.0 + 0.7 * (v - 128.0)),
    )?;
    let blocky = DenseTensor::from_fn(truth.shape().clone(), |i| {
        truth.get(&[i[0] / 4 * 4, i[1] / 4 * 4, i[2]])
    });
    report("blocky", &truth, &blocky)?;

    let uniform = SsimParams {
        window: 7,
        kind: SsimWindow::Uniform,
        ..SsimParams::default()
    };
    println!(
        "blocky, 7x7 box window SSIM {:.4}",
        mean_ssim(&truth, &blocky, 2, &uniform)?
    );
    Ok(())
}
