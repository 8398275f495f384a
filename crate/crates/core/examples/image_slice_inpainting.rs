//! Fill five missing columns of a synthetic 64x64 color texture.
//!
//! Run with `cargo run --release --example image_slice_inpainting [out_dir]`;
//! when an output directory is given, the truth, the masked input and the
//! estimate are written there as PPM files.

use std::path::PathBuf;

use hankel_tucker::io::save;
use hankel_tucker::mask::{make_mask, MaskPattern};
use hankel_tucker::metrics::psnr;
use hankel_tucker::signal::sinusoid_texture;
use hankel_tucker::tensor::masked;
use hankel_tucker::{recover, RecoveryRequest};

fn main() -> hankel_tucker::Result<()> {
    let truth = sinusoid_texture(64, 64, 3)?;
    let pattern = MaskPattern::ContiguousSlices {
        mode: 1,
        start: 30,
        count: 5,
    };
    let mask = make_mask(truth.shape(), &pattern, 0)?;
    let input = masked(&mask, &truth)?;

    let report = recover(&RecoveryRequest::new(input.clone(), mask, vec![8, 8, 1]))?;
    let q = report.evaluate(&truth, 255.0)?;

    println!("embedded shape {}", report.spec.embedded_shape());
    println!("final ranks    {:?}", report.ranks);
    println!("termination    {:?}", report.termination);
    println!(
        "sweeps         {}",
        report.trace.points().last().map_or(0, |p| p.0)
    );
    println!("zero-fill PSNR {:.2} dB", psnr(&truth, &input, 255.0)?);
    println!("recovered PSNR {:.2} dB", q.psnr);
    if let Some(s) = q.ssim {
        println!("recovered SSIM {s:.4}");
    }
    println!("elapsed        {:.1?}", report.elapsed);

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir)?;
        save(dir.join("truth.ppm"), &truth)?;
        save(dir.join("input.ppm"), &input)?;
        save(dir.join("recovered.ppm"), &report.estimate)?;
    }
    Ok(())
}
