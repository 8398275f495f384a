//! Build masks, write them next to an image, and read everything back.
//!
//! `cargo run --example masks_and_files [out_dir]` (defaults to a temp directory)

use std::path::PathBuf;

use hankel_tucker::io::{load, load_mask, save, save_mask};
use hankel_tucker::mask::{make_mask, MaskPattern};
use hankel_tucker::signal::sinusoid_texture;
use hankel_tucker::tensor::masked;

fn main() -> hankel_tucker::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("htc-masks"));
    std::fs::create_dir_all(&dir)?;

    let img = sinusoid_texture(32, 40, 3)?.map(f64::round);
    save(dir.join("texture.ppm"), &img)?;

    for (name, text) in [
        ("voxels", "random:0.8"),
        ("columns", "slices:1,10,4"),
        ("rows", "random-slices:0,0.25"),
        ("boxes", "rect:4,4,6,8;20,25,5,5"),
    ] {
        let pattern: MaskPattern = text.parse()?;
        let q = make_mask(img.shape(), &pattern, 7)?;
        // per-channel patterns need a 3-D container
        let file = if matches!(pattern, MaskPattern::RandomVoxels { .. }) {
            dir.join(format!("{name}.hten"))
        } else {
            dir.join(format!("{name}.pgm"))
        };
        save_mask(&file, &q)?;
        let back = load_mask(&file, img.shape())?;
        save(dir.join(format!("{name}_input.ppm")), &masked(&back, &img)?)?;
        println!(
            "{name:<8} {text:<24} missing {:>5.1}%  reloaded equal: {}",
            100.0 * q.missing_fraction(),
            back == q
        );
    }

    let reread = load(dir.join("texture.ppm"))?;
    println!("image round trip exact: {}", reread == img);
    println!("files in {}", dir.display());
    Ok(())
}
