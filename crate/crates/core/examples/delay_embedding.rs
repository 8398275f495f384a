//! Delay-embed a short series and a small image, then map them back.

use hankel_tucker::mdt::{delay_embed_vector, duplication_counts, inverse_mdt, mdt};
use hankel_tucker::tensor::{frobenius_norm, DenseTensor, Shape};

fn main() -> hankel_tucker::Result<()> {
    let series = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let h = delay_embed_vector(&series, 3)?;
    println!("windows of length 3 (one per column):{h}");
    println!(
        "duplication counts {:?}",
        duplication_counts(series.len(), 3)?
    );

    // every entry of the embedded tensor is x[i1 + j1, i2 + j2, c]
    let img = DenseTensor::from_fn(Shape::new(vec![16, 12, 3])?, |i| {
        (i[0] as f64 * 0.4).sin() + (i[1] as f64 * 0.7).cos() + i[2] as f64
    });
    let (embedded, spec) = mdt(&img, &[4, 3, 1])?;
    println!("{} -> {}", img.shape(), embedded.shape());
    println!(
        "expansion factor {:.1}",
        embedded.len() as f64 / img.len() as f64
    );

    let back = inverse_mdt(&embedded, &spec)?;
    println!(
        "round-trip error {:.2e}",
        frobenius_norm(&back.sub(&img)?) / frobenius_norm(&img)
    );
    Ok(())
}
