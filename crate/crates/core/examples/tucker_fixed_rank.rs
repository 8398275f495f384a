//! Fixed-rank Tucker completion of a low-rank tensor with 40% of its entries
//! hidden.

use hankel_tucker::mask::{make_mask, MaskPattern};
use hankel_tucker::tensor::{frobenius_norm, masked, DenseTensor, Shape};
use hankel_tucker::tucker::{tucker_complete, FitConfig};

fn main() -> hankel_tucker::Result<()> {
    // a sum of two separable terms has multilinear rank (2, 2, 2)
    let shape = Shape::new(vec![12, 10, 8])?;
    let truth = DenseTensor::from_fn(shape.clone(), |i| {
        let (a, b, c) = (i[0] as f64, i[1] as f64, i[2] as f64);
        (0.3 * a).sin() * (0.2 * b).cos() * (1.0 + 0.1 * c)
            + 0.5 * (0.1 * a).cos() * (0.4 * b).sin() * (0.3 * c).sin()
    });
    let mask = make_mask(&shape, &MaskPattern::RandomVoxels { missing: 0.4 }, 1)?;

    let cfg = FitConfig {
        max_sweeps: 2000,
        conv_tol: 1e-14,
        ..FitConfig::default()
    };
    let (model, trace) = tucker_complete(&masked(&mask, &truth)?, &mask, &[2, 2, 2], &cfg)?;

    let costs: Vec<f64> = trace.costs().collect();
    println!("sweeps {}", trace.points().last().map_or(0, |p| p.0));
    println!("cost {:.3e} -> {:.3e}", costs[0], costs[costs.len() - 1]);
    println!("monotone {}", trace.is_non_increasing(1e-12));
    for (m, u) in model.factors().iter().enumerate() {
        println!(
            "factor {m}: {}x{}, orthonormality error {:.1e}",
            u.rows(),
            u.rank(),
            u.orthonormality_error()
        );
    }
    let err = frobenius_norm(&model.reconstruct().sub(&truth)?) / frobenius_norm(&truth);
    println!("relative error on the full tensor {err:.2e}");
    Ok(())
}
