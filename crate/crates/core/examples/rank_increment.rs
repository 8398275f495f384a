//! Automatic rank selection: start at rank one in every mode and grow the mode
//! with the largest projected residual whenever the cost stalls.

use hankel_tucker::mask::{make_mask, MaskPattern};
use hankel_tucker::rank::{complete_with_rank_increment, default_rank_sequences, StoppingCriteria};
use hankel_tucker::tensor::{masked, DenseTensor, Shape};

fn main() -> hankel_tucker::Result<()> {
    let shape = Shape::new(vec![10, 12, 10])?;
    let truth = DenseTensor::from_fn(shape.clone(), |i| {
        let (a, b, c) = (i[0] as f64, i[1] as f64, i[2] as f64);
        (0.5 * a + 0.2 * b).sin() * (0.3 * c).cos() + 0.3 * (0.25 * b).cos()
    });
    let mask = make_mask(&shape, &MaskPattern::RandomVoxels { missing: 0.3 }, 2)?;
    let data = masked(&mask, &truth)?;

    let schedule = default_rank_sequences(&shape);
    println!("rank sequences {:?}", schedule.sequences());
    let criteria = StoppingCriteria::relative(&data, &mask, 1e-10, 1e-12, 5000)?;
    let fit = complete_with_rank_increment(&data, &mask, schedule, &criteria, 0)?;

    for e in &fit.history {
        println!("sweep {:4}: mode {} -> rank {}", e.sweep, e.mode, e.rank);
    }
    println!("termination {}", fit.termination);
    println!("final ranks {:?}", fit.model.ranks());
    println!(
        "final cost {:.3e} (target {:.3e})",
        fit.trace.last().unwrap_or(f64::NAN),
        criteria.epsilon
    );

    let hidden = mask.complement();
    let est = fit.model.reconstruct();
    let (mut num, mut den) = (0.0, 0.0);
    for ((t, x), &h) in truth
        .as_slice()
        .iter()
        .zip(est.as_slice())
        .zip(hidden.as_slice())
    {
        if h {
            num += (t - x) * (t - x);
            den += t * t;
        }
    }
    println!(
        "relative error on hidden entries {:.2e}",
        (num / den).sqrt()
    );
    Ok(())
}
