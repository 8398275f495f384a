//! Synthetic fixtures: 1-D signals, a sinusoidal texture image, and the
//! linear-interpolation baseline used for comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};

/// One sinusoid `amplitude * sin(omega * t + phase)`, `t` in samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoid {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalKind {
    /// `amplitude * exp(-decay * t) * sin(omega * t + phase)`.
    DampedSinusoid {
        amplitude: f64,
        decay: f64,
        omega: f64,
        phase: f64,
    },
    SumOfSinusoids(Vec<Sinusoid>),
    /// First coordinate of the Lorenz system (sigma 10, rho 28, beta 8/3),
    /// integrated by classic RK4 with step `dt` and sampled every step after
    /// discarding `burn_in` steps.
    Lorenz {
        dt: f64,
        initial: [f64; 3],
        burn_in: usize,
    },
}

impl SignalKind {
    /// The damped sinusoid used by the gap-filling demo and tests.
    pub fn demo() -> Self {
        SignalKind::DampedSinusoid {
            amplitude: 1.0,
            decay: 0.01,
            omega: 2.0 * std::f64::consts::PI / 25.0,
            phase: 0.3,
        }
    }
}

const LORENZ_SIGMA: f64 = 10.0;
const LORENZ_RHO: f64 = 28.0;
const LORENZ_BETA: f64 = 8.0 / 3.0;

fn lorenz(s: [f64; 3]) -> [f64; 3] {
    [
        LORENZ_SIGMA * (s[1] - s[0]),
        s[0] * (LORENZ_RHO - s[2]) - s[1],
        s[0] * s[1] - LORENZ_BETA * s[2],
    ]
}

fn rk4_step(s: [f64; 3], dt: f64) -> [f64; 3] {
    let add =
        |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let k1 = lorenz(s);
    let k2 = lorenz(add(s, k1, dt / 2.0));
    let k3 = lorenz(add(s, k2, dt / 2.0));
    let k4 = lorenz(add(s, k3, dt));
    std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Samples `length` values of `kind` plus i.i.d. Gaussian noise of standard
/// deviation `noise_std` drawn from `seed`.
pub fn generate_signal(
    kind: &SignalKind,
    length: usize,
    noise_std: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::InvalidParameter(
            "signal length must be positive".into(),
        ));
    }
    if !(noise_std >= 0.0) || !noise_std.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise level {noise_std} is invalid"
        )));
    }
    let mut values: Vec<f64> = match kind {
        SignalKind::DampedSinusoid {
            amplitude,
            decay,
            omega,
            phase,
        } => (0..length)
            .map(|t| {
                let t = t as f64;
                amplitude * (-decay * t).exp() * (omega * t + phase).sin()
            })
            .collect(),
        SignalKind::SumOfSinusoids(parts) => (0..length)
            .map(|t| {
                parts
                    .iter()
                    .map(|s| s.amplitude * (s.omega * t as f64 + s.phase).sin())
                    .sum()
            })
            .collect(),
        SignalKind::Lorenz {
            dt,
            initial,
            burn_in,
        } => {
            if !(*dt > 0.0) {
                return Err(Error::InvalidParameter(
                    "Lorenz step must be positive".into(),
                ));
            }
            let mut s = *initial;
            for _ in 0..*burn_in {
                s = rk4_step(s, *dt);
            }
            (0..length)
                .map(|_| {
                    let x = s[0];
                    s = rk4_step(s, *dt);
                    x
                })
                .collect()
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("generated signal"));
    }
    if noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_std).expect("validated above");
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(values)
}

/// Fills unobserved samples by linear interpolation between the nearest
/// observed neighbours, holding the end values outside the observed range.
pub fn linear_fill(values: &[f64], observed: &[bool]) -> Result<Vec<f64>> {
    if values.len() != observed.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values, {} flags",
            values.len(),
            observed.len()
        )));
    }
    let known: Vec<usize> = (0..values.len()).filter(|&i| observed[i]).collect();
    let (Some(&first), Some(&last)) = (known.first(), known.last()) else {
        return Err(Error::InvalidParameter(
            "no observed samples to interpolate".into(),
        ));
    };
    let mut out = values.to_vec();
    out[..first].fill(values[first]);
    out[last + 1..].fill(values[last]);
    for w in known.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (k, o) in out[a + 1..b].iter_mut().enumerate() {
            let s = (k + 1) as f64 / (b - a) as f64;
            *o = values[a] * (1.0 - s) + values[b] * s;
        }
    }
    Ok(out)
}

/// `rows x cols x channels` image in `[0, 255]`: a mid-gray level plus a few
/// 2-D plane waves with per-channel phases. Hankel-low-rank by construction.
pub fn sinusoid_texture(rows: usize, cols: usize, channels: usize) -> Result<DenseTensor> {
    // (amplitude, row frequency, column frequency, phase step per channel)
    const WAVES: [(f64, f64, f64, f64); 3] = [
        (50.0, 0.21, 0.37, 0.9),
        (35.0, -0.43, 0.16, 2.1),
        (20.0, 0.07, -0.61, 0.4),
    ];
    let shape = Shape::new(vec![rows, cols, channels])?;
    Ok(DenseTensor::from_fn(shape, |i| {
        let (r, c, ch) = (i[0] as f64, i[1] as f64, i[2] as f64);
        128.0
            + WAVES
                .iter()
                .map(|&(a, fr, fc, ph)| a * (fr * r + fc * c + ph * (ch + 1.0)).cos())
                .sum::<f64>()
    }))
}
