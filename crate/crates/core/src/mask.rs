//! Missing-data patterns.
//!
//! Text form, as accepted by the CLI (`mode` is a 0-based axis, fractions are
//! of missing entries):
//!
//! ```text
//! random:0.99                 random voxels
//! slices:1,30,5               mode 1, indices 30..35 missing
//! random-slices:2,0.5         half of the slices along mode 2
//! rect:10,12,4,6;30,2,3,3     row,col,height,width rectangles on modes 0 and 1
//! ```

use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{MaskTensor, Shape};

/// Axis-aligned occlusion over the first two modes, covering every index of
/// the remaining modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaskPattern {
    RandomVoxels {
        missing: f64,
    },
    ContiguousSlices {
        mode: usize,
        start: usize,
        count: usize,
    },
    RandomSlices {
        mode: usize,
        missing: f64,
    },
    Rectangles(Vec<Rect>),
}

fn check_fraction(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidParameter(format!(
            "missing fraction {p} outside [0, 1]"
        )))
    }
}

/// Deterministic mask for `pattern` on `shape`. Random patterns hide exactly
/// `round(fraction * n)` entries (or slices).
pub fn make_mask(shape: &Shape, pattern: &MaskPattern, seed: u64) -> Result<MaskTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *pattern {
        MaskPattern::RandomVoxels { missing } => {
            let n = shape.len();
            let k = (check_fraction(missing)? * n as f64).round() as usize;
            let mut flags = vec![true; n];
            for i in sample(&mut rng, n, k) {
                flags[i] = false;
            }
            MaskTensor::new(shape.clone(), flags)
        }
        MaskPattern::ContiguousSlices { mode, start, count } => {
            shape.check_mode(mode)?;
            let len = shape.dims()[mode];
            if start + count > len {
                return Err(Error::InvalidParameter(format!(
                    "slices {start}..{} exceed mode {mode} of size {len}",
                    start + count
                )));
            }
            Ok(MaskTensor::from_fn(shape.clone(), |i| {
                !(start..start + count).contains(&i[mode])
            }))
        }
        MaskPattern::RandomSlices { mode, missing } => {
            shape.check_mode(mode)?;
            let len = shape.dims()[mode];
            let k = (check_fraction(missing)? * len as f64).round() as usize;
            let mut hidden = vec![false; len];
            for i in sample(&mut rng, len, k) {
                hidden[i] = true;
            }
            Ok(MaskTensor::from_fn(shape.clone(), |i| !hidden[i[mode]]))
        }
        MaskPattern::Rectangles(ref rects) => {
            if shape.order() < 2 {
                return Err(Error::InvalidParameter(
                    "rectangles need a tensor with at least two modes".into(),
                ));
            }
            let (rows, cols) = (shape.dims()[0], shape.dims()[1]);
            for r in rects {
                if r.row + r.height > rows || r.col + r.width > cols {
                    return Err(Error::InvalidParameter(format!(
                        "rectangle {r:?} exceeds the {rows}x{cols} plane"
                    )));
                }
            }
            Ok(MaskTensor::from_fn(shape.clone(), |i| {
                !rects.iter().any(|r| {
                    (r.row..r.row + r.height).contains(&i[0])
                        && (r.col..r.col + r.width).contains(&i[1])
                })
            }))
        }
    }
}

fn numbers<T: FromStr>(s: &str, want: usize, what: &str) -> Result<Vec<T>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != want {
        return Err(Error::InvalidParameter(format!(
            "{what} expects {want} comma-separated values, got {s:?}"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number {p:?} in {what}")))
        })
        .collect()
}

impl FromStr for MaskPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("mask pattern {s:?} lacks ':'")))?;
        match kind {
            "random" => Ok(MaskPattern::RandomVoxels {
                missing: check_fraction(numbers::<f64>(args, 1, kind)?[0])?,
            }),
            "slices" => {
                let v = numbers::<usize>(args, 3, kind)?;
                Ok(MaskPattern::ContiguousSlices {
                    mode: v[0],
                    start: v[1],
                    count: v[2],
                })
            }
            "random-slices" => {
                let (mode, p) = args.split_once(',').ok_or_else(|| {
                    Error::InvalidParameter("random-slices expects mode,fraction".into())
                })?;
                Ok(MaskPattern::RandomSlices {
                    mode: numbers::<usize>(mode, 1, kind)?[0],
                    missing: check_fraction(numbers::<f64>(p, 1, kind)?[0])?,
                })
            }
            "rect" => args
                .split(';')
                .map(|r| {
                    let v = numbers::<usize>(r, 4, kind)?;
                    Ok(Rect {
                        row: v[0],
                        col: v[1],
                        height: v[2],
                        width: v[3],
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(MaskPattern::Rectangles),
            other => Err(Error::InvalidParameter(format!(
                "unknown mask pattern {other:?}"
            ))),
        }
    }
}
