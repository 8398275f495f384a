//! Binary PGM/PPM images and the HTEN tensor container.
//!
//! Images load as `H x W` (PGM, `P5`) or `H x W x 3` (PPM, `P6`) tensors of
//! sample values in `[0, 255]`. Writing clamps to that range and rounds; the
//! header is always `P5|P6\n<W> <H>\n255\n`.
//!
//! HTEN layout, all integers little-endian:
//!
//! ```text
//! b"HTEN" | version: u8 = 1 | order N: u64 | N dims: u64 | prod(dims) values: f64
//! ```
//!
//! Values follow the crate's first-index-fastest order.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, MaskTensor, Shape};

pub const HTEN_MAGIC: &[u8; 4] = b"HTEN";
pub const HTEN_VERSION: u8 = 1;

fn is_image_path(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("pgm" | "ppm")
    )
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("missing or invalid {what} in image header")))
    }
}

/// Decodes a binary PGM or PPM.
pub fn decode_pnm(bytes: &[u8]) -> Result<DenseTensor> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => {
            return Err(Error::Format(
                "not a binary PGM (P5) or PPM (P6) file".into(),
            ))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if !(1..=255).contains(&maxval) {
        return Err(Error::Format(format!(
            "unsupported maxval {maxval} (need 1..=255)"
        )));
    }
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format(
            "header must end with a whitespace byte".into(),
        ));
    }
    cur.pos += 1;
    let shape = if channels == 1 {
        Shape::new(vec![height, width])
    } else {
        Shape::new(vec![height, width, 3])
    }
    .map_err(|_| Error::Format(format!("invalid image size {width}x{height}")))?;
    let payload = bytes
        .get(cur.pos..cur.pos + shape.len())
        .ok_or_else(|| Error::Format("truncated pixel data".into()))?;
    // file order is row-major with interleaved channels
    Ok(DenseTensor::from_fn(shape, |i| {
        let ch = if channels == 1 { 0 } else { i[2] };
        payload[(i[0] * width + i[1]) * channels + ch] as f64
    }))
}

/// Clamp to `[0, 255]` and round half away from zero; NaN maps to 0.
pub fn to_byte(v: f64) -> u8 {
    if v.is_nan() {
        0
    } else {
        v.clamp(0.0, 255.0).round() as u8
    }
}

/// Encodes an `H x W` tensor as PGM or an `H x W x 3` tensor as PPM.
pub fn encode_pnm(t: &DenseTensor) -> Result<Vec<u8>> {
    let (magic, channels) = match t.dims() {
        [_, _] => ("P5", 1),
        [_, _, 3] => ("P6", 3),
        d => {
            return Err(Error::DimensionMismatch(format!(
                "images are HxW or HxWx3, got {d:?}"
            )))
        }
    };
    let (h, w) = (t.dims()[0], t.dims()[1]);
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    out.reserve(h * w * channels);
    for r in 0..h {
        for c in 0..w {
            for ch in 0..channels {
                let v = if channels == 1 {
                    t.get(&[r, c])
                } else {
                    t.get(&[r, c, ch])
                };
                out.push(to_byte(v));
            }
        }
    }
    Ok(out)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode_pnm(&fs::read(path)?)
}

pub fn write_image(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    fs::write(path, encode_pnm(t)?)?;
    Ok(())
}

pub fn encode_hten(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(13 + 8 * (t.order() + t.len()));
    out.extend_from_slice(HTEN_MAGIC);
    out.push(HTEN_VERSION);
    out.extend_from_slice(&(t.order() as u64).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u64(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let chunk = bytes
        .get(*pos..*pos + 8)
        .ok_or_else(|| Error::Format("truncated HTEN header".into()))?;
    *pos += 8;
    Ok(u64::from_le_bytes(chunk.try_into().expect("8 bytes")))
}

pub fn decode_hten(bytes: &[u8]) -> Result<DenseTensor> {
    if bytes.len() < 5 || &bytes[..4] != HTEN_MAGIC {
        return Err(Error::Format("bad HTEN magic".into()));
    }
    if bytes[4] != HTEN_VERSION {
        return Err(Error::Format(format!(
            "unsupported HTEN version {}",
            bytes[4]
        )));
    }
    let mut pos = 5;
    let order = read_u64(bytes, &mut pos)?;
    if order == 0 || order > 64 {
        return Err(Error::Format(format!("implausible tensor order {order}")));
    }
    let dims = (0..order)
        .map(|_| {
            let d = read_u64(bytes, &mut pos)?;
            usize::try_from(d).map_err(|_| Error::Format(format!("dimension {d} too large")))
        })
        .collect::<Result<Vec<_>>>()?;
    let shape = Shape::new(dims).map_err(|e| Error::Format(e.to_string()))?;
    let payload = &bytes[pos..];
    if Some(payload.len()) != shape.len().checked_mul(8) {
        return Err(Error::Format(format!(
            "shape {shape} needs {} value bytes, file has {}",
            shape.len().saturating_mul(8),
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DenseTensor::new(shape, values)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode_hten(&fs::read(path)?)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    fs::write(path, encode_hten(t))?;
    Ok(())
}

/// Reads an image (`.pgm`/`.ppm`) or HTEN file, chosen by extension.
pub fn load(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let path = path.as_ref();
    if is_image_path(path) {
        read_image(path)
    } else {
        read_tensor(path)
    }
}

/// Writes an image (clamped and rounded) or an HTEN file (exact), chosen by extension.
pub fn save(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    let path = path.as_ref();
    if is_image_path(path) {
        write_image(path, t)
    } else {
        write_tensor(path, t)
    }
}

/// Loads a mask for data of shape `data_shape`: nonzero entries are observed. A
/// 2-D mask is broadcast across the channels of `H x W x C` data.
pub fn load_mask(path: impl AsRef<Path>, data_shape: &Shape) -> Result<MaskTensor> {
    let m = load(path)?;
    let flags: Vec<bool> = m.as_slice().iter().map(|&v| v != 0.0).collect();
    if m.shape() == data_shape {
        return MaskTensor::new(data_shape.clone(), flags);
    }
    match (m.dims(), data_shape.dims()) {
        ([h, w], [dh, dw, _]) if h == dh && w == dw => {
            Ok(MaskTensor::from_fn(data_shape.clone(), |i| {
                flags[i[0] + h * i[1]]
            }))
        }
        _ => Err(Error::ShapeMismatch {
            left: m.dims().to_vec(),
            right: data_shape.dims().to_vec(),
        }),
    }
}

/// Writes a mask as 0/255 image or 0/1 HTEN. A `.pgm` target accepts `H x W`
/// masks and `H x W x C` masks that agree across channels.
pub fn save_mask(path: impl AsRef<Path>, q: &MaskTensor) -> Result<()> {
    let path = path.as_ref();
    let scale = if is_image_path(path) { 255.0 } else { 1.0 };
    let dense = q.to_dense().map(|v| v * scale);
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm && q.dims().len() == 3 {
        let (h, w, c) = (q.dims()[0], q.dims()[1], q.dims()[2]);
        let plane = Shape::new(vec![h, w])?;
        let flat = DenseTensor::from_fn(plane, |i| dense.get(&[i[0], i[1], 0]));
        for ch in 1..c {
            for r in 0..h {
                for col in 0..w {
                    if q.get(&[r, col, ch]) != q.get(&[r, col, 0]) {
                        return Err(Error::InvalidParameter(
                            "mask differs across channels; save it as .ppm or HTEN".into(),
                        ));
                    }
                }
            }
        }
        return write_image(path, &flat);
    }
    save(path, &dense)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_ppm() {
        let bytes = b"P6\n2 2\n255\n\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff";
        let t = decode_pnm(bytes).unwrap();
        assert_eq!(t.dims(), &[2, 2, 3]);
        assert!(t.as_slice().iter().all(|&v| v == 255.0));
        assert_eq!(encode_pnm(&t).unwrap(), bytes.to_vec());
    }

    #[test]
    fn pgm_layout_and_comments() {
        let bytes = b"P5 # comment\n3 2\n255\n\x00\x01\x02\x03\x04\x05";
        let t = decode_pnm(bytes).unwrap();
        assert_eq!(t.dims(), &[2, 3]);
        assert_eq!(t.get(&[0, 2]), 2.0);
        assert_eq!(t.get(&[1, 0]), 3.0);
    }

    #[test]
    fn clamp_on_write() {
        let t =
            DenseTensor::new(Shape::new(vec![1, 3]).unwrap(), vec![260.3, -4.0, 127.5]).unwrap();
        let bytes = encode_pnm(&t).unwrap();
        assert_eq!(&bytes[bytes.len() - 3..], &[255, 0, 128]);
    }

    #[test]
    fn malformed_images() {
        assert!(decode_pnm(b"P3\n1 1\n255\n0 0 0").is_err());
        assert!(decode_pnm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pnm(b"P5\n2 2\n65535\n\x00\x00\x00\x00\x00\x00\x00\x00").is_err());
        assert!(decode_pnm(b"P5\n2\n").is_err());
        assert!(decode_pnm(b"P5\n0 2\n255\n").is_err());
    }

    #[test]
    fn hten_rejections() {
        assert!(decode_hten(&[]).is_err());
        let t =
            DenseTensor::new(Shape::new(vec![2, 2]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut bytes = encode_hten(&t);
        assert_eq!(decode_hten(&bytes).unwrap(), t);
        bytes.truncate(bytes.len() - 8);
        assert!(decode_hten(&bytes).is_err());
        let mut bad = encode_hten(&t);
        bad[4] = 9;
        assert!(decode_hten(&bad).is_err());
        let mut magic = encode_hten(&t);
        magic[0] = b'X';
        assert!(decode_hten(&magic).is_err());
    }
}
