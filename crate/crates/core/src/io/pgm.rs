//! Grayscale PGM (P2 ASCII and P5 binary). Images are `[height, width]`.

use std::path::Path;

use super::{read_bytes, write_atomic};
use crate::error::{Error, Result};
use crate::image::RealImage;

fn format_error(reason: impl Into<String>) -> Error {
    Error::Format {
        format: "PGM",
        reason: reason.into(),
    }
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn next_number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_error(format!("expected {what}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<RealImage> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(format_error("magic is not P2 or P5")),
    };
    let mut tokens = Tokens { bytes, pos: 2 };
    let width = tokens.next_number("width")?;
    let height = tokens.next_number("height")?;
    let maxval = tokens.next_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(format_error("zero-sized image"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format_error(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width * height;
    let data: Vec<f64> = if binary {
        // exactly one whitespace byte separates the header from the raster
        if !bytes.get(tokens.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(format_error("missing whitespace before raster"));
        }
        let raster = &bytes[tokens.pos + 1..];
        let width_bytes = if maxval > 255 { 2 } else { 1 };
        if raster.len() < count * width_bytes {
            return Err(format_error(format!(
                "raster has {} bytes, expected {}",
                raster.len(),
                count * width_bytes
            )));
        }
        if width_bytes == 2 {
            raster[..count * 2].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]]) as f64).collect()
        } else {
            raster[..count].iter().map(|&b| b as f64).collect()
        }
    } else {
        (0..count).map(|_| tokens.next_number("sample").map(|v| v as f64)).collect::<Result<_>>()?
    };
    if let Some(v) = data.iter().find(|&&v| v > maxval as f64) {
        return Err(format_error(format!("sample {v} exceeds maxval {maxval}")));
    }
    RealImage::new(vec![height, width], data)
}

/// Binary P5 bytes; samples are clamped at 0 and rounded. `maxval` is 255
/// unless a rounded sample exceeds it, then 65535 (16-bit big-endian).
pub fn encode(image: &RealImage) -> Result<Vec<u8>> {
    if image.ndim() != 2 {
        return Err(Error::InvalidShape {
            dims: image.dims().to_vec(),
            reason: "PGM needs a 2D image".into(),
        });
    }
    let (height, width) = (image.dims()[0], image.dims()[1]);
    let quantized: Vec<u16> = image
        .data()
        .iter()
        .map(|&v| if v.is_nan() { 0 } else { v.round().clamp(0.0, 65535.0) as u16 })
        .collect();
    let wide = quantized.iter().any(|&v| v > 255);
    let maxval = if wide { 65535 } else { 255 };
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    for v in quantized {
        if wide {
            out.extend_from_slice(&v.to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    Ok(out)
}

pub fn read_pgm(path: &Path) -> Result<RealImage> {
    decode(&read_bytes(path)?)
}

pub fn write_pgm(path: &Path, image: &RealImage) -> Result<()> {
    write_atomic(path, &encode(image)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_example() {
        let img = decode(b"P2\n# tiny\n2 2\n255\n0 64\n128 255\n").unwrap();
        assert_eq!(img.dims(), &[2, 2]);
        assert_eq!(img.data(), &[0.0, 64.0, 128.0, 255.0]);
    }

    #[test]
    fn sixteen_bit_hand_written() {
        let mut bytes = b"P5 3 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0xff, 0xff, 0x00, 0x07]);
        let img = decode(&bytes).unwrap();
        assert_eq!(img.dims(), &[1, 3]);
        assert_eq!(img.data(), &[258.0, 65535.0, 7.0]);
    }

    #[test]
    fn round_trip_and_widening() {
        let img = RealImage::from_fn(vec![3, 5], |c| (c[0] * 40 + c[1] * 7) as f64).unwrap();
        let bytes = encode(&img).unwrap();
        assert!(bytes.starts_with(b"P5\n5 3\n255\n"));
        assert_eq!(decode(&bytes).unwrap(), img);
        let wide = img.map(|v| v * 100.0);
        let bytes = encode(&wide).unwrap();
        assert!(bytes.starts_with(b"P5\n5 3\n65535\n"));
        assert_eq!(decode(&bytes).unwrap(), wide);
        let clamped = decode(&encode(&RealImage::new(vec![1, 2], vec![-3.0, 2.4]).unwrap()).unwrap()).unwrap();
        assert_eq!(clamped.data(), &[0.0, 2.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode(b"P6\n1 1\n255\n\0\0\0").is_err());
        assert!(decode(b"P5\n2 2\n255\n\0").is_err());
        assert!(decode(b"P2\n1 1\n10\n11\n").is_err());
        assert!(encode(&RealImage::zeros(vec![2, 2, 2]).unwrap()).is_err());
    }
}
