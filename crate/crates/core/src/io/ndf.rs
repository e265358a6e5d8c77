//! NDF container: a four-line ASCII header, a blank line, then a
//! little-endian row-major payload.
//!
//! ```text
//! NDF1
//! dims 4 4
//! dtype c128
//! layout standard
//!
//! <payload>
//! ```
//!
//! Real images use `dtype f64` with `layout spatial`; spectra use `dtype c128`
//! with (re, im) interleaved. Physical-layout spectra are read back with the
//! derived frequency metadata since the header does not carry it.

use std::path::Path;

use num_complex::Complex64;

use super::{read_bytes, write_atomic};
use crate::error::{Error, Result};
use crate::image::{sample_count, ComplexSpectrum, Layout, RealImage};

const MAGIC: &str = "NDF1";

/// Contents of an NDF file.
#[derive(Debug, Clone)]
pub enum NdfData {
    Real(RealImage),
    Complex(ComplexSpectrum),
}

impl NdfData {
    pub fn dims(&self) -> &[usize] {
        match self {
            NdfData::Real(img) => img.dims(),
            NdfData::Complex(spec) => spec.dims(),
        }
    }
}

fn format_error(reason: impl Into<String>) -> Error {
    Error::Format {
        format: "NDF",
        reason: reason.into(),
    }
}

fn header(dims: &[usize], dtype: &str, layout: &str) -> Vec<u8> {
    let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    format!("{MAGIC}\ndims {}\ndtype {dtype}\nlayout {layout}\n\n", dims.join(" ")).into_bytes()
}

fn layout_name(layout: Layout) -> &'static str {
    match layout {
        Layout::Standard => "standard",
        Layout::Shifted => "shifted",
        Layout::Physical => "physical",
    }
}

pub fn encode_real(image: &RealImage) -> Vec<u8> {
    let mut out = header(image.dims(), "f64", "spatial");
    out.reserve(image.len() * 8);
    for v in image.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_complex(spectrum: &ComplexSpectrum) -> Vec<u8> {
    let mut out = header(spectrum.dims(), "c128", layout_name(spectrum.layout()));
    out.reserve(spectrum.len() * 16);
    for c in spectrum.data() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn header_line<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines.next().ok_or_else(|| format_error(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| format_error(format!("expected `{key} ...`, found `{line}`")))
}

pub fn decode(bytes: &[u8]) -> Result<NdfData> {
    let end = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| format_error("header not terminated by a blank line"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| format_error("header is not ASCII"))?;
    let payload = &bytes[end + 2..];
    let mut lines = text.split('\n');
    if lines.next() != Some(MAGIC) {
        return Err(format_error("magic mismatch (expected NDF1)"));
    }
    let dims = header_line(&mut lines, "dims")?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| format_error(format!("bad dimension `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    if dims.is_empty() {
        return Err(format_error("no dimensions"));
    }
    let dtype = header_line(&mut lines, "dtype")?;
    let layout = header_line(&mut lines, "layout")?;
    if let Some(extra) = lines.next() {
        return Err(format_error(format!("unexpected header line `{extra}`")));
    }
    let count = sample_count(&dims);
    let width = match dtype {
        "f64" => 8,
        "c128" => 16,
        other => return Err(format_error(format!("unknown dtype `{other}`"))),
    };
    if payload.len() != count * width {
        return Err(format_error(format!(
            "payload length {} bytes, expected {} for dims {dims:?} and dtype {dtype}",
            payload.len(),
            count * width
        )));
    }
    let values = payload.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")));
    match (dtype, layout) {
        ("f64", "spatial") => Ok(NdfData::Real(RealImage::new(dims, values.collect())?)),
        ("c128", "standard" | "shifted" | "physical") => {
            let layout = match layout {
                "standard" => Layout::Standard,
                "shifted" => Layout::Shifted,
                _ => Layout::Physical,
            };
            let flat: Vec<f64> = values.collect();
            let data = flat.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
            Ok(NdfData::Complex(ComplexSpectrum::new(dims, data, layout)?))
        }
        (dtype, layout) => Err(format_error(format!("layout `{layout}` is not valid for dtype {dtype}"))),
    }
}

pub fn read_ndf(path: &Path) -> Result<NdfData> {
    decode(&read_bytes(path)?)
}

pub fn write_ndf_real(path: &Path, image: &RealImage) -> Result<()> {
    write_atomic(path, &encode_real(image))
}

pub fn write_ndf_complex(path: &Path, spectrum: &ComplexSpectrum) -> Result<()> {
    write_atomic(path, &encode_complex(spectrum))
}
