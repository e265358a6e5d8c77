//! JSON manifest describing a pyramid persisted as NDF files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ndf::{read_ndf, write_ndf_complex, NdfData};
use super::{read_bytes, write_atomic};
use crate::error::{Error, Result};
use crate::image::{ComplexSpectrum, Layout};
use crate::pyramid::{level_dims, PyramidCoefficients};
use crate::wavelet::{WaveletFunction, WaveletKind};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const APPROXIMATION_FILE: &str = "approximation.ndf";

/// One detail coefficient file; `path` is relative to the manifest directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub level: usize,
    pub band: usize,
    pub path: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    wavelet: String,
    wavelet_params: BTreeMap<String, f64>,
    levels: usize,
    bands: usize,
    input_dims: Vec<usize>,
    scale_factor: usize,
    entries: Vec<ManifestEntry>,
    approximation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    original_dims: Option<Vec<usize>>,
}

/// Validated manifest contents.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidManifest {
    pub wavelet: WaveletKind,
    pub wavelet_params: BTreeMap<String, f64>,
    pub levels: usize,
    pub bands: usize,
    /// Dims of the (padded) spectrum the pyramid was computed on.
    pub input_dims: Vec<usize>,
    pub scale_factor: usize,
    pub entries: Vec<ManifestEntry>,
    pub approximation: String,
    /// Dims of the image before padding, used to crop reconstructions.
    pub original_dims: Option<Vec<usize>>,
}

impl PyramidManifest {
    pub fn wavelet_function(&self) -> Result<WaveletFunction> {
        WaveletFunction::from_params(self.wavelet, &self.wavelet_params)
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Manifest(msg));
        if self.levels == 0 || self.bands == 0 {
            return bad(format!("levels ({}) and bands ({}) must be positive", self.levels, self.bands));
        }
        if self.scale_factor != 2 {
            return bad(format!("scale_factor must be 2, got {}", self.scale_factor));
        }
        if self.input_dims.is_empty() {
            return bad("input_dims is empty".into());
        }
        if self.entries.len() != self.levels * self.bands {
            return bad(format!(
                "{} entries for levels {} × bands {} (expected {})",
                self.entries.len(),
                self.levels,
                self.bands,
                self.levels * self.bands
            ));
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if e.level == 0 || e.level > self.levels || e.band == 0 || e.band > self.bands {
                return bad(format!("entry (level {}, band {}) out of range", e.level, e.band));
            }
            if !seen.insert((e.level, e.band)) {
                return bad(format!("duplicate entry (level {}, band {})", e.level, e.band));
            }
        }
        if let Some(orig) = &self.original_dims {
            if orig.len() != self.input_dims.len() || orig.iter().zip(&self.input_dims).any(|(&o, &i)| o == 0 || o > i) {
                return bad(format!("original_dims {orig:?} incompatible with input_dims {:?}", self.input_dims));
            }
        }
        self.wavelet_function().map_err(|e| Error::Manifest(e.to_string()))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let raw = RawManifest {
            wavelet: self.wavelet.name().to_string(),
            wavelet_params: self.wavelet_params.clone(),
            levels: self.levels,
            bands: self.bands,
            input_dims: self.input_dims.clone(),
            scale_factor: self.scale_factor,
            entries: self.entries.clone(),
            approximation: self.approximation.clone(),
            original_dims: self.original_dims.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("manifest serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawManifest = serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        let wavelet = raw.wavelet.parse::<WaveletKind>().map_err(|e| Error::Manifest(e.to_string()))?;
        let manifest = PyramidManifest {
            wavelet,
            wavelet_params: raw.wavelet_params,
            levels: raw.levels,
            bands: raw.bands,
            input_dims: raw.input_dims,
            scale_factor: raw.scale_factor,
            entries: raw.entries,
            approximation: raw.approximation,
            original_dims: raw.original_dims,
        };
        manifest.validate()?;
        Ok(manifest)
    }
}

pub fn read_manifest(path: &Path) -> Result<PyramidManifest> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::Manifest("not UTF-8".into()))?;
    PyramidManifest::from_json(text)
}

pub fn write_manifest(path: &Path, manifest: &PyramidManifest) -> Result<()> {
    manifest.validate()?;
    write_atomic(path, manifest.to_json().as_bytes())
}

pub fn detail_file_name(level: usize, band: usize) -> String {
    format!("detail_s{level}_h{band}.ndf")
}

/// Writes every coefficient plus `manifest.json` into `dir`.
///
/// Returns the manifest and the written paths. On failure, files written so
/// far are removed.
pub fn save_pyramid(
    coefficients: &PyramidCoefficients,
    dir: &Path,
    original_dims: Option<Vec<usize>>,
) -> Result<(PyramidManifest, Vec<PathBuf>)> {
    let mut written = Vec::new();
    let result = save_into(coefficients, dir, original_dims, &mut written);
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
    }
    result.map(|m| (m, written))
}

fn save_into(
    coefficients: &PyramidCoefficients,
    dir: &Path,
    original_dims: Option<Vec<usize>>,
    written: &mut Vec<PathBuf>,
) -> Result<PyramidManifest> {
    let mut entries = Vec::new();
    for ((s, h), spectrum) in coefficients.iter_details() {
        let name = detail_file_name(s, h);
        let path = dir.join(&name);
        write_ndf_complex(&path, spectrum)?;
        written.push(path);
        entries.push(ManifestEntry { level: s, band: h, path: name });
    }
    let path = dir.join(APPROXIMATION_FILE);
    write_ndf_complex(&path, coefficients.approximation())?;
    written.push(path);
    let manifest = PyramidManifest {
        wavelet: coefficients.wavelet().kind(),
        wavelet_params: coefficients.wavelet().params(),
        levels: coefficients.levels(),
        bands: coefficients.bands(),
        input_dims: coefficients.input_dims().to_vec(),
        scale_factor: 2,
        entries,
        approximation: APPROXIMATION_FILE.to_string(),
        original_dims,
    };
    let path = dir.join(MANIFEST_FILE);
    write_manifest(&path, &manifest)?;
    written.push(path);
    Ok(manifest)
}

fn load_spectrum(path: &Path, expected: &[usize]) -> Result<ComplexSpectrum> {
    let spectrum = match read_ndf(path) {
        Ok(NdfData::Complex(s)) => s,
        Ok(NdfData::Real(_)) => return Err(Error::Manifest(format!("{} holds a real image", path.display()))),
        Err(e) => return Err(Error::Manifest(format!("coefficient file {}: {e}", path.display()))),
    };
    if spectrum.layout() != Layout::Standard {
        return Err(Error::Manifest(format!("{} is not in the standard layout", path.display())));
    }
    if spectrum.dims() != expected {
        return Err(Error::Manifest(format!(
            "{} has dims {:?}, manifest implies {expected:?}",
            path.display(),
            spectrum.dims()
        )));
    }
    Ok(spectrum)
}

/// Reads a manifest and all its coefficient files, checking their dims.
pub fn load_pyramid(manifest_path: &Path) -> Result<(PyramidCoefficients, PyramidManifest)> {
    let manifest = read_manifest(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    if manifest.input_dims.iter().any(|&n| n % (1 << manifest.levels) != 0) {
        return Err(Error::Manifest(format!(
            "input_dims {:?} not divisible by 2^{}",
            manifest.input_dims, manifest.levels
        )));
    }
    let mut details = vec![vec![None; manifest.bands]; manifest.levels];
    for e in &manifest.entries {
        let dims = level_dims(&manifest.input_dims, e.level);
        details[e.level - 1][e.band - 1] = Some(load_spectrum(&dir.join(&e.path), &dims)?);
    }
    let approximation = load_spectrum(
        &dir.join(&manifest.approximation),
        &level_dims(&manifest.input_dims, manifest.levels + 1),
    )?;
    let details = details
        .into_iter()
        .map(|level| level.into_iter().map(|d| d.expect("validated entries cover the grid")).collect())
        .collect();
    let coefficients = PyramidCoefficients::from_parts(
        manifest.wavelet_function()?,
        manifest.bands,
        manifest.input_dims.clone(),
        details,
        approximation,
    )
    .map_err(|e| Error::Manifest(e.to_string()))?;
    Ok((coefficients, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(entries: usize) -> String {
        let list: Vec<String> = (0..entries)
            .map(|i| format!(r#"{{"level": {}, "band": {}, "path": "d{i}.ndf"}}"#, i / 2 + 1, i % 2 + 1))
            .collect();
        format!(
            r#"{{"wavelet": "simoncelli", "wavelet_params": {{}}, "levels": 2, "bands": 2,
               "input_dims": [16, 16], "scale_factor": 2, "entries": [{}], "approximation": "a.ndf"}}"#,
            list.join(",")
        )
    }

    #[test]
    fn entry_count() {
        let m = PyramidManifest::from_json(&sample(4)).unwrap();
        assert_eq!((m.levels, m.bands, m.entries.len()), (2, 2, 4));
        assert!(PyramidManifest::from_json(&sample(3)).is_err());
        assert_eq!(PyramidManifest::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn unknown_wavelet_names_supported_kinds() {
        let text = sample(4).replace("simoncelli", "meyer");
        let err = PyramidManifest::from_json(&text).unwrap_err().to_string();
        for kind in ["vow", "held", "simoncelli", "shannon"] {
            assert!(err.contains(kind), "{err}");
        }
    }

    #[test]
    fn missing_field_and_bad_ranges() {
        assert!(PyramidManifest::from_json(&sample(4).replace(r#""scale_factor": 2,"#, "")).is_err());
        assert!(PyramidManifest::from_json(&sample(4).replace(r#""scale_factor": 2"#, r#""scale_factor": 3"#)).is_err());
        assert!(PyramidManifest::from_json(&sample(4).replace(r#""level": 2, "band": 2"#, r#""level": 3, "band": 2"#)).is_err());
        assert!(PyramidManifest::from_json(&sample(4).replace(r#""level": 2, "band": 2"#, r#""level": 2, "band": 1"#)).is_err());
    }
}
