//! Regression snapshots for the phase pipeline.
//!
//! A snapshot keeps summary statistics of an output image plus a strided
//! sample grid, enough to detect drift without storing full images.

use std::fs;
use std::path::{Path, PathBuf};

use isowave::RealImage;
use serde::{Deserialize, Serialize};

/// Stride of the stored sample grid along every axis.
pub const GRID_STRIDE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSnapshot {
    pub wavelet: String,
    pub levels: usize,
    pub bands: usize,
    pub k_sigmas: f64,
    pub dims: Vec<usize>,
    pub sum: f64,
    pub sum_sq: f64,
    pub min: f64,
    pub max: f64,
    pub grid_stride: usize,
    pub grid: Vec<f64>,
}

impl PhaseSnapshot {
    pub fn capture(image: &RealImage, wavelet: &str, levels: usize, bands: usize, k_sigmas: f64) -> Self {
        let (min, max) = image.range();
        let dims = image.dims();
        let grid = image
            .data()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let mut rest = *i;
                dims.iter().rev().all(|&n| {
                    let k = rest % n;
                    rest /= n;
                    k % GRID_STRIDE == 0
                })
            })
            .map(|(_, &v)| v)
            .collect();
        PhaseSnapshot {
            wavelet: wavelet.to_string(),
            levels,
            bands,
            k_sigmas,
            dims: dims.to_vec(),
            sum: image.data().iter().sum(),
            sum_sq: image.data().iter().map(|v| v * v).sum(),
            min,
            max,
            grid_stride: GRID_STRIDE,
            grid,
        }
    }

    /// Largest deviation from `reference`, scaled by `max(1, |reference value|)`.
    /// `None` when the two are structurally different.
    pub fn deviation(&self, reference: &PhaseSnapshot) -> Option<f64> {
        if self.wavelet != reference.wavelet
            || self.levels != reference.levels
            || self.bands != reference.bands
            || self.dims != reference.dims
            || self.grid_stride != reference.grid_stride
            || self.grid.len() != reference.grid.len()
        {
            return None;
        }
        let scalars = [
            (self.sum, reference.sum),
            (self.sum_sq, reference.sum_sq),
            (self.min, reference.min),
            (self.max, reference.max),
            (self.k_sigmas, reference.k_sigmas),
        ];
        let rel = |(a, b): (f64, f64)| (a - b).abs() / b.abs().max(1.0);
        Some(
            scalars
                .into_iter()
                .chain(self.grid.iter().copied().zip(reference.grid.iter().copied()))
                .map(rel)
                .fold(0.0, f64::max),
        )
    }

    pub fn load(path: &Path) -> Option<Self> {
        serde_json::from_str(&fs::read_to_string(path).ok()?).ok()
    }

    pub fn store(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, serde_json::to_string_pretty(self).expect("snapshot serializes") + "\n")
    }
}

pub fn snapshot_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("snapshots")
}

pub fn snapshot_path(wavelet: &str, levels: usize, bands: usize) -> PathBuf {
    snapshot_dir().join(format!("phase_{wavelet}_l{levels}_b{bands}.json"))
}
