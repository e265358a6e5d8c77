//! Gaussian-windowed structure tensor of a list of channels, its per-sample
//! eigen-decomposition, coherency and projections.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{strides, RealImage};

/// Per-sample eigen-decomposition of an `N×N` structure tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenField {
    dims: Vec<usize>,
    channels: usize,
    /// `N²` entries per sample; column `k` (entries `k·N..(k+1)·N`) is eigenvector `k`.
    vectors: Vec<f64>,
    /// `N` ascending eigenvalues per sample.
    values: Vec<f64>,
}

impl EigenField {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of channels `N`.
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Ascending eigenvalues at linear sample `index`.
    pub fn eigenvalues(&self, index: usize) -> &[f64] {
        let n = self.channels;
        &self.values[index * n..(index + 1) * n]
    }

    /// Eigenvector of 1-based `rank` (rank `N` has the largest eigenvalue).
    pub fn eigenvector(&self, index: usize, rank: usize) -> &[f64] {
        let n = self.channels;
        let start = index * n * n + (rank - 1) * n;
        &self.vectors[start..start + n]
    }

    /// `N×(N+1)` matrix: eigenvectors as columns, then the eigenvalue column.
    pub fn sample_matrix(&self, index: usize) -> DMatrix<f64> {
        let n = self.channels;
        DMatrix::from_fn(n, n + 1, |row, col| {
            if col < n {
                self.eigenvector(index, col + 1)[row]
            } else {
                self.eigenvalues(index)[row]
            }
        })
    }
}

fn check_inputs(inputs: &[RealImage]) -> Result<&[usize]> {
    let first = inputs.first().ok_or_else(|| Error::param("inputs", "at least one input required"))?;
    if let Some(bad) = inputs.iter().find(|img| img.dims() != first.dims()) {
        return Err(Error::DimsMismatch {
            expected: first.dims().to_vec(),
            found: bad.dims().to_vec(),
        });
    }
    Ok(first.dims())
}

fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let raw: Vec<f64> = (-r..=r).map(|o| (-((o * o) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|g| g / total).collect()
}

/// Separable window along every axis with clamp-to-edge extension.
fn smooth(data: &[f64], dims: &[usize], kernel: &[f64]) -> Vec<f64> {
    let radius = (kernel.len() / 2) as isize;
    let strides = strides(dims);
    let mut current = data.to_vec();
    for (axis, &n) in dims.iter().enumerate() {
        let stride = strides[axis];
        let mut next = vec![0.0; current.len()];
        next.par_iter_mut().enumerate().for_each(|(i, out)| {
            let k = (i / stride) % n;
            let base = i - k * stride;
            *out = kernel
                .iter()
                .enumerate()
                .map(|(j, &g)| {
                    let pos = (k as isize + j as isize - radius).clamp(0, n as isize - 1) as usize;
                    g * current[base + pos * stride]
                })
                .sum();
        });
        current = next;
    }
    current
}

/// `J[m][n](x₀) = Σ_o g(o)·I_m[x₀+o]·I_n[x₀+o]` over `‖o‖∞ ≤ radius`, then eigen-decomposed.
///
/// `g` is an isotropic Gaussian normalized to unit sum over the truncated window.
/// Eigenvalues are ascending and each eigenvector's largest-magnitude entry is positive.
pub fn structure_tensor(inputs: &[RealImage], sigma: f64, radius: usize) -> Result<EigenField> {
    if inputs.len() < 2 {
        return Err(Error::param("inputs", format!("need at least 2 channels, got {}", inputs.len())));
    }
    let dims = check_inputs(inputs)?.to_vec();
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    if radius < 1 {
        return Err(Error::param("radius", "must be at least 1"));
    }
    let kernel = gaussian_kernel(sigma, radius);
    let n = inputs.len();
    let mut entries = vec![Vec::new(); n * n];
    for m in 0..n {
        for k in m..n {
            let product: Vec<f64> = inputs[m].data().iter().zip(inputs[k].data()).map(|(a, b)| a * b).collect();
            let smoothed = smooth(&product, &dims, &kernel);
            entries[k * n + m] = smoothed.clone();
            entries[m * n + k] = smoothed;
        }
    }
    let samples = inputs[0].len();
    let decomposed: Vec<(Vec<f64>, Vec<f64>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let j = DMatrix::from_fn(n, n, |r, c| entries[r * n + c][i]);
            decompose(j)
        })
        .collect();
    let mut vectors = Vec::with_capacity(samples * n * n);
    let mut values = Vec::with_capacity(samples * n);
    for (vec, val) in decomposed {
        vectors.extend(vec);
        values.extend(val);
    }
    Ok(EigenField {
        dims,
        channels: n,
        vectors,
        values,
    })
}

fn decompose(j: DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = j.nrows();
    let eigen = SymmetricEigen::new(j);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let mut vectors = Vec::with_capacity(n * n);
    let mut values = Vec::with_capacity(n);
    for &k in &order {
        let column = eigen.eigenvectors.column(k);
        let pivot = column.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        vectors.extend(column.iter().map(|v| sign * v));
        values.push(eigen.eigenvalues[k]);
    }
    (vectors, values)
}

/// `χ = (λ_N − Ā)/(λ_N + Ā)` with `Ā` the mean of the other eigenvalues; 0 when both vanish.
pub fn coherency(field: &EigenField) -> RealImage {
    let n = field.channels;
    let data = (0..field.len())
        .map(|i| {
            let values = field.eigenvalues(i);
            let top = values[n - 1];
            let rest = values[..n - 1].iter().sum::<f64>() / (n - 1).max(1) as f64;
            let denom = top + rest;
            if denom > 0.0 {
                ((top - rest) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    RealImage::new(field.dims.clone(), data).expect("field dims are valid")
}

/// Per-sample dot product of the input vector with the eigenvector of 1-based `rank`.
pub fn projection_image(field: &EigenField, inputs: &[RealImage], rank: usize) -> Result<RealImage> {
    let dims = check_inputs(inputs)?;
    if dims != field.dims() {
        return Err(Error::DimsMismatch {
            expected: field.dims.clone(),
            found: dims.to_vec(),
        });
    }
    if inputs.len() != field.channels {
        return Err(Error::param(
            "inputs",
            format!("field has {} channels, got {} inputs", field.channels, inputs.len()),
        ));
    }
    if rank == 0 || rank > field.channels {
        return Err(Error::param("rank", format!("must be in 1..={}, got {rank}", field.channels)));
    }
    let data = (0..field.len())
        .map(|i| {
            field
                .eigenvector(i, rank)
                .iter()
                .zip(inputs)
                .map(|(v, img)| v * img.data()[i])
                .sum()
        })
        .collect();
    RealImage::new(dims.to_vec(), data)
}
