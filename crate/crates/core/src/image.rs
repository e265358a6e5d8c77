//! N-dimensional sample grids.
//!
//! Every grid is stored row-major with axis 0 slowest, so for dims
//! `[d0, d1, d2]` the sample at `(i0, i1, i2)` lives at
//! `(i0 * d1 + i1) * d2 + i2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frequency storage convention of a [`ComplexSpectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// DC at index zero, positive frequencies first, Nyquist at `N/2` for even `N`.
    Standard,
    /// Standard layout rotated so that DC sits at `floor(N/2)`.
    Shifted,
    /// Frequencies are `origin + index * spacing` from the spectrum metadata.
    Physical,
}

/// Number of samples implied by `dims`.
pub fn sample_count(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Row-major strides for `dims` (axis 0 slowest).
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for axis in (0..dims.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * dims[axis + 1];
    }
    strides
}

/// Linear index of the multi-axis index `coords`.
pub fn index_of(dims: &[usize], coords: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), coords.len());
    coords
        .iter()
        .zip(dims)
        .fold(0, |acc, (&c, &d)| acc * d + c)
}

/// Multi-axis index of the linear index `index`.
pub fn coords_of(dims: &[usize], mut index: usize) -> Vec<usize> {
    let mut coords = vec![0; dims.len()];
    for axis in (0..dims.len()).rev() {
        coords[axis] = index % dims[axis];
        index /= dims[axis];
    }
    coords
}

/// Advances `coords` to the next row-major position. Returns `false` after the last one.
pub(crate) fn increment(dims: &[usize], coords: &mut [usize]) -> bool {
    for axis in (0..dims.len()).rev() {
        coords[axis] += 1;
        if coords[axis] < dims[axis] {
            return true;
        }
        coords[axis] = 0;
    }
    false
}

fn validate_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            reason: "at least one axis is required".into(),
        });
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            reason: "every axis must hold at least one sample".into(),
        });
    }
    if sample_count(dims) != len {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            reason: format!("{} samples given, {} expected", len, sample_count(dims)),
        });
    }
    Ok(())
}

/// Real-valued samples on an N-dimensional grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealImage {
    dims: Vec<usize>,
    data: Vec<f64>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl RealImage {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        validate_dims(&dims, data.len())?;
        let n = dims.len();
        Ok(RealImage {
            dims,
            data,
            spacing: vec![1.0; n],
            origin: vec![0.0; n],
        })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = sample_count(&dims);
        Self::new(dims, vec![0.0; len])
    }

    /// Builds an image by evaluating `f` at every multi-axis index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        validate_dims(&dims, sample_count(&dims))?;
        let mut data = Vec::with_capacity(sample_count(&dims));
        let mut coords = vec![0; dims.len()];
        loop {
            data.push(f(&coords));
            if !increment(&dims, &mut coords) {
                break;
            }
        }
        Self::new(dims, data)
    }

    pub fn with_spacing(mut self, spacing: Vec<f64>) -> Result<Self> {
        if spacing.len() != self.dims.len() || spacing.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::param(
                "spacing",
                format!("need {} positive values, got {:?}", self.dims.len(), spacing),
            ));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn with_origin(mut self, origin: Vec<f64>) -> Result<Self> {
        if origin.len() != self.dims.len() {
            return Err(Error::param(
                "origin",
                format!("need {} values, got {}", self.dims.len(), origin.len()),
            ));
        }
        self.origin = origin;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn get(&self, coords: &[usize]) -> f64 {
        self.data[index_of(&self.dims, coords)]
    }

    /// Copy of the region `[0, dims)` of this image. Metadata is kept.
    pub fn crop(&self, dims: &[usize]) -> Result<RealImage> {
        if dims.len() != self.ndim() || dims.iter().zip(&self.dims).any(|(&a, &b)| a > b || a == 0) {
            return Err(Error::DimsMismatch {
                expected: self.dims.clone(),
                found: dims.to_vec(),
            });
        }
        let mut out = RealImage::from_fn(dims.to_vec(), |c| self.get(c))?;
        out.spacing = self.spacing.clone();
        out.origin = self.origin.clone();
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealImage {
        RealImage {
            dims: self.dims.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
            spacing: self.spacing.clone(),
            origin: self.origin.clone(),
        }
    }

    /// `(min, max)` over all samples.
    pub fn range(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Complex samples on an N-dimensional frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    dims: Vec<usize>,
    data: Vec<Complex64>,
    layout: Layout,
    frequency_spacing: Vec<f64>,
    frequency_origin: Vec<f64>,
}

impl ComplexSpectrum {
    /// A spectrum in `layout` with the derived metadata: spacing `2π/N` per axis,
    /// origin zero for Standard and `-floor(N/2)·2π/N` for Shifted and Physical.
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>, layout: Layout) -> Result<Self> {
        validate_dims(&dims, data.len())?;
        let frequency_spacing: Vec<f64> = dims.iter().map(|&n| 2.0 * PI / n as f64).collect();
        let frequency_origin = match layout {
            Layout::Standard => vec![0.0; dims.len()],
            Layout::Shifted | Layout::Physical => dims
                .iter()
                .zip(&frequency_spacing)
                .map(|(&n, &s)| -((n / 2) as f64) * s)
                .collect(),
        };
        Ok(ComplexSpectrum {
            dims,
            data,
            layout,
            frequency_spacing,
            frequency_origin,
        })
    }

    pub fn standard(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        Self::new(dims, data, Layout::Standard)
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = sample_count(&dims);
        Self::standard(dims, vec![Complex64::new(0.0, 0.0); len])
    }

    /// A Physical-layout spectrum with explicit frequency metadata.
    pub fn physical(
        dims: Vec<usize>,
        data: Vec<Complex64>,
        frequency_origin: Vec<f64>,
        frequency_spacing: Vec<f64>,
    ) -> Result<Self> {
        validate_dims(&dims, data.len())?;
        if frequency_origin.len() != dims.len() || frequency_spacing.len() != dims.len() {
            return Err(Error::param(
                "frequency metadata",
                format!("need {} values per field", dims.len()),
            ));
        }
        Ok(ComplexSpectrum {
            dims,
            data,
            layout: Layout::Physical,
            frequency_spacing,
            frequency_origin,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn frequency_spacing(&self) -> &[f64] {
        &self.frequency_spacing
    }

    pub fn frequency_origin(&self) -> &[f64] {
        &self.frequency_origin
    }

    pub fn get(&self, coords: &[usize]) -> Complex64 {
        self.data[index_of(&self.dims, coords)]
    }

    pub(crate) fn require_layout(&self, layout: Layout) -> Result<()> {
        if self.layout != layout {
            return Err(Error::LayoutMismatch {
                expected: layout,
                found: self.layout,
            });
        }
        Ok(())
    }

    /// Sum of squared magnitudes.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Pointwise product with a real gain image of the same dims.
    pub fn scaled_by(&self, gains: &[f64]) -> ComplexSpectrum {
        debug_assert_eq!(gains.len(), self.data.len());
        let mut out = self.clone();
        out.data.iter_mut().zip(gains).for_each(|(c, &g)| *c *= g);
        out
    }

    /// Pointwise product with another spectrum of the same dims.
    pub fn multiplied_by(&self, other: &ComplexSpectrum) -> Result<ComplexSpectrum> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a *= b);
        Ok(out)
    }

    pub(crate) fn with_data(&self, data: Vec<Complex64>) -> ComplexSpectrum {
        debug_assert_eq!(data.len(), self.data.len());
        ComplexSpectrum {
            data,
            ..self.clone()
        }
    }

    /// Largest sample magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
