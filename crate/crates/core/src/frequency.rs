//! Frequency-domain plumbing: bin/frequency mapping, the DFT, hermitian
//! checks, and the interpolation-free spectrum shrinker/expander.
//!
//! The DFT is unnormalized in the forward direction,
//! `X[k] = Σ x[n]·exp(−2πj k·n/N)`, and the inverse divides by the total
//! sample count, so `inverse_dft(forward_dft(x)) == x`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::image::{increment, index_of, sample_count, ComplexSpectrum, Layout, RealImage};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Frequency (radians per sample) of Standard-layout bin `k` on an axis of size `n`.
#[inline]
pub fn standard_axis_frequency(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        2.0 * PI * k as f64 / n as f64
    } else {
        2.0 * PI * (k as f64 - n as f64) / n as f64
    }
}

/// Standard-layout index that a Shifted-layout index `k` refers to.
#[inline]
fn shifted_to_standard(k: usize, n: usize) -> usize {
    (k + n - n / 2) % n
}

/// Frequency vector of `bin` under `layout`.
///
/// Physical layout uses the derived metadata (spacing `2π/N`, origin
/// `−floor(N/2)·2π/N`); use [`ComplexSpectrum::bin_frequency`] for spectra that
/// carry their own.
pub fn bin_to_frequency(layout: Layout, dims: &[usize], bin: &[usize]) -> Result<Vec<f64>> {
    check_bin(dims, bin)?;
    Ok(bin
        .iter()
        .zip(dims)
        .map(|(&k, &n)| match layout {
            Layout::Standard => standard_axis_frequency(k, n),
            Layout::Shifted => standard_axis_frequency(shifted_to_standard(k, n), n),
            Layout::Physical => 2.0 * PI * (k as f64 - (n / 2) as f64) / n as f64,
        })
        .collect())
}

fn check_bin(dims: &[usize], bin: &[usize]) -> Result<()> {
    if bin.len() != dims.len() || bin.iter().zip(dims).any(|(&k, &n)| k >= n) {
        return Err(Error::IndexOutOfRange {
            index: bin.to_vec(),
            dims: dims.to_vec(),
        });
    }
    Ok(())
}

impl ComplexSpectrum {
    /// Frequency vector of `bin`, honouring this spectrum's own metadata for
    /// the Physical layout.
    pub fn bin_frequency(&self, bin: &[usize]) -> Result<Vec<f64>> {
        match self.layout() {
            Layout::Physical => {
                check_bin(self.dims(), bin)?;
                Ok(bin
                    .iter()
                    .zip(self.frequency_origin().iter().zip(self.frequency_spacing()))
                    .map(|(&k, (&o, &s))| o + k as f64 * s)
                    .collect())
            }
            layout => bin_to_frequency(layout, self.dims(), bin),
        }
    }
}

/// Euclidean norm of a frequency vector.
pub fn radial_frequency(omega: &[f64]) -> f64 {
    omega.iter().map(|w| w * w).sum::<f64>().sqrt()
}

/// Radial frequency of every bin of a Standard-layout grid, row-major.
pub fn radial_frequency_grid(dims: &[usize]) -> Vec<f64> {
    let axes: Vec<Vec<f64>> = dims
        .iter()
        .map(|&n| (0..n).map(|k| standard_axis_frequency(k, n)).collect())
        .collect();
    let mut out = Vec::with_capacity(sample_count(dims));
    let mut coords = vec![0; dims.len()];
    loop {
        let sq: f64 = coords.iter().zip(&axes).map(|(&k, ax)| ax[k] * ax[k]).sum();
        out.push(sq.sqrt());
        if !increment(dims, &mut coords) {
            break;
        }
    }
    out
}

/// Applies `src(k_new, n_old) -> Option<(k_old, weight)>` terms along one axis.
///
/// Each output bin along `axis` is the weighted sum of the listed input bins.
fn remap_axis(
    dims: &[usize],
    data: &[Complex64],
    axis: usize,
    new_len: usize,
    terms: impl Fn(usize) -> Vec<(usize, f64)>,
) -> (Vec<usize>, Vec<Complex64>) {
    let n = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let plan: Vec<Vec<(usize, f64)>> = (0..new_len).map(&terms).collect();
    let mut out = vec![ZERO; outer * new_len * inner];
    for o in 0..outer {
        for (k_new, sources) in plan.iter().enumerate() {
            let dst = (o * new_len + k_new) * inner;
            for &(k_old, w) in sources {
                let src = (o * n + k_old) * inner;
                for i in 0..inner {
                    out[dst + i] += data[src + i] * w;
                }
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[axis] = new_len;
    (new_dims, out)
}

/// Halves every axis by discarding the high-frequency bins.
///
/// Per axis of size `N`: bins below `N/4` and the negative bins are kept, and
/// when `N/2` is even the two `±π/2` bins are folded into the new Nyquist bin.
/// No amplitude rescaling.
pub fn shrink_spectrum(spectrum: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    spectrum.require_layout(Layout::Standard)?;
    if let Some(_) = spectrum.dims().iter().find(|&&n| n % 2 != 0) {
        return Err(Error::InvalidShape {
            dims: spectrum.dims().to_vec(),
            reason: "shrinking requires every axis size to be even".into(),
        });
    }
    let mut dims = spectrum.dims().to_vec();
    let mut data = spectrum.data().to_vec();
    for axis in 0..dims.len() {
        let m = dims[axis] / 2;
        let (d, v) = remap_axis(&dims, &data, axis, m, |k| {
            if m % 2 == 0 && k == m / 2 {
                vec![(k, 1.0), (k + m, 1.0)]
            } else if 2 * k < m {
                vec![(k, 1.0)]
            } else {
                vec![(k + m, 1.0)]
            }
        });
        dims = d;
        data = v;
    }
    ComplexSpectrum::standard(dims, data)
}

/// Doubles every axis by inserting zeros at the high-frequency bins.
///
/// Per axis of size `M`: when `M` is even, its Nyquist bin is split in halves
/// between the new `±π/2` bins. `shrink_spectrum(expand_spectrum(x)) == x`.
pub fn expand_spectrum(spectrum: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    spectrum.require_layout(Layout::Standard)?;
    let mut dims = spectrum.dims().to_vec();
    let mut data = spectrum.data().to_vec();
    for axis in 0..dims.len() {
        let m = dims[axis];
        let (d, v) = remap_axis(&dims, &data, axis, 2 * m, |k| {
            let half = m / 2;
            if m % 2 == 0 && (k == half || k == 2 * m - half) {
                vec![(half, 0.5)]
            } else if 2 * k < m {
                vec![(k, 1.0)]
            } else if k >= m && 2 * (k - m) > m {
                vec![(k - m, 1.0)]
            } else {
                Vec::new()
            }
        });
        dims = d;
        data = v;
    }
    ComplexSpectrum::standard(dims, data)
}

fn rotate_axes(spectrum: &ComplexSpectrum, inverse: bool) -> Vec<Complex64> {
    let dims = spectrum.dims();
    let mut out = vec![ZERO; spectrum.len()];
    let mut coords = vec![0; dims.len()];
    let mut src = vec![0; dims.len()];
    let mut i = 0;
    loop {
        for (axis, &n) in dims.iter().enumerate() {
            src[axis] = if inverse {
                (coords[axis] + n / 2) % n
            } else {
                shifted_to_standard(coords[axis], n)
            };
        }
        out[i] = spectrum.data()[index_of(dims, &src)];
        i += 1;
        if !increment(dims, &mut coords) {
            break;
        }
    }
    out
}

/// Moves DC to the centre (`floor(N/2)` on every axis).
pub fn shift_layout(spectrum: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    spectrum.require_layout(Layout::Standard)?;
    ComplexSpectrum::new(spectrum.dims().to_vec(), rotate_axes(spectrum, false), Layout::Shifted)
}

/// Inverse of [`shift_layout`] for every axis parity.
pub fn unshift_layout(spectrum: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    spectrum.require_layout(Layout::Shifted)?;
    ComplexSpectrum::standard(spectrum.dims().to_vec(), rotate_axes(spectrum, true))
}

/// In-place N-dimensional FFT, one axis at a time.
fn fft_nd(dims: &[usize], data: &mut [Complex64], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..dims.len() {
        let n = dims[axis];
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft(n, direction);
        let inner: usize = dims[axis + 1..].iter().product();
        let outer: usize = dims[..axis].iter().product();
        // Gather lines contiguously, transform in parallel, scatter back.
        let mut lines = vec![ZERO; data.len()];
        for o in 0..outer {
            for i in 0..inner {
                let line = (o * inner + i) * n;
                for k in 0..n {
                    lines[line + k] = data[(o * n + k) * inner + i];
                }
            }
        }
        lines.par_chunks_mut(n * 64).for_each(|chunk| fft.process(chunk));
        for o in 0..outer {
            for i in 0..inner {
                let line = (o * inner + i) * n;
                for k in 0..n {
                    data[(o * n + k) * inner + i] = lines[line + k];
                }
            }
        }
    }
}

/// Unnormalized forward DFT of a real image, Standard layout.
pub fn forward_dft(image: &RealImage) -> ComplexSpectrum {
    let mut data: Vec<Complex64> = image.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(image.dims(), &mut data, FftDirection::Forward);
    ComplexSpectrum::standard(image.dims().to_vec(), data).expect("dims validated by RealImage")
}

/// Unnormalized forward DFT of complex samples stored on a Standard grid.
pub fn forward_dft_complex(dims: &[usize], samples: &[Complex64]) -> Result<ComplexSpectrum> {
    let mut data = samples.to_vec();
    fft_nd(dims, &mut data, FftDirection::Forward);
    ComplexSpectrum::standard(dims.to_vec(), data)
}

/// Inverse DFT (divided by the sample count) keeping the complex result.
pub fn inverse_dft_complex(spectrum: &ComplexSpectrum) -> Result<Vec<Complex64>> {
    spectrum.require_layout(Layout::Standard)?;
    let mut data = spectrum.data().to_vec();
    fft_nd(spectrum.dims(), &mut data, FftDirection::Inverse);
    let scale = 1.0 / spectrum.len() as f64;
    data.iter_mut().for_each(|c| *c *= scale);
    Ok(data)
}

/// Result of [`inverse_dft`]: the real part plus the discarded imaginary residual.
#[derive(Debug, Clone)]
pub struct InverseDft {
    pub image: RealImage,
    pub max_imaginary: f64,
}

impl InverseDft {
    /// True when the imaginary residual is above `tol` relative to the largest
    /// real magnitude (absolute when the image is zero).
    pub fn residual_exceeds(&self, tol: f64) -> bool {
        let scale = self.image.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.max_imaginary > tol * scale.max(1.0)
    }
}

/// Inverse DFT returning the real part and reporting the largest |imaginary| residual.
pub fn inverse_dft(spectrum: &ComplexSpectrum) -> Result<InverseDft> {
    let data = inverse_dft_complex(spectrum)?;
    let max_imaginary = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    let image = RealImage::new(spectrum.dims().to_vec(), data.iter().map(|c| c.re).collect())?;
    Ok(InverseDft {
        image,
        max_imaginary,
    })
}

/// Index of the bin that holds `−ω` for Standard-layout bin `coords`.
pub(crate) fn mirror_index(dims: &[usize], coords: &[usize]) -> usize {
    coords
        .iter()
        .zip(dims)
        .fold(0, |acc, (&k, &n)| acc * n + (n - k) % n)
}

/// True iff `|X[k] − conj(X[−k])| ≤ tol·max|X|` for every bin.
///
/// Shifted spectra are unshifted first. Physical spectra carry no implied
/// symmetry and always report `false`.
pub fn is_hermitian(spectrum: &ComplexSpectrum, tol: f64) -> bool {
    let standard = match spectrum.layout() {
        Layout::Standard => spectrum.clone(),
        Layout::Shifted => match unshift_layout(spectrum) {
            Ok(s) => s,
            Err(_) => return false,
        },
        Layout::Physical => return false,
    };
    let dims = standard.dims();
    let bound = tol * standard.max_abs();
    let data = standard.data();
    let mut coords = vec![0; dims.len()];
    let mut i = 0;
    loop {
        let mirror = data[mirror_index(dims, &coords)];
        if (data[i] - mirror.conj()).norm() > bound {
            return false;
        }
        i += 1;
        if !increment(dims, &mut coords) {
            break;
        }
    }
    true
}

/// Smallest admissible size `S ≥ n` for `levels`: divisible by `2^levels` with quotient ≥ 2.
pub fn padded_size(n: usize, levels: u32) -> usize {
    let step = 1usize << levels;
    n.div_ceil(step).max(2) * step
}

/// Zero-pads every axis at the high-index end to the size required by `levels`.
pub fn pad_to_levels(image: &RealImage, levels: u32) -> Result<RealImage> {
    if levels == 0 {
        return Err(Error::param("levels", "must be at least 1"));
    }
    let dims: Vec<usize> = image.dims().iter().map(|&n| padded_size(n, levels)).collect();
    if dims == image.dims() {
        return Ok(image.clone());
    }
    let src = image.dims();
    let padded = RealImage::from_fn(dims, |c| {
        if c.iter().zip(src).all(|(&k, &n)| k < n) {
            image.get(c)
        } else {
            0.0
        }
    })?;
    padded
        .with_spacing(image.spacing().to_vec())?
        .with_origin(image.origin().to_vec())
}
