//! Forward (analysis) and inverse (synthesis) wavelet pyramids in the
//! frequency domain.
//!
//! Level `s` (1 = finest) works on spectra of dims `input_dims / 2^(s−1)`.
//! Its detail coefficients tap off before downsampling; only the low-pass
//! branch is shrunk and carried to the next level.

use crate::error::{Error, Result};
use crate::frequency::{expand_spectrum, is_hermitian, shrink_spectrum};
use crate::image::ComplexSpectrum;
use crate::wavelet::{generate_filter_bank, FilterBank, WaveletFunction};

/// Relative tolerance of the hermitian check on pyramid inputs.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// Largest `L` such that every axis is divisible by `2^L` with quotient ≥ 2.
pub fn max_levels(dims: &[usize]) -> usize {
    dims.iter()
        .map(|&n| {
            let mut levels = 0;
            let mut size = n;
            while size % 2 == 0 && size / 2 >= 2 {
                size /= 2;
                levels += 1;
            }
            levels
        })
        .min()
        .unwrap_or(0)
}

/// Largest `L` with every axis at least `2^(L+1)` samples long, i.e. the
/// deepest pyramid whose zero-padded input keeps the coarsest approximation
/// no smaller than the original extent allows. Equals [`max_levels`] for
/// power-of-two axes.
pub fn max_levels_with_padding(dims: &[usize]) -> usize {
    dims.iter()
        .map(|&n| (usize::BITS - 1 - n.max(1).leading_zeros()).saturating_sub(1) as usize)
        .min()
        .unwrap_or(0)
}

/// Dims of the spectrum entering level `level` (1-based).
pub fn level_dims(input_dims: &[usize], level: usize) -> Vec<usize> {
    input_dims.iter().map(|&n| n >> (level - 1)).collect()
}

/// Detail spectra `d_{s,h}`, the final approximation, and the banks used to make them.
#[derive(Debug, Clone)]
pub struct PyramidCoefficients {
    wavelet: WaveletFunction,
    bands: usize,
    input_dims: Vec<usize>,
    details: Vec<Vec<ComplexSpectrum>>,
    approximation: ComplexSpectrum,
    banks: Option<Vec<FilterBank>>,
    input_hermitian: bool,
}

impl PyramidCoefficients {
    /// Assembles coefficients from parts, checking every dim against the parameters.
    ///
    /// `details[s][h]` is level `s + 1`, band `h + 1`.
    pub fn from_parts(
        wavelet: WaveletFunction,
        bands: usize,
        input_dims: Vec<usize>,
        details: Vec<Vec<ComplexSpectrum>>,
        approximation: ComplexSpectrum,
    ) -> Result<Self> {
        let levels = details.len();
        validate_config(&input_dims, levels, bands)?;
        for (s, level) in details.iter().enumerate() {
            if level.len() != bands {
                return Err(Error::Manifest(format!(
                    "level {} holds {} bands, expected {bands}",
                    s + 1,
                    level.len()
                )));
            }
            let expected = level_dims(&input_dims, s + 1);
            for d in level {
                check_dims(&expected, d)?;
            }
        }
        check_dims(&level_dims(&input_dims, levels + 1), &approximation)?;
        Ok(PyramidCoefficients {
            wavelet,
            bands,
            input_dims,
            details,
            approximation,
            banks: None,
            input_hermitian: true,
        })
    }

    pub fn wavelet(&self) -> &WaveletFunction {
        &self.wavelet
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }

    /// Detail `d_{level,band}`, both 1-based.
    pub fn detail(&self, level: usize, band: usize) -> &ComplexSpectrum {
        &self.details[level - 1][band - 1]
    }

    /// Replaces `d_{level,band}` (1-based); the new spectrum must keep its dims.
    pub fn set_detail(&mut self, level: usize, band: usize, spectrum: ComplexSpectrum) -> Result<()> {
        if level == 0 || level > self.levels() || band == 0 || band > self.bands {
            return Err(Error::param(
                "detail",
                format!("(level {level}, band {band}) outside {}×{}", self.levels(), self.bands),
            ));
        }
        check_dims(self.details[level - 1][band - 1].dims(), &spectrum)?;
        self.details[level - 1][band - 1] = spectrum;
        Ok(())
    }

    /// All details as `((level, band), spectrum)`, finest level first.
    pub fn iter_details(&self) -> impl Iterator<Item = ((usize, usize), &ComplexSpectrum)> {
        self.details.iter().enumerate().flat_map(|(s, level)| {
            level.iter().enumerate().map(move |(h, d)| ((s + 1, h + 1), d))
        })
    }

    pub fn approximation(&self) -> &ComplexSpectrum {
        &self.approximation
    }

    pub fn set_approximation(&mut self, spectrum: ComplexSpectrum) -> Result<()> {
        check_dims(self.approximation.dims(), &spectrum)?;
        self.approximation = spectrum;
        Ok(())
    }

    /// Filter banks cached by [`forward`], one per level.
    pub fn banks(&self) -> Option<&[FilterBank]> {
        self.banks.as_deref()
    }

    pub fn clear_banks(&mut self) {
        self.banks = None;
    }

    /// Whether the forward input passed the hermitian check.
    pub fn input_hermitian(&self) -> bool {
        self.input_hermitian
    }

    /// Σ‖d_{s,h}‖² + ‖approximation‖².
    pub fn energy(&self) -> f64 {
        self.iter_details().map(|(_, d)| d.energy()).sum::<f64>() + self.approximation.energy()
    }
}

fn check_dims(expected: &[usize], spectrum: &ComplexSpectrum) -> Result<()> {
    if spectrum.dims() != expected {
        return Err(Error::DimsMismatch {
            expected: expected.to_vec(),
            found: spectrum.dims().to_vec(),
        });
    }
    Ok(())
}

fn validate_config(dims: &[usize], levels: usize, bands: usize) -> Result<()> {
    if bands == 0 {
        return Err(Error::param("bands", "at least one high-pass sub-band is required"));
    }
    let max = max_levels(dims);
    if levels == 0 || levels > max {
        return Err(Error::LevelsOutOfRange {
            requested: levels,
            max,
            dims: dims.to_vec(),
        });
    }
    Ok(())
}

/// Analysis pyramid of a Standard-layout spectrum.
///
/// Non-hermitian input is accepted; the outcome of the check is recorded in
/// [`PyramidCoefficients::input_hermitian`].
pub fn forward(
    spectrum: &ComplexSpectrum,
    levels: usize,
    bands: usize,
    wavelet: &WaveletFunction,
) -> Result<PyramidCoefficients> {
    spectrum.require_layout(crate::image::Layout::Standard)?;
    validate_config(spectrum.dims(), levels, bands)?;
    let input_hermitian = is_hermitian(spectrum, HERMITIAN_TOLERANCE);

    let mut current = spectrum.clone();
    let mut details = Vec::with_capacity(levels);
    let mut banks = Vec::with_capacity(levels);
    for _ in 0..levels {
        let bank = generate_filter_bank(wavelet, current.dims(), bands)?;
        details.push(bank.sub_bands().iter().map(|hp| current.scaled_by(hp)).collect());
        current = shrink_spectrum(&current.scaled_by(bank.low_pass()))?;
        banks.push(bank);
    }
    Ok(PyramidCoefficients {
        wavelet: wavelet.clone(),
        bands,
        input_dims: spectrum.dims().to_vec(),
        details,
        approximation: current,
        banks: Some(banks),
        input_hermitian,
    })
}

/// Synthesis pyramid. Uses the cached banks when present, otherwise regenerates them.
pub fn inverse(coefficients: &PyramidCoefficients) -> Result<ComplexSpectrum> {
    let levels = coefficients.levels();
    let mut current = coefficients.approximation.clone();
    for level in (1..=levels).rev() {
        let dims = level_dims(&coefficients.input_dims, level);
        let regenerated;
        let bank = match &coefficients.banks {
            Some(banks) if banks[level - 1].dims() == dims.as_slice() => &banks[level - 1],
            _ => {
                regenerated = generate_filter_bank(&coefficients.wavelet, &dims, coefficients.bands)?;
                &regenerated
            }
        };
        let mut next = expand_spectrum(&current)?.scaled_by(bank.low_pass());
        for (band, detail) in coefficients.details[level - 1].iter().enumerate() {
            check_dims(&dims, detail)?;
            let gains = bank.sub_band(band);
            next.data_mut()
                .iter_mut()
                .zip(detail.data().iter().zip(gains))
                .for_each(|(acc, (d, &g))| *acc += d * g);
        }
        current = next;
    }
    Ok(current)
}
