//! Monogenic signal, local amplitude/phase and multi-scale phase analysis.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frequency::{forward_dft, inverse_dft, pad_to_levels};
use crate::image::{ComplexSpectrum, RealImage};
use crate::pyramid::{forward, inverse, max_levels_with_padding};
use crate::riesz::{apply_riesz, generate_riesz_bank};
use crate::wavelet::WaveletFunction;

/// `(f, R₁f, …, R_d f)` in the spatial domain.
#[derive(Debug, Clone)]
pub struct MonogenicSignal {
    pub f: RealImage,
    pub riesz: Vec<RealImage>,
    /// Largest imaginary part discarded by the inverse transforms.
    pub max_imaginary: f64,
}

/// Builds the monogenic signal of a Standard-layout spectrum.
///
/// Spatial outputs are the real parts of the inverse transforms. For even axis
/// lengths the order-1 responses are odd at the Nyquist bin, so the Riesz
/// images carry an imaginary residual proportional to the Nyquist content.
pub fn monogenic(spectrum: &ComplexSpectrum) -> Result<MonogenicSignal> {
    let bank = generate_riesz_bank(1, spectrum.dims())?;
    let components = apply_riesz(&bank, spectrum)?;
    let f = inverse_dft(spectrum)?;
    let mut max_imaginary = f.max_imaginary;
    let riesz = components
        .iter()
        .map(|c| {
            let out = inverse_dft(c)?;
            max_imaginary = max_imaginary.max(out.max_imaginary);
            Ok(out.image)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonogenicSignal {
        f: f.image,
        riesz,
        max_imaginary,
    })
}

/// Local amplitude `A = sqrt(f² + A_R²)` and phase `P = atan2(A_R, f) ∈ [0, π]`.
pub fn phase_amplitude(signal: &MonogenicSignal) -> (RealImage, RealImage) {
    let n = signal.f.len();
    let mut amplitude = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for i in 0..n {
        let f = signal.f.data()[i];
        let a_r = signal.riesz.iter().map(|r| r.data()[i].powi(2)).sum::<f64>().sqrt();
        amplitude.push(f.hypot(a_r));
        phase.push(a_r.atan2(f));
    }
    let dims = signal.f.dims().to_vec();
    (
        RealImage::new(dims.clone(), amplitude).expect("dims come from an image"),
        RealImage::new(dims, phase).expect("dims come from an image"),
    )
}

/// `w·cos(P)` with `w = min(1, A/T)` and `T = mean(A) + k·std(A)`.
///
/// When `T ≤ 0` (only possible for an all-zero amplitude) the weight is 1
/// where `A > 0` and 0 elsewhere, so vanishing amplitude maps to 0.
pub fn soft_threshold_phase(amplitude: &RealImage, phase: &RealImage, k_sigmas: f64) -> Result<RealImage> {
    if amplitude.dims() != phase.dims() {
        return Err(Error::DimsMismatch {
            expected: amplitude.dims().to_vec(),
            found: phase.dims().to_vec(),
        });
    }
    if !(k_sigmas >= 0.0) || !k_sigmas.is_finite() {
        return Err(Error::param("k_sigmas", format!("must be finite and ≥ 0, got {k_sigmas}")));
    }
    let n = amplitude.len() as f64;
    let mean = amplitude.data().iter().sum::<f64>() / n;
    let var = amplitude.data().iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let threshold = mean + k_sigmas * var.sqrt();
    let data = amplitude
        .data()
        .iter()
        .zip(phase.data())
        .map(|(&a, &p)| {
            let w = if threshold > 0.0 {
                (a / threshold).min(1.0)
            } else if a > 0.0 {
                1.0
            } else {
                0.0
            };
            (w * p.cos()).clamp(-1.0, 1.0)
        })
        .collect();
    RealImage::new(amplitude.dims().to_vec(), data)
}

/// Pyramid decomposition with every detail band replaced by `process(level, band, detail)`.
///
/// The image is zero-padded to admit `levels` (at most
/// [`max_levels_with_padding`]), the approximation passes through unchanged
/// and the reconstruction is cropped back to the input dims.
pub fn process_bands<F>(
    image: &RealImage,
    wavelet: &WaveletFunction,
    levels: usize,
    bands: usize,
    process: F,
) -> Result<RealImage>
where
    F: Fn(usize, usize, &ComplexSpectrum) -> Result<ComplexSpectrum> + Sync,
{
    let max = max_levels_with_padding(image.dims());
    if levels == 0 || levels > max {
        return Err(Error::LevelsOutOfRange {
            requested: levels,
            max,
            dims: image.dims().to_vec(),
        });
    }
    let padded = pad_to_levels(image, levels as u32)?;
    let mut coeffs = forward(&forward_dft(&padded), levels, bands, wavelet)?;
    let keys: Vec<(usize, usize)> = coeffs.iter_details().map(|(key, _)| key).collect();
    let replaced = keys
        .par_iter()
        .map(|&(s, h)| process(s, h, coeffs.detail(s, h)))
        .collect::<Result<Vec<_>>>()?;
    for (&(s, h), spectrum) in keys.iter().zip(replaced) {
        coeffs.set_detail(s, h, spectrum)?;
    }
    let out = inverse_dft(&inverse(&coeffs)?)?;
    out.image.crop(image.dims())
}

/// One per-band phase map at the band's own resolution.
#[derive(Debug, Clone)]
pub struct BandPhase {
    pub level: usize,
    pub band: usize,
    pub image: RealImage,
}

/// Result of [`riesz_wavelet_phase_analysis`].
#[derive(Debug, Clone)]
pub struct PhaseAnalysis {
    pub image: RealImage,
    /// Ordered by level, then band.
    pub band_phases: Vec<BandPhase>,
}

fn band_phase(detail: &ComplexSpectrum, k_sigmas: f64) -> Result<RealImage> {
    let signal = monogenic(detail)?;
    let (amplitude, phase) = phase_amplitude(&signal);
    soft_threshold_phase(&amplitude, &phase, k_sigmas)
}

/// Multi-scale phase analysis returning the per-band phase maps as well.
pub fn riesz_wavelet_phase_analysis(
    image: &RealImage,
    wavelet: &WaveletFunction,
    levels: usize,
    bands: usize,
    k_sigmas: f64,
) -> Result<PhaseAnalysis> {
    if !(k_sigmas >= 0.0) || !k_sigmas.is_finite() {
        return Err(Error::param("k_sigmas", format!("must be finite and ≥ 0, got {k_sigmas}")));
    }
    let collected = std::sync::Mutex::new(Vec::new());
    let out = process_bands(image, wavelet, levels, bands, |s, h, detail| {
        let phase = band_phase(detail, k_sigmas)?;
        let spectrum = forward_dft(&phase);
        collected.lock().expect("poisoned").push(BandPhase {
            level: s,
            band: h,
            image: phase,
        });
        Ok(spectrum)
    })?;
    let mut band_phases = collected.into_inner().expect("poisoned");
    band_phases.sort_by_key(|b| (b.level, b.band));
    Ok(PhaseAnalysis {
        image: out,
        band_phases,
    })
}

/// Multi-scale phase analysis: each detail band is replaced by its
/// soft-thresholded monogenic phase before reconstruction.
pub fn riesz_wavelet_phase_pipeline(
    image: &RealImage,
    wavelet: &WaveletFunction,
    levels: usize,
    bands: usize,
    k_sigmas: f64,
) -> Result<RealImage> {
    Ok(riesz_wavelet_phase_analysis(image, wavelet, levels, bands, k_sigmas)?.image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use std::f64::consts::PI;

    fn signal(f: f64, riesz: &[f64]) -> MonogenicSignal {
        MonogenicSignal {
            f: RealImage::new(vec![1], vec![f]).unwrap(),
            riesz: riesz.iter().map(|&r| RealImage::new(vec![1], vec![r]).unwrap()).collect(),
            max_imaginary: 0.0,
        }
    }

    #[test]
    fn amplitude_phase_examples() {
        for (f, r, a, p) in [(1.0, 0.0, 1.0, 0.0), (0.0, 1.0, 1.0, PI / 2.0), (-1.0, 0.0, 1.0, PI)] {
            let (amp, ph) = phase_amplitude(&signal(f, &[r, 0.0]));
            assert!((amp.data()[0] - a).abs() < 1e-15);
            assert!((ph.data()[0] - p).abs() < 1e-15);
        }
    }

    #[test]
    fn monogenic_of_zero_and_cosine() {
        let zero = monogenic(&ComplexSpectrum::zeros(vec![6, 5]).unwrap()).unwrap();
        assert!(zero.f.data().iter().chain(zero.riesz.iter().flat_map(|r| r.data())).all(|&v| v == 0.0));
        let n = 31;
        let img = RealImage::from_fn(vec![n, 7], |c| (2.0 * PI * 4.0 * c[0] as f64 / n as f64).cos()).unwrap();
        let m = monogenic(&forward_dft(&img)).unwrap();
        assert!(m.max_imaginary < 1e-10);
        for (i, &v) in m.riesz[0].data().iter().enumerate() {
            let x = i / 7;
            assert!((v - (2.0 * PI * 4.0 * x as f64 / n as f64).sin()).abs() < 1e-12);
            assert!(m.riesz[1].data()[i].abs() < 1e-12);
        }
    }

    #[test]
    fn soft_threshold_examples() {
        let dims = vec![4];
        let phase = RealImage::new(dims.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let constant = RealImage::new(dims.clone(), vec![2.5; 4]).unwrap();
        let out = soft_threshold_phase(&constant, &phase, 0.0).unwrap();
        for (o, p) in out.data().iter().zip(phase.data()) {
            assert!((o - p.cos()).abs() < 1e-15);
        }
        let zero = RealImage::zeros(dims.clone()).unwrap();
        assert!(soft_threshold_phase(&zero, &phase, 1.0).unwrap().data().iter().all(|&v| v == 0.0));
        let ramp = RealImage::new(dims.clone(), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let out = soft_threshold_phase(&ramp, &zero, 0.0).unwrap();
        assert_eq!(out.data(), &[0.0, 1.0 / 1.5, 1.0, 1.0]);
        assert!(soft_threshold_phase(&ramp, &RealImage::zeros(vec![3]).unwrap(), 0.0).is_err());
        assert!(soft_threshold_phase(&ramp, &zero, -1.0).is_err());
    }

    #[test]
    fn identity_processing_reproduces_input() {
        let mut rng = StdRng::seed_from_u64(5);
        let img = RealImage::from_fn(vec![37, 50], |_| rng.gen_range(0.0..255.0)).unwrap();
        let w = WaveletFunction::simoncelli();
        let out = process_bands(&img, &w, 3, 2, |_, _, d| Ok(d.clone())).unwrap();
        assert_eq!(out.dims(), img.dims());
        let err = out.data().iter().zip(img.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn pipeline_zero_and_bounds() {
        let w = WaveletFunction::vow();
        let zero = riesz_wavelet_phase_pipeline(&RealImage::zeros(vec![32, 32]).unwrap(), &w, 2, 2, 1.0).unwrap();
        assert!(zero.data().iter().all(|&v| v == 0.0));
        let mut rng = StdRng::seed_from_u64(8);
        let img = RealImage::from_fn(vec![30, 33], |_| rng.gen_range(-1.0..1.0)).unwrap();
        let analysis = riesz_wavelet_phase_analysis(&img, &w, 2, 3, 0.5).unwrap();
        assert_eq!(analysis.band_phases.len(), 6);
        assert_eq!(analysis.image.dims(), img.dims());
        for b in &analysis.band_phases {
            assert!(b.image.data().iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        assert_eq!(
            analysis.band_phases.iter().map(|b| (b.level, b.band)).collect::<Vec<_>>(),
            vec![(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]
        );
        assert!(riesz_wavelet_phase_pipeline(&img, &w, 0, 1, 1.0).is_err());
    }
}
