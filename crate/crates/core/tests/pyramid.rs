use isowave::frequency::{expand_spectrum, forward_dft, inverse_dft, pad_to_levels, shrink_spectrum};
use isowave::pyramid::{forward, inverse, max_levels};
use isowave::wavelet::{WaveletFunction, WaveletKind};
use isowave::{ComplexSpectrum, RealImage};
use num_complex::Complex64;
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = WaveletKind> {
    prop::sample::select(WaveletKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn padded_round_trip(
        h in 3usize..40,
        w in 3usize..40,
        levels in 1usize..=3,
        bands in 1usize..=4,
        kind in kind_strategy(),
        seed in any::<u64>(),
    ) {
        let img = RealImage::from_fn(vec![h, w], |c| ((seed >> ((c[0] * 3 + c[1]) % 60)) & 0xff) as f64).unwrap();
        let padded = pad_to_levels(&img, levels as u32).unwrap();
        prop_assert!(max_levels(padded.dims()) >= levels);
        let wavelet = WaveletFunction::from_kind(kind);
        let coeffs = forward(&forward_dft(&padded), levels, bands, &wavelet).unwrap();
        let spectrum_energy = forward_dft(&padded).energy();
        prop_assert!((coeffs.energy() - spectrum_energy).abs() <= 1e-9 * spectrum_energy.max(1.0));
        let back = inverse_dft(&inverse(&coeffs).unwrap()).unwrap();
        prop_assert!(back.max_imaginary < 1e-9);
        let out = back.image.crop(img.dims()).unwrap();
        let err = out.data().iter().zip(img.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9 * 255.0, "{}", err);
    }

    #[test]
    fn shrink_inverts_expand(dims in prop::collection::vec(1usize..7, 1..4), seed in any::<u64>()) {
        let n: usize = dims.iter().product();
        let data: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(((seed >> (i % 64)) & 7) as f64, (i % 5) as f64))
            .collect();
        let s = ComplexSpectrum::standard(dims, data).unwrap();
        let back = shrink_spectrum(&expand_spectrum(&s).unwrap()).unwrap();
        prop_assert_eq!(back.data(), s.data());
    }
}

#[test]
fn three_dimensional_round_trip() {
    let img = RealImage::from_fn(vec![16, 16, 16], |c| ((c[0] * 5 + c[1] * 3 + c[2] * 11) % 13) as f64).unwrap();
    for kind in WaveletKind::ALL {
        let coeffs = forward(&forward_dft(&img), 3, 2, &WaveletFunction::from_kind(kind)).unwrap();
        let back = inverse_dft(&inverse(&coeffs).unwrap()).unwrap().image;
        let err = back.data().iter().zip(img.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9 * 12.0, "{kind}: {err}");
    }
}
