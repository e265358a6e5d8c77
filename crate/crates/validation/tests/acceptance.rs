//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.
//!
//! Set `UPDATE_SNAPSHOTS=1` to (re)write the phase regression snapshots.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use isowave::frequency::{forward_dft, forward_dft_complex, inverse_dft, inverse_dft_complex};
use isowave::phase::{monogenic, riesz_wavelet_phase_analysis};
use isowave::pyramid::{forward, inverse, max_levels};
use isowave::riesz::{apply_riesz, generate_riesz_bank, multiindices, steer_matrix};
use isowave::synth::{checkerboard, gaussian_blob, plane_wave};
use isowave::tensor::{coherency, structure_tensor};
use isowave::wavelet::{WaveletFunction, WaveletKind};
use isowave::RealImage;
use isowave_validation::{snapshot_dir, snapshot_path, PhaseSnapshot};
use nalgebra::{DMatrix, Rotation3, Vector3};
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn all_wavelets() -> Vec<WaveletFunction> {
    WaveletKind::ALL.iter().map(|&k| WaveletFunction::from_kind(k)).collect()
}

fn partition_of_unity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for w in all_wavelets() {
        for k in 0..10_000 {
            let omega = 1e-3 + (PI - 1e-3) * k as f64 / 9_999.0;
            let sum: f64 = (-20..=20)
                .map(|i| w.eval_mother(2f64.powi(i) * omega).expect("finite frequency").powi(2))
                .sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(worst < 1e-9 && elapsed < 1.0, format!("max |Σ h² − 1| = {worst:.2e}, {elapsed:.2}s"))
}

/// Random images on the 64² and 16³ grids, every wavelet × levels × bands.
fn pyramid_grid(mut check: impl FnMut(&RealImage, &isowave::pyramid::PyramidCoefficients, f64)) {
    let mut rng = StdRng::seed_from_u64(2024);
    let images = [
        RealImage::from_fn(vec![64, 64], |_| rng.gen_range(0.0..255.0)).unwrap(),
        RealImage::from_fn(vec![16, 16, 16], |_| rng.gen_range(-1.0..1.0)).unwrap(),
    ];
    for img in &images {
        let spectrum = forward_dft(img);
        let (lo, hi) = img.range();
        for w in all_wavelets() {
            for levels in 1..=3 {
                for bands in [1, 2, 5] {
                    let coeffs = forward(&spectrum, levels, bands, &w).unwrap();
                    check(img, &coeffs, hi - lo);
                }
            }
        }
    }
}

fn perfect_reconstruction() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut configs = 0;
    pyramid_grid(|img, coeffs, range| {
        let back = inverse_dft(&inverse(coeffs).unwrap()).unwrap().image;
        worst = worst.max(max_abs_diff(back.data(), img.data()) / range);
        configs += 1;
    });
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-9 && elapsed < 30.0,
        format!("{configs} configs, max error / range = {worst:.2e}, {elapsed:.2}s"),
    )
}

fn parseval_energy() -> Outcome {
    let mut worst = 0.0f64;
    pyramid_grid(|img, coeffs, _| {
        let input = forward_dft(img).energy();
        worst = worst.max((coeffs.energy() - input).abs() / input);
    });
    outcome(worst < 1e-9, format!("max relative energy error = {worst:.2e}"))
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn riesz_component_count() -> Outcome {
    let mut mismatches = Vec::new();
    for order in 0..=4 {
        for dim in 1..=4 {
            let closed = factorial(order + dim - 1) / (factorial(dim - 1) * factorial(order));
            let found = multiindices(order, dim).len();
            if found != closed {
                mismatches.push(format!("N={order} d={dim}: {found} vs {closed}"));
            }
        }
    }
    outcome(mismatches.is_empty(), if mismatches.is_empty() { "25 (N, d) pairs exact".into() } else { mismatches.join("; ") })
}

fn riesz_unit_norm() -> Outcome {
    let mut worst = 0.0f64;
    for order in 1..=3 {
        let bank = generate_riesz_bank(order, &[8, 8, 8]).unwrap();
        for i in 1..512 {
            let sum: f64 = (0..bank.len()).map(|c| bank.component(c)[i].norm_sqr()).sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    outcome(worst < 1e-10, format!("max |Σ|R̂ⁿ|² − 1| = {worst:.2e} on 8³, N = 1..3"))
}

fn random_rotation(rng: &mut StdRng, d: usize) -> DMatrix<f64> {
    if d == 2 {
        let t = rng.gen_range(0.0..2.0 * PI);
        return DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
    }
    let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let r = Rotation3::new(axis.normalize() * rng.gen_range(0.0..PI));
    DMatrix::from_iterator(3, 3, r.matrix().iter().copied())
}

fn rotate_grid(f: &RealImage, r: &DMatrix<f64>) -> RealImage {
    let dims = f.dims().to_vec();
    let n = dims[0] as i64;
    RealImage::from_fn(dims.clone(), |x| {
        let src: Vec<usize> = (0..dims.len())
            .map(|i| {
                let v: i64 = (0..dims.len()).map(|j| r[(i, j)].round() as i64 * x[j] as i64).sum();
                v.rem_euclid(n) as usize
            })
            .collect();
        f.get(&src)
    })
    .unwrap()
}

fn riesz_images(f: &RealImage, order: usize) -> Vec<RealImage> {
    let bank = generate_riesz_bank(order, f.dims()).unwrap();
    apply_riesz(&bank, &forward_dft(f))
        .unwrap()
        .iter()
        .map(|s| inverse_dft(s).unwrap().image)
        .collect()
}

fn steering_laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut identity_exact = true;
    let mut homomorphism = [0.0f64; 2];
    let mut reversed = [0.0f64; 2];
    let mut order_one = 0.0f64;
    for (slot, d) in [2usize, 3].into_iter().enumerate() {
        for order in 1..=3 {
            let s = steer_matrix(&DMatrix::identity(d, d), order).unwrap();
            let m = s.matrix().nrows();
            identity_exact &= s.matrix() == &DMatrix::<f64>::identity(m, m);
            for _ in 0..50 {
                let (r1, r2) = (random_rotation(&mut rng, d), random_rotation(&mut rng, d));
                let s1 = steer_matrix(&r1, order).unwrap();
                let s2 = steer_matrix(&r2, order).unwrap();
                let s12 = steer_matrix(&(&r1 * &r2), order).unwrap();
                homomorphism[slot] = homomorphism[slot].max((s12.matrix() - s1.matrix() * s2.matrix()).norm());
                reversed[slot] = reversed[slot].max((s12.matrix() - s2.matrix() * s1.matrix()).norm());
                if order == 1 {
                    order_one = order_one.max((s1.matrix() - r1.transpose()).abs().max());
                }
            }
        }
    }

    let mut grid = 0.0f64;
    let f2 = RealImage::from_fn(vec![17, 17], |_| rng.gen_range(-1.0..1.0)).unwrap();
    let f3 = RealImage::from_fn(vec![9, 9, 9], |_| rng.gen_range(-1.0..1.0)).unwrap();
    let quarter2 = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let quarter3 = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
    for (f, r) in [(&f2, &quarter2), (&f3, &quarter3)] {
        for order in 1..=3 {
            let rotated = riesz_images(&rotate_grid(f, r), order);
            let moved: Vec<RealImage> = riesz_images(f, order).iter().map(|img| rotate_grid(img, r)).collect();
            let steered = steer_matrix(r, order).unwrap().steer_images(&moved).unwrap();
            for (a, b) in rotated.iter().zip(&steered) {
                grid = grid.max(max_abs_diff(a.data(), b.data()));
            }
        }
    }

    let pass = identity_exact && homomorphism.iter().all(|&e| e < 1e-10) && order_one < 1e-12 && grid < 1e-9;
    outcome(
        pass,
        format!(
            "S(I)=I {}; ‖S(R₁R₂) − S(R₁)S(R₂)‖ d=2 {:.2e}, d=3 {:.2e}; ‖S(R₁R₂) − S(R₂)S(R₁)‖ d=2 {:.2e}, d=3 {:.2e}; \
             N=1 ‖S − Rᵀ‖ {:.2e}; grid oracle {:.2e}",
            if identity_exact { "exact" } else { "FAILED" },
            homomorphism[0],
            homomorphism[1],
            reversed[0],
            reversed[1],
            order_one,
            grid
        ),
    )
}

fn naive_dft(dims: &[usize], data: &[Complex64], sign: f64) -> Vec<Complex64> {
    let (n0, n1) = (dims[0], dims[1]);
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for k0 in 0..n0 {
        for k1 in 0..n1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for x0 in 0..n0 {
                for x1 in 0..n1 {
                    let phase = sign * 2.0 * PI * ((k0 * x0) as f64 / n0 as f64 + (k1 * x1) as f64 / n1 as f64);
                    acc += data[x0 * n1 + x1] * Complex64::from_polar(1.0, phase);
                }
            }
            out[k0 * n1 + k1] = acc;
        }
    }
    out
}

fn dft_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for n0 in 1..=16 {
        for n1 in 1..=16 {
            let dims = [n0, n1];
            let data: Vec<Complex64> =
                (0..n0 * n1).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let expected = naive_dft(&dims, &data, -1.0);
            let got = forward_dft_complex(&dims, &data).unwrap();
            let scale = expected.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let err = got.data().iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst = worst.max(err / scale);

            let back = inverse_dft_complex(&got).unwrap();
            let expected_back: Vec<Complex64> =
                naive_dft(&dims, got.data(), 1.0).iter().map(|c| c / (n0 * n1) as f64).collect();
            let err = back.iter().zip(&expected_back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst = worst.max(err / data.iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
    }
    outcome(worst < 1e-9, format!("all 2D sizes 1..16 × 1..16, forward and inverse, max relative error = {worst:.2e}"))
}

fn hilbert_quadrature() -> Outcome {
    let (n, m) = (128, 64);
    let mut worst = 0.0f64;
    for cycles in [3usize, 10, 21, 40] {
        let omega = 2.0 * PI * cycles as f64 / n as f64;
        let img = RealImage::from_fn(vec![n, m], |c| (omega * c[0] as f64 + 0.7).cos()).unwrap();
        let signal = monogenic(&forward_dft(&img)).unwrap();
        for x in 16..n - 16 {
            for y in 16..m - 16 {
                let i = x * m + y;
                let expected = (omega * x as f64 + 0.7).sin();
                worst = worst.max((signal.riesz[0].data()[i] - expected).abs());
                worst = worst.max(signal.riesz[1].data()[i].abs());
            }
        }
    }
    outcome(worst < 1e-6, format!("max |R₁cos − sin| = {worst:.2e} (16-sample margin)"))
}

fn structure_tensor_orientation() -> Outcome {
    let mut worst_angle = 0.0f64;
    let mut coherency_in_range = true;
    let dims = vec![48, 48];
    let blob = gaussian_blob(&dims, 12.0).unwrap().map(|v| v + 0.1);
    for deg in [0.0f64, 30.0, 45.0, 90.0] {
        let theta = deg.to_radians();
        let wave = plane_wave(&dims, &[0.3 * theta.cos(), 0.3 * theta.sin()], 0.4).unwrap();
        let grad = |axis: usize| {
            RealImage::from_fn(dims.clone(), |c| {
                let mut lo = c.to_vec();
                let mut hi = c.to_vec();
                lo[axis] = lo[axis].saturating_sub(1);
                hi[axis] = (hi[axis] + 1).min(dims[axis] - 1);
                (wave.get(&hi) - wave.get(&lo)) / (hi[axis] - lo[axis]) as f64
            })
            .unwrap()
        };
        let channel_sets = [
            vec![blob.map(|v| theta.cos() * v), blob.map(|v| theta.sin() * v)],
            vec![grad(0), grad(1)],
        ];
        for inputs in &channel_sets {
            let field = structure_tensor(inputs, 3.0, 8).unwrap();
            for y in 10..dims[0] - 10 {
                for x in 10..dims[1] - 10 {
                    let v = field.eigenvector(y * dims[1] + x, 2);
                    let dot = (v[0] * theta.cos() + v[1] * theta.sin()).abs().min(1.0);
                    worst_angle = worst_angle.max(dot.acos().to_degrees());
                }
            }
            coherency_in_range &= coherency(&field).data().iter().all(|c| (0.0..=1.0).contains(c));
        }
    }
    let pure = structure_tensor(
        &[RealImage::from_fn(vec![16, 16], |_| 1.0).unwrap(), RealImage::zeros(vec![16, 16]).unwrap()],
        1.0,
        2,
    )
    .unwrap();
    let pure_coherency = coherency(&pure).data().iter().map(|c| (c - 1.0).abs()).fold(0.0, f64::max);
    outcome(
        worst_angle < 2.0 && coherency_in_range && pure_coherency < 1e-12,
        format!(
            "max angle error {worst_angle:.3}°; χ ∈ [0,1] {}; pure gradient |χ − 1| = {pure_coherency:.1e}",
            if coherency_in_range { "yes" } else { "NO" }
        ),
    )
}

fn phase_regression() -> Outcome {
    let start = Instant::now();
    let update = std::env::var("UPDATE_SNAPSHOTS").is_ok_and(|v| v == "1");
    let board = checkerboard(&[128, 128], 16, 0.0, 255.0).unwrap();
    let wavelet = WaveletFunction::simoncelli();
    let k_sigmas = 1.0;
    let mut failures = Vec::new();
    let mut worst_dev = 0.0f64;
    let mut outputs: Vec<Vec<f64>> = Vec::new();
    if update {
        std::fs::create_dir_all(snapshot_dir()).expect("snapshot directory");
    }
    for levels in 1..=4 {
        for bands in [1, 2, 5] {
            let label = format!("L{levels} B{bands}");
            let first = riesz_wavelet_phase_analysis(&board, &wavelet, levels, bands, k_sigmas).unwrap();
            let second = riesz_wavelet_phase_analysis(&board, &wavelet, levels, bands, k_sigmas).unwrap();
            let bitwise = first.image.data().iter().zip(second.image.data()).all(|(a, b)| a.to_bits() == b.to_bits());
            if !bitwise {
                failures.push(format!("{label} not deterministic"));
            }
            let bounded = first.band_phases.iter().all(|b| b.image.data().iter().all(|v| (-1.0..=1.0).contains(v)));
            if !bounded || first.band_phases.len() != levels * bands {
                failures.push(format!("{label} band phase outside [−1, 1]"));
            }
            let snap = PhaseSnapshot::capture(&first.image, "simoncelli", levels, bands, k_sigmas);
            let path = snapshot_path("simoncelli", levels, bands);
            if update {
                snap.store(&path).expect("write snapshot");
            }
            match PhaseSnapshot::load(&path).map(|reference| snap.deviation(&reference)) {
                Some(Some(dev)) => {
                    worst_dev = worst_dev.max(dev);
                    if dev >= 1e-9 {
                        failures.push(format!("{label} deviates by {dev:.2e}"));
                    }
                }
                Some(None) => failures.push(format!("{label} snapshot has a different shape")),
                None => failures.push(format!("{label} snapshot missing ({})", path.display())),
            }
            outputs.push(first.image.into_data());
        }
    }
    let distinct = (0..outputs.len()).all(|i| (i + 1..outputs.len()).all(|j| outputs[i] != outputs[j]));
    if !distinct {
        failures.push("two configurations produced identical outputs".into());
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        failures.push(format!("runtime {elapsed:.1}s"));
    }
    let detail = if failures.is_empty() {
        format!("12 configs deterministic, distinct, bounded; max snapshot deviation {worst_dev:.2e}; {elapsed:.2}s")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn max_levels_rule() -> Outcome {
    let cases: [(&[usize], usize); 7] = [
        (&[512, 512], 8),
        (&[512], 8),
        (&[64, 64], 5),
        (&[64, 64, 64], 5),
        (&[63, 63], 0),
        (&[127], 0),
        (&[64, 33], 0),
    ];
    let wrong: Vec<String> = cases
        .iter()
        .filter(|(dims, expected)| max_levels(dims) != *expected)
        .map(|(dims, expected)| format!("{dims:?}: {} ≠ {expected}", max_levels(dims)))
        .collect();
    outcome(wrong.is_empty(), if wrong.is_empty() { "512 → 8, 64 → 5, odd → 0".into() } else { wrong.join("; ") })
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("partition of unity", partition_of_unity),
        ("perfect reconstruction", perfect_reconstruction),
        ("Parseval frame energy", parseval_energy),
        ("Riesz component count", riesz_component_count),
        ("Riesz unit-norm identity", riesz_unit_norm),
        ("steering laws", steering_laws),
        ("DFT oracle", dft_oracle),
        ("Hilbert-pair quadrature", hilbert_quadrature),
        ("structure tensor orientation", structure_tensor_orientation),
        ("phase pipeline regression", phase_regression),
        ("max-levels rule", max_levels_rule),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = run();
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
