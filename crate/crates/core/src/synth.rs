//! Deterministic synthetic test images.

use crate::error::Result;
use crate::image::RealImage;

/// Alternating `low`/`high` hypercubes of side `square`, starting with `low` at the origin.
pub fn checkerboard(dims: &[usize], square: usize, low: f64, high: f64) -> Result<RealImage> {
    let square = square.max(1);
    RealImage::from_fn(dims.to_vec(), |c| {
        if c.iter().map(|&k| k / square).sum::<usize>() % 2 == 0 {
            low
        } else {
            high
        }
    })
}

/// `cos(⟨ω, x⟩ + phase)` for a wave vector `omega` in radians per sample.
pub fn plane_wave(dims: &[usize], omega: &[f64], phase: f64) -> Result<RealImage> {
    RealImage::from_fn(dims.to_vec(), |c| {
        let arg: f64 = c.iter().zip(omega).map(|(&k, &w)| k as f64 * w).sum();
        (arg + phase).cos()
    })
}

/// Isotropic Gaussian bump of width `sigma` centered on the grid.
pub fn gaussian_blob(dims: &[usize], sigma: f64) -> Result<RealImage> {
    RealImage::from_fn(dims.to_vec(), |c| {
        let r2: f64 = c
            .iter()
            .zip(dims)
            .map(|(&k, &n)| (k as f64 - (n as f64 - 1.0) / 2.0).powi(2))
            .sum();
        (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_layout() {
        let img = checkerboard(&[4, 4], 2, 0.0, 255.0).unwrap();
        assert_eq!(
            img.data(),
            &[0.0, 0.0, 255.0, 255.0, 0.0, 0.0, 255.0, 255.0, 255.0, 255.0, 0.0, 0.0, 255.0, 255.0, 0.0, 0.0]
        );
    }

    #[test]
    fn wave_and_blob() {
        let w = plane_wave(&[3, 3], &[0.0, std::f64::consts::PI], 0.0).unwrap();
        assert!((w.get(&[2, 1]) + 1.0).abs() < 1e-15);
        let b = gaussian_blob(&[5, 5], 1.0).unwrap();
        assert_eq!(b.get(&[2, 2]), 1.0);
        assert_eq!(b.get(&[0, 1]), b.get(&[4, 3]));
    }
}
