//! Generalized Riesz transform of order `N` and its steering matrices.
//!
//! Component `n` (a multiindex with `|n| = N`) has the frequency response
//! `(−j)^N · sqrt(N!/n!) · ω^n / ‖ω‖^N`, set to zero at DC. The squared
//! magnitudes of all `p(N, d)` components sum to one away from DC.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frequency::standard_axis_frequency;
use crate::image::{increment, sample_count, ComplexSpectrum, Layout, RealImage};

/// Tolerance on `‖RᵀR − I‖_F` for a matrix to count as a rotation.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

/// A `d`-tuple of nonnegative exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|n| = Σ n_i`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// `n! = n_1!⋯n_d!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&k| factorial(k)).product()
    }

    /// `sqrt(|n|! / n!)`.
    pub fn weight(&self) -> f64 {
        (factorial(self.order()) / self.factorial()).sqrt()
    }

    /// `u^n = u_1^{n_1}⋯u_d^{n_d}`.
    pub fn power(&self, u: &[f64]) -> f64 {
        self.0.iter().zip(u).map(|(&k, &x)| x.powi(k as i32)).product()
    }

    /// File stem used when persisting a component image, e.g. `riesz_n2-0-1`.
    pub fn file_stem(&self) -> String {
        format!("riesz_n{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Closed form `p(N, d) = (N + d − 1)! / ((d − 1)! N!)`.
pub fn component_count(order: usize, dim: usize) -> usize {
    if dim == 0 {
        return 0;
    }
    // C(N + d − 1, d − 1) by the multiplicative formula
    (1..dim).fold(1usize, |acc, i| acc * (order + i) / i)
}

/// All `d`-tuples summing to `order`, in descending lexicographic order.
pub fn multiindices(order: usize, dim: usize) -> Vec<MultiIndex> {
    fn fill(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            fill(remaining - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        fill(order, dim, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

fn minus_j_pow(order: usize) -> Complex64 {
    match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Frequency response of component `n` at `ω`; zero at `ω = 0`.
pub fn eval_riesz_component(n: &MultiIndex, omega: &[f64]) -> Complex64 {
    let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let unit: Vec<f64> = omega.iter().map(|w| w / norm).collect();
    minus_j_pow(n.order()) * (n.weight() * n.power(&unit))
}

/// All component responses sampled on a Standard grid.
#[derive(Debug, Clone)]
pub struct RieszBank {
    order: usize,
    dims: Vec<usize>,
    indices: Vec<MultiIndex>,
    components: Vec<Vec<Complex64>>,
}

impl RieszBank {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.components[i]
    }

    pub fn component_spectrum(&self, i: usize) -> ComplexSpectrum {
        ComplexSpectrum::standard(self.dims.clone(), self.components[i].clone()).expect("bank dims are valid")
    }
}

/// Samples every order-`order` component at each bin of a Standard grid.
pub fn generate_riesz_bank(order: usize, dims: &[usize]) -> Result<RieszBank> {
    if dims.is_empty() || dims.iter().any(|&n| n == 0) {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            reason: "empty grid".into(),
        });
    }
    let indices = multiindices(order, dims.len());
    let mut freqs = Vec::with_capacity(sample_count(dims));
    let mut coords = vec![0; dims.len()];
    loop {
        freqs.push(coords.iter().zip(dims).map(|(&k, &n)| standard_axis_frequency(k, n)).collect::<Vec<f64>>());
        if !increment(dims, &mut coords) {
            break;
        }
    }
    let components = indices
        .iter()
        .map(|n| freqs.par_iter().map(|w| eval_riesz_component(n, w)).collect())
        .collect();
    Ok(RieszBank {
        order,
        dims: dims.to_vec(),
        indices,
        components,
    })
}

/// Multiplies `spectrum` by every component response.
pub fn apply_riesz(bank: &RieszBank, spectrum: &ComplexSpectrum) -> Result<Vec<ComplexSpectrum>> {
    spectrum.require_layout(Layout::Standard)?;
    if spectrum.dims() != bank.dims() {
        return Err(Error::DimsMismatch {
            expected: bank.dims.clone(),
            found: spectrum.dims().to_vec(),
        });
    }
    Ok(bank
        .components
        .iter()
        .map(|response| {
            spectrum.with_data(spectrum.data().iter().zip(response).map(|(x, r)| x * r).collect())
        })
        .collect())
}

/// The `M×M` matrix steering order-`N` Riesz coefficients by a rotation `R`.
///
/// Defined by `Y(Rᵀu) = S(R)·Y(u)` for `Y_n(u) = sqrt(N!/n!)·u^n`, so `S(R)`
/// applied to the Riesz vector of `f` yields the Riesz vector of `x ↦ f(Rx)`.
/// Under this convention `S(R₁R₂) = S(R₂)·S(R₁)` and `S = Rᵀ` for `N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerMatrix {
    order: usize,
    rotation: DMatrix<f64>,
    indices: Vec<MultiIndex>,
    matrix: DMatrix<f64>,
}

impl SteerMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.rotation.nrows()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Steers one coefficient vector (ordered like [`multiindices`]).
    pub fn steer_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        Ok((0..self.matrix.nrows())
            .map(|n| (0..self.matrix.ncols()).map(|m| self.matrix[(n, m)] * values[m]).sum())
            .collect())
    }

    /// Steers complex coefficient vectors, e.g. Riesz spectra sample by sample.
    pub fn steer_complex(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        Ok((0..self.matrix.nrows())
            .map(|n| (0..self.matrix.ncols()).map(|m| values[m] * self.matrix[(n, m)]).sum())
            .collect())
    }

    /// Steers `M` component images sample by sample.
    pub fn steer_images(&self, images: &[RealImage]) -> Result<Vec<RealImage>> {
        self.check_len(images.len())?;
        let dims = images[0].dims().to_vec();
        if let Some(bad) = images.iter().find(|img| img.dims() != dims.as_slice()) {
            return Err(Error::DimsMismatch {
                expected: dims,
                found: bad.dims().to_vec(),
            });
        }
        let m = images.len();
        let mut out = vec![vec![0.0; images[0].len()]; m];
        let mut sample = vec![0.0; m];
        for i in 0..images[0].len() {
            for (slot, img) in sample.iter_mut().zip(images) {
                *slot = img.data()[i];
            }
            for (n, row) in out.iter_mut().enumerate() {
                row[i] = (0..m).map(|k| self.matrix[(n, k)] * sample[k]).sum();
            }
        }
        out.into_iter().map(|data| RealImage::new(dims.clone(), data)).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.matrix.ncols() {
            return Err(Error::param(
                "components",
                format!("expected {} Riesz components, got {len}", self.matrix.ncols()),
            ));
        }
        Ok(())
    }
}

type Polynomial = BTreeMap<Vec<usize>, f64>;

fn multiply_linear(poly: &Polynomial, coefficients: &[f64]) -> Polynomial {
    let mut out = Polynomial::new();
    for (exponents, &c) in poly {
        for (j, &a) in coefficients.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let mut e = exponents.clone();
            e[j] += 1;
            *out.entry(e).or_insert(0.0) += c * a;
        }
    }
    out
}

/// Builds `S(R)` by expanding `∏_i (Σ_j (Rᵀ)_{ij} u_j)^{n_i}` for every component.
pub fn steer_matrix(rotation: &DMatrix<f64>, order: usize) -> Result<SteerMatrix> {
    let d = rotation.nrows();
    if d == 0 || rotation.ncols() != d {
        return Err(Error::param("rotation", format!("{}×{} is not square", rotation.nrows(), rotation.ncols())));
    }
    let defect = (rotation.transpose() * rotation - DMatrix::<f64>::identity(d, d)).norm();
    if !(defect < ORTHOGONALITY_TOLERANCE) {
        return Err(Error::param("rotation", format!("not orthogonal (‖RᵀR − I‖ = {defect:e})")));
    }
    let indices = multiindices(order, d);
    let position: BTreeMap<&[usize], usize> =
        indices.iter().enumerate().map(|(i, n)| (n.entries(), i)).collect();
    let m = indices.len();
    let mut matrix = DMatrix::<f64>::zeros(m, m);
    for (row, n) in indices.iter().enumerate() {
        let mut poly = Polynomial::new();
        poly.insert(vec![0; d], 1.0);
        for (i, &power) in n.entries().iter().enumerate() {
            // i-th component of Rᵀu is Σ_j R[j][i] u_j
            let linear: Vec<f64> = (0..d).map(|j| rotation[(j, i)]).collect();
            for _ in 0..power {
                poly = multiply_linear(&poly, &linear);
            }
        }
        for (exponents, c) in poly {
            let col = position[exponents.as_slice()];
            matrix[(row, col)] += n.weight() * c / indices[col].weight();
        }
    }
    Ok(SteerMatrix {
        order,
        rotation: rotation.clone(),
        indices,
        matrix,
    })
}
