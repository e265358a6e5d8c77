//! Isotropic band-limited mother wavelets and the per-level filter bank.
//!
//! A mother wavelet is a radial profile `h(ω)` supported on `(π/4, π]`
//! whose dyadic dilations square-sum to one. Each pyramid level splits the
//! spectrum into a low-pass `LP` and `B` high-pass sub-bands with
//! `LP² + Σ HP_b² = 1` at every frequency.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::radial_frequency_grid;
use crate::image::ComplexSpectrum;

/// Optimal Vow parameter.
pub const DEFAULT_KAPPA: f64 = 0.75;

/// Highest supported Held polynomial order.
pub const MAX_HELD_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletKind {
    Vow,
    Held,
    Simoncelli,
    Shannon,
}

impl WaveletKind {
    pub const ALL: [WaveletKind; 4] = [
        WaveletKind::Vow,
        WaveletKind::Held,
        WaveletKind::Simoncelli,
        WaveletKind::Shannon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WaveletKind::Vow => "vow",
            WaveletKind::Held => "held",
            WaveletKind::Simoncelli => "simoncelli",
            WaveletKind::Shannon => "shannon",
        }
    }
}

impl fmt::Display for WaveletKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveletKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WaveletKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::param(
                    "wavelet",
                    format!("unknown wavelet `{s}`; supported kinds: vow, held, simoncelli, shannon"),
                )
            })
    }
}

/// Held's `q_n`, stored in the local variable `s = 8t − 1` so that the
/// interpolation nodes `t = 1/8` and `t = 1/4` map to `s = 0` and `s = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeldPolynomial {
    order: usize,
    coefficients: Vec<f64>,
}

impl HeldPolynomial {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficients in powers of `s = 8t − 1`, lowest degree first.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficients in powers of `t`, lowest degree first.
    pub fn monomial_coefficients(&self) -> Vec<f64> {
        // s^k = (8t − 1)^k = Σ_j C(k, j) 8^j t^j (−1)^(k−j)
        let mut out = vec![0.0; self.coefficients.len()];
        for (k, &c) in self.coefficients.iter().enumerate() {
            let mut binom = 1.0;
            for j in 0..=k {
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                out[j] += c * binom * 8f64.powi(j as i32) * sign;
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = 8.0 * t - 1.0;
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }
}

/// The Hermite interpolant of degree `2n + 1` with `q(1/8) = 1/4`, `q(1/4) = 0`
/// and vanishing derivatives of orders `1..=n` at both nodes.
pub fn held_polynomial(order: usize) -> Result<HeldPolynomial> {
    if order > MAX_HELD_ORDER {
        return Err(Error::param(
            "held_order",
            format!("order {order} unsupported (max {MAX_HELD_ORDER})"),
        ));
    }
    let size = 2 * order + 2;
    // d^i/ds^i s^k at s = x
    let derivative = |k: usize, i: usize, x: f64| -> f64 {
        if i > k {
            return 0.0;
        }
        let falling: f64 = ((k - i + 1)..=k).map(|v| v as f64).product();
        falling * x.powi((k - i) as i32)
    };
    let mut a = DMatrix::<f64>::zeros(size, size);
    let mut b = DVector::<f64>::zeros(size);
    for i in 0..=order {
        for k in 0..size {
            a[(2 * i, k)] = derivative(k, i, 0.0);
            a[(2 * i + 1, k)] = derivative(k, i, 1.0);
        }
    }
    b[0] = 0.25;
    let coefficients = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::param("held_order", "singular Hermite system"))?;
    Ok(HeldPolynomial {
        order,
        coefficients: coefficients.iter().copied().collect(),
    })
}

/// A radial mother-wavelet profile.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFunction {
    kind: WaveletKind,
    kappa: f64,
    held: Option<HeldPolynomial>,
}

impl WaveletFunction {
    pub fn vow() -> Self {
        Self::vow_with_kappa(DEFAULT_KAPPA).expect("default kappa is valid")
    }

    pub fn vow_with_kappa(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < FRAC_PI_2) {
            return Err(Error::param("kappa", format!("{kappa} outside (0, π/2)")));
        }
        Ok(WaveletFunction {
            kind: WaveletKind::Vow,
            kappa,
            held: None,
        })
    }

    pub fn held(order: usize) -> Result<Self> {
        Ok(WaveletFunction {
            kind: WaveletKind::Held,
            kappa: DEFAULT_KAPPA,
            held: Some(held_polynomial(order)?),
        })
    }

    pub fn simoncelli() -> Self {
        WaveletFunction {
            kind: WaveletKind::Simoncelli,
            kappa: DEFAULT_KAPPA,
            held: None,
        }
    }

    pub fn shannon() -> Self {
        WaveletFunction {
            kind: WaveletKind::Shannon,
            kappa: DEFAULT_KAPPA,
            held: None,
        }
    }

    /// The default-parameter wavelet of `kind` (Held order 0, Vow κ = 0.75).
    pub fn from_kind(kind: WaveletKind) -> Self {
        match kind {
            WaveletKind::Vow => Self::vow(),
            WaveletKind::Held => Self::held(0).expect("order 0 is supported"),
            WaveletKind::Simoncelli => Self::simoncelli(),
            WaveletKind::Shannon => Self::shannon(),
        }
    }

    /// Rebuilds a wavelet from the parameter map written by [`Self::params`].
    pub fn from_params(kind: WaveletKind, params: &BTreeMap<String, f64>) -> Result<Self> {
        match kind {
            WaveletKind::Vow => Self::vow_with_kappa(params.get("kappa").copied().unwrap_or(DEFAULT_KAPPA)),
            WaveletKind::Held => {
                let order = params.get("held_order").copied().unwrap_or(0.0);
                if order < 0.0 || order.fract() != 0.0 {
                    return Err(Error::param("held_order", format!("{order} is not a nonnegative integer")));
                }
                Self::held(order as usize)
            }
            other => Ok(Self::from_kind(other)),
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        match self.kind {
            WaveletKind::Vow => {
                out.insert("kappa".to_string(), self.kappa);
            }
            WaveletKind::Held => {
                out.insert("held_order".to_string(), self.held_order() as f64);
            }
            _ => {}
        }
        out
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn held_order(&self) -> usize {
        self.held.as_ref().map_or(0, HeldPolynomial::order)
    }

    pub fn held_polynomial(&self) -> Option<&HeldPolynomial> {
        self.held.as_ref()
    }

    /// Mother profile `h(ω)`; errors on negative or NaN input.
    pub fn eval_mother(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::param("omega", format!("{omega} is not a nonnegative frequency")));
        }
        Ok(self.profile(omega))
    }

    /// `h(ω)` for `ω ≥ 0`.
    pub(crate) fn profile(&self, omega: f64) -> f64 {
        match self.kind {
            WaveletKind::Vow => {
                let tan_kappa = self.kappa.tan();
                let radicand = if (FRAC_PI_4..FRAC_PI_2).contains(&omega) {
                    0.5 + (self.kappa * (1.0 + 2.0 * (2.0 * omega / PI).log2())).tan() / (2.0 * tan_kappa)
                } else if (FRAC_PI_2..=PI).contains(&omega) {
                    0.5 - (self.kappa * (1.0 + 2.0 * (omega / PI).log2())).tan() / (2.0 * tan_kappa)
                } else {
                    return 0.0;
                };
                radicand.clamp(0.0, 1.0).sqrt()
            }
            WaveletKind::Held => {
                let q = self.held.as_ref().expect("held wavelet carries its polynomial");
                if omega > FRAC_PI_4 && omega <= FRAC_PI_2 {
                    (2.0 * PI * q.eval(omega / (2.0 * PI))).cos()
                } else if omega > FRAC_PI_2 && omega <= PI {
                    (2.0 * PI * q.eval(omega / (4.0 * PI))).sin()
                } else {
                    0.0
                }
            }
            WaveletKind::Simoncelli => {
                if omega > FRAC_PI_4 && omega <= PI {
                    (FRAC_PI_2 * (2.0 * omega / PI).log2()).cos().max(0.0)
                } else {
                    0.0
                }
            }
            WaveletKind::Shannon => {
                if (FRAC_PI_2..PI).contains(&omega) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Level low-pass `LP(ω) = sqrt(Σ_{i≥1} h(2^i ω)²)`, with `LP(0) = 1`.
    pub fn eval_level_lowpass(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return 1.0;
        }
        let mut sum = 0.0;
        let mut x = 2.0 * omega;
        while x <= PI {
            sum += self.profile(x).powi(2);
            x *= 2.0;
        }
        sum.min(1.0).sqrt()
    }

    /// The `B` high-pass sub-band gains at `ω`, lowest band first.
    pub fn eval_subbands(&self, bands: usize, omega: f64) -> Result<Vec<f64>> {
        if bands == 0 {
            return Err(Error::param("bands", "at least one high-pass sub-band is required"));
        }
        Ok(self.subbands_with_lowpass(bands, omega, self.eval_level_lowpass(omega)))
    }

    fn subbands_with_lowpass(&self, bands: usize, omega: f64, lp: f64) -> Vec<f64> {
        let hp2 = (1.0 - lp * lp).max(0.0);
        if bands == 1 {
            return vec![hp2.sqrt()];
        }
        let mut weights: Vec<f64> = (1..=bands)
            .map(|b| {
                let dilation = 2f64.powf((bands - b) as f64 / bands as f64);
                self.profile(dilation * omega).powi(2)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        } else {
            weights.iter_mut().for_each(|w| *w = 0.0);
            let target = if lp < 0.5 { bands - 1 } else { 0 };
            weights[target] = 1.0;
        }
        weights.into_iter().map(|w| (hp2 * w).sqrt()).collect()
    }

    /// `(LP, [HP_1..HP_B])` at `ω`.
    pub fn eval_level(&self, bands: usize, omega: f64) -> Result<(f64, Vec<f64>)> {
        let lp = self.eval_level_lowpass(omega);
        if bands == 0 {
            return Err(Error::param("bands", "at least one high-pass sub-band is required"));
        }
        Ok((lp, self.subbands_with_lowpass(bands, omega, lp)))
    }
}

/// Real nonnegative low-pass and sub-band gains sampled on a Standard grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    dims: Vec<usize>,
    wavelet: WaveletFunction,
    low_pass: Vec<f64>,
    sub_bands: Vec<Vec<f64>>,
}

impl FilterBank {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn wavelet(&self) -> &WaveletFunction {
        &self.wavelet
    }

    pub fn bands(&self) -> usize {
        self.sub_bands.len()
    }

    pub fn low_pass(&self) -> &[f64] {
        &self.low_pass
    }

    /// Gains of sub-band `band` (zero-based, lowest frequency first).
    pub fn sub_band(&self, band: usize) -> &[f64] {
        &self.sub_bands[band]
    }

    pub fn sub_bands(&self) -> &[Vec<f64>] {
        &self.sub_bands
    }

    fn as_spectrum(&self, gains: &[f64]) -> ComplexSpectrum {
        let data = gains.iter().map(|&g| Complex64::new(g, 0.0)).collect();
        ComplexSpectrum::standard(self.dims.clone(), data).expect("bank dims are valid")
    }

    pub fn low_pass_spectrum(&self) -> ComplexSpectrum {
        self.as_spectrum(&self.low_pass)
    }

    pub fn sub_band_spectrum(&self, band: usize) -> ComplexSpectrum {
        self.as_spectrum(&self.sub_bands[band])
    }
}

/// Samples the level low-pass and sub-bands at every bin of a Standard grid.
pub fn generate_filter_bank(wavelet: &WaveletFunction, dims: &[usize], bands: usize) -> Result<FilterBank> {
    if bands == 0 {
        return Err(Error::param("bands", "at least one high-pass sub-band is required"));
    }
    if dims.is_empty() || dims.iter().any(|&n| n < 2) {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            reason: "filter banks need every axis size ≥ 2".into(),
        });
    }
    let radii = radial_frequency_grid(dims);
    let values: Vec<(f64, Vec<f64>)> = radii
        .par_iter()
        .map(|&w| {
            let lp = wavelet.eval_level_lowpass(w);
            (lp, wavelet.subbands_with_lowpass(bands, w, lp))
        })
        .collect();
    let mut low_pass = Vec::with_capacity(values.len());
    let mut sub_bands = vec![Vec::with_capacity(values.len()); bands];
    for (lp, hp) in values {
        low_pass.push(lp);
        for (band, v) in sub_bands.iter_mut().zip(hp) {
            band.push(v);
        }
    }
    Ok(FilterBank {
        dims: dims.to_vec(),
        wavelet: wavelet.clone(),
        low_pass,
        sub_bands,
    })
}

/// One sample of a radial profile table.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub omega: f64,
    pub mother: f64,
    pub sub_bands: Vec<f64>,
    pub high_pass: f64,
    pub low_pass: f64,
}

/// Samples `h`, the sub-bands and `LP` on a uniform grid over `[0, 1.05π]`.
pub fn emit_profile(wavelet: &WaveletFunction, bands: usize, samples: usize) -> Result<Vec<ProfileRow>> {
    if samples < 2 {
        return Err(Error::param("samples", "need at least two samples"));
    }
    let end = 1.05 * PI;
    (0..samples)
        .map(|i| {
            let omega = end * i as f64 / (samples - 1) as f64;
            let (lp, sub_bands) = wavelet.eval_level(bands, omega)?;
            Ok(ProfileRow {
                omega,
                mother: wavelet.profile(omega),
                high_pass: (1.0 - lp * lp).max(0.0).sqrt(),
                sub_bands,
                low_pass: lp,
            })
        })
        .collect()
}

/// `%g`-style formatting with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// Writes profile rows as CSV with header `omega,h,h_1,…,h_B,lp`.
pub fn write_profile_csv(rows: &[ProfileRow], mut out: impl Write) -> std::io::Result<()> {
    let bands = rows.first().map_or(0, |r| r.sub_bands.len());
    let mut header = vec!["omega".to_string(), "h".to_string()];
    header.extend((1..=bands).map(|b| format!("h_{b}")));
    header.push("lp".to_string());
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let mut fields = vec![format_sig6(row.omega), format_sig6(row.mother)];
        fields.extend(row.sub_bands.iter().map(|&v| format_sig6(v)));
        fields.push(format_sig6(row.low_pass));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
