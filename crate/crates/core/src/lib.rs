//! Frequency-domain multiresolution analysis for N-dimensional images.
//!
//! The building blocks are an isotropic band-limited wavelet pyramid
//! ([`pyramid`]), generalized Riesz transforms with steering ([`riesz`]),
//! monogenic local-phase analysis ([`phase`]) and a structure tensor for
//! orientation estimation ([`tensor`]). Everything works on spectra in the
//! Standard FFT layout produced by [`frequency::forward_dft`].

pub mod error;
pub mod frequency;
pub mod image;
pub mod io;
pub mod phase;
pub mod pyramid;
pub mod riesz;
pub mod synth;
pub mod tensor;
pub mod wavelet;

pub use error::{Error, Result};
pub use image::{ComplexSpectrum, Layout, RealImage};
