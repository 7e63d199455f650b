//! Multiple-description coding by dithered Delta-Sigma quantization.
//!
//! A source block is oversampled by `K`, passed through a noise-shaping
//! feedback loop around a subtractively dithered uniform quantizer, and the
//! quantizer indices are split by phase (`k mod K`) into `K` descriptions.
//! Any received subset is decoded by interlacing, low-pass filtering,
//! phase correction and a Wiener post-multiplier.
//!
//! The crate is organised bottom-up:
//!
//! * [`dsp`]: sinc interpolation, decimation, fractional delays, spectra.
//! * [`ecdq`]: dithered quantization, error statistics and rate accounting.
//! * [`shaping`]: noise-shaping filter design and spectral measurements.
//! * [`codec`]: the encoder loop and the central/side decoders.
//! * [`theory`]: closed-form rates and distortions used as oracles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod dsp;
pub mod ecdq;
mod error;
pub mod rng;
pub mod shaping;
pub mod theory;

pub use error::{Error, Result};
