//! Entropy-coded dithered quantization on the scaled integer lattice.
//!
//! With subtractive dither `z` uniform over one cell, the error
//! `Δ·round((s+z)/Δ) - z - s` is uniform on `(-Δ/2, Δ/2]` and independent of
//! `s`. Rounding is `floor(v + 1/2)`, so exact ties go up.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::dsp::SignalBlock;
use crate::rng::dither_rng;
use crate::{Error, Result};

/// Scalar lattice `ΔZ`, applied coordinate-wise to `dimension` parallel streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub step: f64,
    pub dimension: usize,
}

impl QuantizerSpec {
    pub fn new(step: f64) -> Result<Self> {
        Self::product(step, 1)
    }

    pub fn product(step: f64, dimension: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!("step {step} must be positive")));
        }
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self { step, dimension })
    }

    /// Quantizer whose noise variance is `sigma_e2`.
    pub fn from_noise_variance(sigma_e2: f64) -> Result<Self> {
        Self::new((12.0 * sigma_e2).sqrt())
    }

    pub fn noise_variance(&self) -> f64 {
        self.step * self.step / 12.0
    }

    /// Rate loss of the cubic cell against a Gaussian of equal variance.
    pub fn space_filling_bits(&self) -> f64 {
        0.5 * (2.0 * PI * E / 12.0).log2()
    }
}

/// Quantize `s + z` and subtract the dither.
pub fn quantize_dithered(s: &[f64], z: &[f64], q: &QuantizerSpec) -> Result<(Vec<i64>, Vec<f64>)> {
    if s.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            got: z.len(),
        });
    }
    let mut index = Vec::with_capacity(s.len());
    let mut recon = Vec::with_capacity(s.len());
    for (&si, &zi) in s.iter().zip(z) {
        let (i, r) = quantize_one(si, zi, q.step)?;
        index.push(i);
        recon.push(r);
    }
    Ok((index, recon))
}

#[inline]
pub(crate) fn quantize_one(s: f64, z: f64, step: f64) -> Result<(i64, f64)> {
    if !(s.is_finite() && z.is_finite()) {
        return Err(Error::NonFinite("quantizer input"));
    }
    let idx = ((s + z) / step + 0.5).floor();
    Ok((idx as i64, step * idx - z))
}

/// Dither uniform on `[-Δ/2, Δ/2)` from a seeded generator.
#[derive(Debug, Clone)]
pub struct DitherStream {
    seed: u64,
    step: f64,
    rng: ChaCha12Rng,
}

impl DitherStream {
    pub fn new(seed: u64, q: &QuantizerSpec) -> Self {
        Self::for_phase(seed, 0, q)
    }

    /// Stream for oversampled phase `phase`; phases are independent.
    pub fn for_phase(seed: u64, phase: usize, q: &QuantizerSpec) -> Self {
        Self {
            seed,
            step: q.step,
            rng: dither_rng(seed, phase),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_value(&mut self) -> f64 {
        (self.rng.random::<f64>() - 0.5) * self.step
    }

    pub fn take(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_value()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub mean: f64,
    pub variance: f64,
    /// Normalized autocorrelation at lags 1 through 10.
    pub lag_autocorr: [f64; 10],
    /// Normalized correlation between errors and inputs.
    pub input_crosscorr: f64,
    /// Kolmogorov-Smirnov distance to the uniform law on `[-Δ/2, Δ/2]`.
    pub uniformity_statistic: f64,
}

pub const MIN_STATISTICS_SAMPLES: usize = 10_000;

pub fn error_statistics(errors: &SignalBlock, inputs: &SignalBlock, q: &QuantizerSpec) -> Result<ErrorReport> {
    let e = errors.interior();
    let x = inputs.interior();
    if e.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            got: x.len(),
        });
    }
    if e.len() < MIN_STATISTICS_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_STATISTICS_SAMPLES,
            got: e.len(),
        });
    }
    let n = e.len() as f64;
    let mean = e.iter().sum::<f64>() / n;
    let variance = e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut lag_autocorr = [0.0; 10];
    if variance > 0.0 {
        for (l, slot) in lag_autocorr.iter_mut().enumerate() {
            let lag = l + 1;
            let s: f64 = e
                .windows(lag + 1)
                .map(|w| (w[0] - mean) * (w[lag] - mean))
                .sum();
            *slot = s / (n * variance);
        }
    }
    let xmean = x.iter().sum::<f64>() / n;
    let xvar = x.iter().map(|v| (v - xmean).powi(2)).sum::<f64>() / n;
    let input_crosscorr = if variance > 0.0 && xvar > 0.0 {
        e.iter()
            .zip(x)
            .map(|(a, b)| (a - mean) * (b - xmean))
            .sum::<f64>()
            / (n * (variance * xvar).sqrt())
    } else {
        0.0
    };
    let mut sorted = e.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cdf = |v: f64| ((v / q.step) + 0.5).clamp(0.0, 1.0);
    let uniformity_statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(ErrorReport {
        mean,
        variance,
        lag_autocorr,
        input_crosscorr,
        uniformity_statistic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub gaussian_rate_bits: f64,
    /// Extra rate of the cubic lattice; reported, not included above.
    pub finite_l_penalty_bits: f64,
}

fn gaussian_entropy_bits(variance: f64) -> f64 {
    0.5 * (2.0 * PI * E * variance).log2()
}

/// Rate of a Gaussian output of variance `var_output` observed through
/// additive noise of the quantizer's variance.
pub fn rate_accounting(var_output: f64, q: &QuantizerSpec) -> Result<RateReport> {
    let noise = q.noise_variance();
    if !(var_output > noise) {
        return Err(Error::SubNoiseVariance {
            var_output,
            noise_variance: noise,
        });
    }
    Ok(RateReport {
        gaussian_rate_bits: gaussian_entropy_bits(var_output) - gaussian_entropy_bits(noise),
        finite_l_penalty_bits: q.space_filling_bits(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::SignalBlock;
    use proptest::{prop_assert, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn unit() -> QuantizerSpec {
        QuantizerSpec::new(1.0).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let (i, r) = quantize_dithered(&[0.3], &[0.0], &unit()).unwrap();
        assert_eq!(i, vec![0]);
        assert_eq!(r, vec![0.0]);
        let (i, r) = quantize_dithered(&[0.3], &[0.3], &unit()).unwrap();
        assert_eq!(i, vec![1]);
        assert!((r[0] - 0.7).abs() < 1e-15);
        assert!((r[0] - 0.3 - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(quantize_dithered(&[f64::NAN], &[0.0], &unit()).is_err());
        assert!(matches!(
            quantize_dithered(&[0.0, 1.0], &[0.0], &unit()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn derived_constants() {
        let q = QuantizerSpec::product(0.5, 8).unwrap();
        assert_eq!(q.noise_variance(), 0.25 / 12.0);
        assert!((q.space_filling_bits() - 0.2546).abs() < 1e-4);
        assert!((unit().space_filling_bits() - q.space_filling_bits()).abs() == 0.0);
    }

    #[test]
    fn rate_examples() {
        let q = QuantizerSpec::from_noise_variance(0.01).unwrap();
        let r = rate_accounting(1.02125, &q).unwrap();
        assert!((r.gaussian_rate_bits - 0.5 * 102.125f64.log2()).abs() < 1e-10);
        assert!((r.gaussian_rate_bits - 3.3371).abs() < 1e-4);
        let r = rate_accounting(0.02, &q).unwrap();
        assert!((r.gaussian_rate_bits - 0.5).abs() < 1e-12);
        assert!((r.finite_l_penalty_bits - 0.2546).abs() < 1e-4);
        assert!(matches!(rate_accounting(0.01, &q), Err(Error::SubNoiseVariance { .. })));
    }

    #[test]
    fn random_errors_are_uniform_white_and_independent() {
        let n = 1_000_000;
        let q = unit();
        let mut src = ChaCha8Rng::seed_from_u64(1);
        let s: Vec<f64> = (0..n).map(|_| 3.0 * src.sample::<f64, _>(StandardNormal)).collect();
        let z = DitherStream::new(2, &q).take(n);
        let (_, r) = quantize_dithered(&s, &z, &q).unwrap();
        let e: Vec<f64> = r.iter().zip(&s).map(|(a, b)| a - b).collect();
        let rep = error_statistics(&SignalBlock::base(e), &SignalBlock::base(s), &q).unwrap();
        let gate = 4.0 / (n as f64).sqrt();
        assert!(rep.mean.abs() <= 0.002);
        assert!((rep.variance * 12.0 - 1.0).abs() <= 0.01);
        for c in rep.lag_autocorr {
            assert!(c.abs() <= gate, "{c}");
        }
        assert!(rep.input_crosscorr.abs() <= gate);
        assert!(rep.uniformity_statistic < 0.003);
    }

    #[test]
    fn degenerate_errors() {
        let zeros = SignalBlock::base(vec![0.0; 20_000]);
        let inputs = SignalBlock::base((0..20_000).map(|v| v as f64).collect());
        let rep = error_statistics(&zeros, &inputs, &unit()).unwrap();
        assert_eq!(rep.variance, 0.0);
        assert!((rep.uniformity_statistic - 0.5).abs() < 1e-12);
        let short = SignalBlock::base(vec![0.0; 100]);
        assert!(matches!(
            error_statistics(&short, &short, &unit()),
            Err(Error::TooFewSamples { .. })
        ));
    }

    fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn error_law_does_not_depend_on_input() {
        let n = 100_000;
        let q = QuantizerSpec::new(0.37).unwrap();
        let mut src = ChaCha8Rng::seed_from_u64(3);
        let errs = |s: Vec<f64>, seed| {
            let z = DitherStream::new(seed, &q).take(s.len());
            let (_, r) = quantize_dithered(&s, &z, &q).unwrap();
            r.iter().zip(&s).map(|(a, b)| a - b).collect::<Vec<f64>>()
        };
        let mut zero = errs(vec![0.0; n], 10);
        let gauss: Vec<f64> = (0..n).map(|_| src.sample::<f64, _>(StandardNormal)).collect();
        let laplace: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = src.random::<f64>() - 0.5;
                -u.signum() * (1.0 - 2.0 * u.abs()).ln()
            })
            .collect();
        let mut g = errs(gauss, 11);
        let mut l = errs(laplace, 12);
        assert!(two_sample_ks(&mut zero, &mut g) <= 0.01);
        assert!(two_sample_ks(&mut zero.clone(), &mut l) <= 0.01);
    }

    #[test]
    fn dither_is_reproducible_and_in_range() {
        let q = QuantizerSpec::new(2.0).unwrap();
        let a = DitherStream::new(99, &q).take(1000);
        assert_eq!(a, DitherStream::new(99, &q).take(1000));
        assert!(a.iter().all(|&z| (-1.0..1.0).contains(&z)));
    }

    proptest! {
        #[test]
        fn error_support_and_identity(s in -1e3f64..1e3, u in 0.0f64..1.0, step in 1e-3f64..10.0) {
            let q = QuantizerSpec::new(step).unwrap();
            let z = (u - 0.5) * step;
            let (i, r) = quantize_dithered(&[s], &[z], &q).unwrap();
            let e = r[0] - s;
            let tol = 1e-9 * (1.0 + s.abs());
            prop_assert!(e > -step / 2.0 - tol && e <= step / 2.0 + tol);
            let v = s + z;
            prop_assert!((e - (step * i[0] as f64 - v)).abs() <= tol);
        }
    }
}
