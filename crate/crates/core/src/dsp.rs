//! Sinc resampling, fractional delays and spectrum evaluation on finite blocks.
//!
//! Oversampling follows the sample-preserving convention
//! `a[k] = sum_n x[n] sinc(k/K - n)`, so every `K`-th oversampled sample is a
//! source sample and phase `r` carries the source advanced by `r/K` samples.
//!
//! Two realizations of the ideal filters are provided:
//!
//! * [`Realization::Fir`]: Kaiser-windowed sinc FIRs with linear (zero-padded)
//!   convolution. Edge samples are tracked through [`SignalBlock::margin`].
//! * [`Realization::Periodic`]: exact band-limited processing of the block's
//!   periodic extension in the DFT domain. A finite FIR cannot pass a white
//!   source right up to Nyquist, and the codec needs that to be exact.
//!
//! With an even block length the Nyquist bin is split symmetrically, so it
//! vanishes at half-sample positions; odd-phase branches lose that single bin.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{Error, Result};

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// `sinc(m/2)` for integer `m`, with exact zeros at the even lags.
pub fn sinc_half(m: i64) -> f64 {
    if m == 0 {
        1.0
    } else if m % 2 == 0 {
        0.0
    } else {
        let sign = if m.rem_euclid(4) == 1 { 1.0 } else { -1.0 };
        sign * 2.0 / (PI * m as f64)
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Kaiser window evaluated at offset `t` for a window of half-width `half_width`.
pub fn kaiser(t: f64, half_width: f64, beta: f64) -> f64 {
    let u = t / half_width;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    bessel_i0(beta * (1.0 - u * u).sqrt()) / bessel_i0(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateTag {
    Base,
    Oversampled(usize),
}

/// A finite block of samples at a known rate.
///
/// `margin` counts the samples at each end that are not steady-state and must
/// be excluded from statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBlock {
    pub samples: Vec<f64>,
    pub rate: RateTag,
    pub margin: usize,
}

impl SignalBlock {
    pub fn base(samples: Vec<f64>) -> Self {
        Self {
            samples,
            rate: RateTag::Base,
            margin: 0,
        }
    }

    pub fn new(samples: Vec<f64>, rate: RateTag, margin: usize) -> Self {
        Self {
            samples,
            rate,
            margin,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples with `margin` removed from both ends (empty if nothing remains).
    pub fn interior(&self) -> &[f64] {
        let n = self.samples.len();
        if 2 * self.margin >= n {
            &[]
        } else {
            &self.samples[self.margin..n - self.margin]
        }
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = self.margin.max(margin);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Kaiser { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realization {
    Fir,
    Periodic,
}

/// Parameters of the interpolation, decimation and fractional-delay filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolatorSpec {
    /// Taps per side of every FIR, in base-rate samples.
    pub half_length: usize,
    pub window: Window,
    pub realization: Realization,
}

impl Default for InterpolatorSpec {
    fn default() -> Self {
        Self {
            half_length: 128,
            window: Window::Kaiser { beta: 10.0 },
            realization: Realization::Fir,
        }
    }
}

impl InterpolatorSpec {
    pub fn fir(half_length: usize, beta: f64) -> Result<Self> {
        if half_length == 0 {
            return Err(Error::InvalidParameter("half_length must be positive".into()));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("kaiser beta {beta} must be >= 0")));
        }
        Ok(Self {
            half_length,
            window: Window::Kaiser { beta },
            realization: Realization::Fir,
        })
    }

    /// Exact DFT-domain filtering; `half_length` is kept for margin bookkeeping.
    pub fn periodic() -> Self {
        Self {
            realization: Realization::Periodic,
            ..Self::default()
        }
    }

    fn beta(&self) -> f64 {
        match self.window {
            Window::Kaiser { beta } => beta,
        }
    }

    fn window_at(&self, t: f64) -> f64 {
        kaiser(t, self.half_length as f64 + 1.0, self.beta())
    }

    /// Taps `h[j]`, `j = -H..=H`, of the windowed sinc that evaluates a base-rate
    /// signal at offset `shift` (output `m` reads `y(m + shift)`), normalized to
    /// unit DC gain.
    pub fn shift_taps(&self, shift: f64) -> Vec<f64> {
        let h = self.half_length as i64;
        let mut taps: Vec<f64> = (-h..=h)
            .map(|j| {
                let t = j as f64 - shift;
                sinc(t) * self.window_at(t)
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        if shift != 0.0 {
            taps.iter_mut().for_each(|t| *t /= sum);
        }
        taps
    }

    /// Taps of the half-band prototype `0.5 sinc(n/2) w(n/2)`, `n = -2H..=2H`,
    /// at the oversampled rate (before polyphase normalization).
    pub fn halfband_taps(&self) -> Vec<f64> {
        let h = 2 * self.half_length as i64;
        (-h..=h)
            .map(|n| 0.5 * sinc_half(n) * self.window_at(n as f64 / 2.0))
            .collect()
    }

    /// Realized stopband attenuation (dB) of the half-band prototype on a
    /// 4096-point grid over `[0, pi]`. The stopband starts half a Kaiser
    /// transition width above `pi/2`.
    pub fn stopband_attenuation_db(&self) -> f64 {
        let taps = self.halfband_taps();
        let order = (taps.len() - 1) as f64;
        let beta = self.beta();
        // Kaiser's design relations between beta, attenuation and transition width.
        let atten = if beta > 4.5513 { beta / 0.1102 + 8.7 } else { 50.0 };
        let transition = (atten - 7.95) / (2.285 * order);
        let edge = PI / 2.0 + transition / 2.0;
        let center = (taps.len() / 2) as f64;
        let dc: f64 = taps.iter().sum();
        let grid = 4096;
        let mut worst: f64 = 0.0;
        for i in 0..grid {
            let w = PI * (i as f64 + 0.5) / grid as f64;
            if w < edge {
                continue;
            }
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &t) in taps.iter().enumerate() {
                let arg = w * (n as f64 - center);
                re += t * arg.cos();
                im -= t * arg.sin();
            }
            worst = worst.max((re * re + im * im).sqrt() / dc);
        }
        -20.0 * worst.log10()
    }

    /// Largest deviation of the delay filter's magnitude response from 1 over
    /// `|w| <= band` (4096-point grid).
    pub fn delay_magnitude_deviation(&self, delay: f64, band: f64) -> f64 {
        let taps = self.shift_taps(-delay);
        let h = self.half_length as f64;
        let grid = 4096;
        let mut worst: f64 = 0.0;
        for i in 0..=grid {
            let w = band * i as f64 / grid as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (j, &t) in taps.iter().enumerate() {
                let arg = w * (j as f64 - h);
                re += t * arg.cos();
                im += t * arg.sin();
            }
            worst = worst.max(((re * re + im * im).sqrt() - 1.0).abs());
        }
        worst
    }
}

fn fft_forward(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

fn fft_inverse(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}

fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Signed frequency index of DFT bin `k` for a length-`n` transform.
fn signed_bin(k: usize, n: usize) -> i64 {
    if 2 * k > n {
        k as i64 - n as i64
    } else {
        k as i64
    }
}

fn check_signal(x: &SignalBlock) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    if x.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("signal"));
    }
    Ok(())
}

fn rate_after_upsample(rate: RateTag, factor: usize) -> RateTag {
    match rate {
        RateTag::Base => RateTag::Oversampled(factor),
        RateTag::Oversampled(k) => RateTag::Oversampled(k * factor),
    }
}

fn rate_after_downsample(rate: RateTag, factor: usize) -> RateTag {
    match rate {
        RateTag::Oversampled(k) if k == factor => RateTag::Base,
        RateTag::Oversampled(k) if k > factor && k % factor == 0 => {
            RateTag::Oversampled(k / factor)
        }
        // Sub-streams of an oversampled signal are tagged by the caller.
        other => other,
    }
}

/// Band-limited upsampling by `factor`: `a[K m + r] = y(m + r/K)`.
pub fn upsample(x: &SignalBlock, factor: usize, spec: &InterpolatorSpec) -> Result<SignalBlock> {
    check_signal(x)?;
    if factor == 0 {
        return Err(Error::InvalidParameter("upsampling factor must be positive".into()));
    }
    let n = x.len();
    let samples = match spec.realization {
        Realization::Fir => {
            let mut out = vec![0.0; n * factor];
            let h = spec.half_length as i64;
            for r in 0..factor {
                if r == 0 {
                    for m in 0..n {
                        out[m * factor] = x.samples[m];
                    }
                    continue;
                }
                let taps = spec.shift_taps(r as f64 / factor as f64);
                for m in 0..n {
                    let mut acc = 0.0;
                    for (idx, &t) in taps.iter().enumerate() {
                        let src = m as i64 + idx as i64 - h;
                        if src >= 0 && (src as usize) < n {
                            acc += t * x.samples[src as usize];
                        }
                    }
                    out[m * factor + r] = acc;
                }
            }
            out
        }
        Realization::Periodic => {
            let mut spectrum = to_complex(&x.samples);
            fft_forward(&mut spectrum);
            let big = n * factor;
            let mut wide = vec![Complex64::new(0.0, 0.0); big];
            for (k, &v) in spectrum.iter().enumerate() {
                let f = signed_bin(k, n);
                if n.is_multiple_of(2) && 2 * k == n {
                    // Split the Nyquist bin symmetrically so the result stays real.
                    let half = v * 0.5;
                    wide[k] += half;
                    wide[big - k] += half;
                } else if f >= 0 {
                    wide[f as usize] = v;
                } else {
                    wide[(big as i64 + f) as usize] = v;
                }
            }
            fft_inverse(&mut wide);
            let scale = 1.0 / n as f64;
            wide.iter().map(|c| c.re * scale).collect()
        }
    };
    let margin = match spec.realization {
        Realization::Fir => factor * (x.margin + spec.half_length),
        Realization::Periodic => factor * x.margin,
    };
    Ok(SignalBlock::new(
        samples,
        rate_after_upsample(x.rate, factor),
        margin,
    ))
}

pub fn upsample2(x: &SignalBlock, spec: &InterpolatorSpec) -> Result<SignalBlock> {
    upsample(x, 2, spec)
}

/// Ideal low-pass to `pi/K` followed by keeping every `K`-th sample.
pub fn lowpass_downsample(
    a: &SignalBlock,
    factor: usize,
    spec: &InterpolatorSpec,
) -> Result<SignalBlock> {
    check_signal(a)?;
    if factor == 0 {
        return Err(Error::InvalidParameter("downsampling factor must be positive".into()));
    }
    if !a.len().is_multiple_of(factor) {
        return Err(Error::LengthNotMultiple {
            len: a.len(),
            factor,
        });
    }
    let n = a.len() / factor;
    let samples = match spec.realization {
        Realization::Fir => {
            let h = spec.half_length as i64;
            let k = factor as i64;
            let span = k * h;
            let kf = factor as f64;
            // Polyphase branch q collects taps with lag n = q (mod K); each branch
            // is normalized to 1/K so that DC passes exactly.
            let mut taps: Vec<f64> = (-span..=span)
                .map(|lag| {
                    let t = lag as f64 / kf;
                    sinc(t) * spec.window_at(t) / kf
                })
                .collect();
            for q in 1..factor as i64 {
                let idx: Vec<usize> = (-span..=span)
                    .enumerate()
                    .filter(|(_, lag)| lag.rem_euclid(k) == q)
                    .map(|(i, _)| i)
                    .collect();
                let s: f64 = idx.iter().map(|&i| taps[i]).sum();
                for i in idx {
                    taps[i] /= s * kf;
                }
            }
            let len = a.len() as i64;
            (0..n)
                .map(|m| {
                    let center = m as i64 * k;
                    let mut acc = 0.0;
                    for (i, &t) in taps.iter().enumerate() {
                        let src = center - (i as i64 - span);
                        if src >= 0 && src < len {
                            acc += t * a.samples[src as usize];
                        }
                    }
                    acc
                })
                .collect()
        }
        Realization::Periodic => {
            let big = a.len();
            let mut spectrum = to_complex(&a.samples);
            fft_forward(&mut spectrum);
            let mut narrow = vec![Complex64::new(0.0, 0.0); n];
            for (k, &v) in spectrum.iter().enumerate() {
                let f = signed_bin(k, big);
                if f.abs() > n as i64 / 2 {
                    continue;
                }
                // Both +-n/2 edge bins (even n) fold onto the same output bin.
                let slot = f.rem_euclid(n as i64) as usize;
                narrow[slot] += v;
            }
            fft_inverse(&mut narrow);
            let scale = 1.0 / big as f64;
            narrow.iter().map(|c| c.re * scale).collect()
        }
    };
    let margin = match spec.realization {
        Realization::Fir => a.margin.div_ceil(factor) + spec.half_length,
        Realization::Periodic => a.margin.div_ceil(factor),
    };
    Ok(SignalBlock::new(
        samples,
        rate_after_downsample(a.rate, factor),
        margin,
    ))
}

pub fn lowpass_downsample2(a: &SignalBlock, spec: &InterpolatorSpec) -> Result<SignalBlock> {
    lowpass_downsample(a, 2, spec)
}

/// Fractional delay: output `m` approximates `y(m - delay)`, an all-pass
/// `e^{-j w delay}` response.
pub fn fractional_delay(y: &SignalBlock, spec: &InterpolatorSpec, delay: f64) -> Result<SignalBlock> {
    check_signal(y)?;
    if !delay.is_finite() || delay.abs() >= 1.0 {
        return Err(Error::DelayOutOfRange(delay));
    }
    if delay == 0.0 {
        return Ok(y.clone());
    }
    let n = y.len();
    let samples = match spec.realization {
        Realization::Fir => {
            let taps = spec.shift_taps(-delay);
            let h = spec.half_length as i64;
            (0..n)
                .map(|m| {
                    let mut acc = 0.0;
                    for (idx, &t) in taps.iter().enumerate() {
                        let src = m as i64 + idx as i64 - h;
                        if src >= 0 && (src as usize) < n {
                            acc += t * y.samples[src as usize];
                        }
                    }
                    acc
                })
                .collect()
        }
        Realization::Periodic => {
            let mut spectrum = to_complex(&y.samples);
            fft_forward(&mut spectrum);
            for (k, v) in spectrum.iter_mut().enumerate() {
                if n.is_multiple_of(2) && 2 * k == n {
                    *v *= (PI * delay).cos();
                } else {
                    let w = 2.0 * PI * signed_bin(k, n) as f64 / n as f64;
                    *v *= Complex64::from_polar(1.0, -w * delay);
                }
            }
            fft_inverse(&mut spectrum);
            let scale = 1.0 / n as f64;
            spectrum.iter().map(|c| c.re * scale).collect()
        }
    };
    let margin = match spec.realization {
        Realization::Fir => y.margin + spec.half_length,
        Realization::Periodic => y.margin,
    };
    Ok(SignalBlock::new(samples, y.rate, margin))
}

/// Phase correction for a branch that carries the source advanced by `delay`.
pub fn halfsample_allpass(y: &SignalBlock, spec: &InterpolatorSpec, delay: f64) -> Result<SignalBlock> {
    fractional_delay(y, spec, delay)
}

/// `|sum_i c_i e^{-j w i}|^2`.
pub fn spectrum_power(coeffs: &[f64], omega: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &c) in coeffs.iter().enumerate() {
        let arg = omega * i as f64;
        re += c * arg.cos();
        im -= c * arg.sin();
    }
    re * re + im * im
}

/// `|C(e^{jw})|^2` on the `n`-point DFT grid `w_k = 2 pi k / n` via a
/// zero-padded FFT of the coefficients.
pub fn power_spectrum_grid(coeffs: &[f64], n: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n.max(coeffs.len())];
    for (b, &c) in buf.iter_mut().zip(coeffs) {
        b.re = c;
    }
    fft_forward(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

/// Interleave `K` equally long phase streams into one stream.
pub fn interlace(streams: &[&[f64]]) -> Vec<f64> {
    let k = streams.len();
    let n = streams.first().map_or(0, |s| s.len());
    let mut out = vec![0.0; n * k];
    for (r, s) in streams.iter().enumerate() {
        for (m, &v) in s.iter().enumerate() {
            out[m * k + r] = v;
        }
    }
    out
}

/// Every `factor`-th sample starting at `phase`.
pub fn phase_samples(x: &[f64], factor: usize, phase: usize) -> Vec<f64> {
    x.iter().skip(phase).step_by(factor).copied().collect()
}
