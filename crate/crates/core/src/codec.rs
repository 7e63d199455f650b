//! Multiple-description encoder and decoders.
//!
//! The encoder oversamples the source by `K`, runs the dithered noise-shaping
//! loop
//!
//! ```text
//! a'[k] = a[k] + sum_{i=1..p} c_i e[k-i]
//! â[k]  = Δ·round((a'[k] + z[k]) / Δ) - z[k]
//! e[k]  = â[k] - a'[k]
//! ```
//!
//! and deals the indices into `K` descriptions by `k mod K`. Any received
//! subset is interlaced, low-pass filtered to the band that subset can carry
//! without aliasing, phase-corrected and scaled.
//!
//! The reconstruction error `ε = â - a` equals `c * e`, so its spectrum is
//! `σ_E² |c(e^{jw})|²`. Phase `r` holds the source advanced by `r/K` samples.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::dsp::{
    fractional_delay, interlace, lowpass_downsample, phase_samples, upsample, InterpolatorSpec,
    RateTag, SignalBlock,
};
use crate::ecdq::{quantize_one, DitherStream, QuantizerSpec};
use crate::shaping::ShapingFilter;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oversampling {
    Two,
    Four,
}

impl Oversampling {
    pub fn factor(self) -> usize {
        match self {
            Oversampling::Two => 2,
            Oversampling::Four => 4,
        }
    }

    pub fn from_factor(k: usize) -> Result<Self> {
        match k {
            2 => Ok(Oversampling::Two),
            4 => Ok(Oversampling::Four),
            _ => Err(Error::InvalidParameter(format!("oversampling factor {k} is not 2 or 4"))),
        }
    }
}

/// Scaling applied after reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PostScaling {
    /// Linear-MMSE scalars from the noise power each subset sees.
    #[default]
    Wiener,
    /// No scaling; distortion equals the reconstruction noise power.
    Unity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub source_variance: f64,
    pub quantizer: QuantizerSpec,
    pub filter: ShapingFilter,
    pub oversampling: Oversampling,
    pub interpolator: InterpolatorSpec,
    pub dither_seed: u64,
    pub post_scaling: PostScaling,
}

impl CodecConfig {
    /// Configuration with exact (periodic) resampling, seed 0 and Wiener scaling.
    pub fn new(
        source_variance: f64,
        quantizer: QuantizerSpec,
        filter: ShapingFilter,
        oversampling: Oversampling,
    ) -> Result<Self> {
        if !(source_variance.is_finite() && source_variance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "source variance {source_variance} must be positive"
            )));
        }
        Ok(Self {
            source_variance,
            quantizer,
            filter,
            oversampling,
            interpolator: InterpolatorSpec::periodic(),
            dither_seed: 0,
            post_scaling: PostScaling::Wiener,
        })
    }

    pub fn with_interpolator(mut self, spec: InterpolatorSpec) -> Self {
        self.interpolator = spec;
        self
    }

    pub fn with_dither_seed(mut self, seed: u64) -> Self {
        self.dither_seed = seed;
        self
    }

    pub fn with_post_scaling(mut self, scaling: PostScaling) -> Self {
        self.post_scaling = scaling;
        self
    }

    pub fn factor(&self) -> usize {
        self.oversampling.factor()
    }

    /// Base-rate samples at each end excluded from statistics.
    pub fn steady_state_margin(&self) -> usize {
        self.filter.order().max(2 * self.interpolator.half_length)
    }

    /// Fraction of `σ_E²` reaching the all-description reconstruction.
    pub fn central_power(&self) -> f64 {
        self.filter.band_power(0.0, PI / self.factor() as f64)
    }

    /// Fraction of `σ_E²` reaching a two-of-four reconstruction: the low band
    /// plus the top band that aliases onto it.
    pub fn pair_power(&self) -> f64 {
        self.filter.band_power(0.0, PI / 4.0) + self.filter.band_power(0.75 * PI, PI)
    }

    pub fn side_power(&self) -> f64 {
        self.filter.pds()
    }

    fn scale_for(&self, power: f64) -> f64 {
        match self.post_scaling {
            PostScaling::Wiener => crate::theory::wiener_multiplier(
                self.source_variance,
                self.quantizer.noise_variance(),
                power,
            ),
            PostScaling::Unity => 1.0,
        }
    }

    pub fn multipliers(&self) -> Multipliers {
        match self.post_scaling {
            PostScaling::Wiener => compute_multipliers(
                self.source_variance,
                self.quantizer.noise_variance(),
                self.central_power(),
                self.side_power(),
            ),
            PostScaling::Unity => Multipliers {
                alpha: 1.0,
                beta: 1.0,
            },
        }
    }

    /// Scalar for the two-of-four reconstructions.
    pub fn pair_multiplier(&self) -> f64 {
        self.scale_for(self.pair_power())
    }
}

/// Post-multipliers for single descriptions (`alpha`) and all descriptions (`beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub alpha: f64,
    pub beta: f64,
}

pub fn compute_multipliers(sigma_x2: f64, sigma_e2: f64, pdc: f64, pds: f64) -> Multipliers {
    Multipliers {
        alpha: sigma_x2 / (sigma_x2 + sigma_e2 * pds),
        beta: sigma_x2 / (sigma_x2 + sigma_e2 * pdc),
    }
}

/// One description: the indices of oversampled phase `phase`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptionPacket {
    pub description_id: usize,
    pub indices: Vec<i64>,
    /// `None` when the encoder ran without dither.
    pub dither_seed: Option<u64>,
    pub phase: usize,
}

/// Dither used by the encoder.
#[derive(Debug, Clone, PartialEq)]
pub enum DitherSource {
    /// Per-phase streams from the configured seed.
    Seeded,
    Zero,
}

/// Every intermediate sequence of the loop, at the oversampled rate.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeTrace {
    pub a: SignalBlock,
    pub a_prime: SignalBlock,
    pub a_hat: SignalBlock,
    pub e: SignalBlock,
    pub eps: SignalBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutput {
    pub indices: Vec<i64>,
    pub a_prime: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub e: Vec<f64>,
    pub eps: Vec<f64>,
}

/// Runs the noise-shaping loop directly on oversampled samples `a` with
/// explicit dither `z`.
pub fn encode_oversampled(
    a: &[f64],
    z: &[f64],
    filter: &ShapingFilter,
    q: &QuantizerSpec,
) -> Result<LoopOutput> {
    if a.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: z.len(),
        });
    }
    let mut out = LoopOutput {
        indices: Vec::with_capacity(a.len()),
        a_prime: Vec::with_capacity(a.len()),
        a_hat: Vec::with_capacity(a.len()),
        e: Vec::with_capacity(a.len()),
        eps: Vec::with_capacity(a.len()),
    };
    shaping_loop(a, filter, q, |k| z[k], |k, idx, ap, ah, e| {
        out.indices.push(idx);
        out.a_prime.push(ap);
        out.a_hat.push(ah);
        out.e.push(e);
        out.eps.push(ah - a[k]);
    })?;
    Ok(out)
}

fn shaping_loop(
    a: &[f64],
    filter: &ShapingFilter,
    q: &QuantizerSpec,
    mut dither: impl FnMut(usize) -> f64,
    mut sink: impl FnMut(usize, i64, f64, f64, f64),
) -> Result<()> {
    let tail = filter.tail();
    let p = tail.len();
    // Circular history of past errors, newest at `head`.
    let mut history = vec![0.0; p.max(1)];
    let mut head = 0usize;
    for (k, &ak) in a.iter().enumerate() {
        let mut fb = 0.0;
        for (i, &ci) in tail.iter().enumerate() {
            fb += ci * history[(head + p - i) % p];
        }
        let ap = ak + fb;
        let (idx, ah) = quantize_one(ap, dither(k), q.step)?;
        let e = ah - ap;
        if p > 0 {
            head = (head + 1) % p;
            history[head] = e;
        }
        sink(k, idx, ap, ah, e);
    }
    Ok(())
}

fn check_source(x: &SignalBlock) -> Result<()> {
    if x.rate != RateTag::Base {
        return Err(Error::InvalidParameter("encoder input must be at the base rate".into()));
    }
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    Ok(())
}

fn dither_streams(cfg: &CodecConfig, source: &DitherSource) -> Vec<Option<DitherStream>> {
    (0..cfg.factor())
        .map(|r| match source {
            DitherSource::Seeded => Some(DitherStream::for_phase(cfg.dither_seed, r, &cfg.quantizer)),
            DitherSource::Zero => None,
        })
        .collect()
}

fn packets_from(indices: &[i64], cfg: &CodecConfig, source: &DitherSource) -> Vec<DescriptionPacket> {
    let k = cfg.factor();
    let seed = match source {
        DitherSource::Seeded => Some(cfg.dither_seed),
        DitherSource::Zero => None,
    };
    (0..k)
        .map(|r| DescriptionPacket {
            description_id: r,
            indices: indices.iter().skip(r).step_by(k).copied().collect(),
            dither_seed: seed,
            phase: r,
        })
        .collect()
}

/// Encodes `x` and returns the packets with the full loop trace.
pub fn encode(
    x: &SignalBlock,
    cfg: &CodecConfig,
    source: DitherSource,
) -> Result<(Vec<DescriptionPacket>, EncodeTrace)> {
    check_source(x)?;
    let k = cfg.factor();
    let a = upsample(x, k, &cfg.interpolator)?;
    let mut streams = dither_streams(cfg, &source);
    let n = a.len();
    let mut indices = Vec::with_capacity(n);
    let mut a_prime = Vec::with_capacity(n);
    let mut a_hat = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    shaping_loop(
        &a.samples,
        &cfg.filter,
        &cfg.quantizer,
        |i| streams[i % k].as_mut().map_or(0.0, |s| s.next_value()),
        |i, idx, ap, ah, ei| {
            indices.push(idx);
            a_prime.push(ap);
            a_hat.push(ah);
            e.push(ei);
            eps.push(ah - a.samples[i]);
        },
    )?;
    let margin = a.margin.max(k * cfg.steady_state_margin());
    let rate = a.rate;
    let block = |v: Vec<f64>| SignalBlock::new(v, rate, margin);
    let packets = packets_from(&indices, cfg, &source);
    let trace = EncodeTrace {
        a: a.clone().with_margin(margin),
        a_prime: block(a_prime),
        a_hat: block(a_hat),
        e: block(e),
        eps: block(eps),
    };
    Ok((packets, trace))
}

/// Encodes `x` without keeping the trace.
pub fn encode_packets(x: &SignalBlock, cfg: &CodecConfig, source: DitherSource) -> Result<Vec<DescriptionPacket>> {
    check_source(x)?;
    let k = cfg.factor();
    let a = upsample(x, k, &cfg.interpolator)?;
    let mut streams = dither_streams(cfg, &source);
    let mut indices = Vec::with_capacity(a.len());
    shaping_loop(
        &a.samples,
        &cfg.filter,
        &cfg.quantizer,
        |i| streams[i % k].as_mut().map_or(0.0, |s| s.next_value()),
        |_, idx, _, _, _| indices.push(idx),
    )?;
    Ok(packets_from(&indices, cfg, &source))
}

fn check_packet(p: &DescriptionPacket, cfg: &CodecConfig) -> Result<()> {
    let k = cfg.factor();
    if p.description_id >= k || p.phase != p.description_id {
        return Err(Error::UnknownDescription {
            id: p.description_id,
            descriptions: k,
        });
    }
    if p.indices.is_empty() {
        return Err(Error::EmptySignal);
    }
    Ok(())
}

/// Dequantized samples `Δ·index - z` of one description.
pub fn reconstruct(packet: &DescriptionPacket, cfg: &CodecConfig) -> Result<Vec<f64>> {
    check_packet(packet, cfg)?;
    let step = cfg.quantizer.step;
    let mut stream = packet
        .dither_seed
        .map(|seed| DitherStream::for_phase(seed, packet.phase, &cfg.quantizer));
    Ok(packet
        .indices
        .iter()
        .map(|&i| {
            let z = stream.as_mut().map_or(0.0, |s| s.next_value());
            step * i as f64 - z
        })
        .collect())
}

/// Validates a subset and returns it sorted by description id.
fn gather<'a>(packets: &'a [DescriptionPacket], cfg: &CodecConfig) -> Result<Vec<&'a DescriptionPacket>> {
    if packets.is_empty() {
        return Err(Error::MissingPacket(0));
    }
    for p in packets {
        check_packet(p, cfg)?;
    }
    let mut sorted: Vec<&DescriptionPacket> = packets.iter().collect();
    sorted.sort_by_key(|p| p.description_id);
    for w in sorted.windows(2) {
        if w[0].description_id == w[1].description_id {
            return Err(Error::InconsistentPackets(format!(
                "description {} received twice",
                w[0].description_id
            )));
        }
    }
    let first = sorted[0];
    for p in &sorted[1..] {
        if p.indices.len() != first.indices.len() {
            return Err(Error::InconsistentPackets("descriptions differ in length".into()));
        }
        if p.dither_seed != first.dither_seed {
            return Err(Error::InconsistentPackets("descriptions differ in dither seed".into()));
        }
    }
    Ok(sorted)
}

fn scaled(mut y: SignalBlock, factor: f64, margin: usize) -> SignalBlock {
    if factor != 1.0 {
        y.samples.iter_mut().for_each(|v| *v *= factor);
    }
    y.rate = RateTag::Base;
    y.with_margin(margin)
}

/// All `K` descriptions: interlace, low-pass to `pi/K`, downsample, scale by beta.
pub fn decode_central(packets: &[DescriptionPacket], cfg: &CodecConfig) -> Result<SignalBlock> {
    let sorted = gather(packets, cfg)?;
    let k = cfg.factor();
    if sorted.len() != k {
        let have: BTreeSet<usize> = sorted.iter().map(|p| p.description_id).collect();
        let missing = (0..k).find(|r| !have.contains(r)).unwrap_or(0);
        return Err(Error::MissingPacket(missing));
    }
    let phases = sorted
        .iter()
        .map(|p| reconstruct(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[f64]> = phases.iter().map(|v| v.as_slice()).collect();
    let a_hat = SignalBlock::new(interlace(&refs), RateTag::Oversampled(k), 0);
    let y = lowpass_downsample(&a_hat, k, &cfg.interpolator)?;
    Ok(scaled(y, cfg.multipliers().beta, cfg.steady_state_margin()))
}

/// One description: dequantize, undo the `phase/K` advance, scale by alpha.
pub fn decode_side(packet: &DescriptionPacket, cfg: &CodecConfig) -> Result<SignalBlock> {
    let y = SignalBlock::base(reconstruct(packet, cfg)?);
    let delay = packet.phase as f64 / cfg.factor() as f64;
    let y = fractional_delay(&y, &cfg.interpolator, delay)?;
    Ok(scaled(y, cfg.multipliers().alpha, cfg.steady_state_margin()))
}

/// Descriptions `{0, 2}` or `{1, 3}` of a four-description code.
pub fn decode_subset_k4(packets: &[DescriptionPacket], cfg: &CodecConfig) -> Result<SignalBlock> {
    if cfg.oversampling != Oversampling::Four {
        return Err(Error::InvalidParameter("two-of-four decoding needs K = 4".into()));
    }
    let sorted = gather(packets, cfg)?;
    let ids: Vec<usize> = sorted.iter().map(|p| p.description_id).collect();
    if ids != [0, 2] && ids != [1, 3] {
        return Err(Error::NonUniformSubset(ids));
    }
    let even = reconstruct(sorted[0], cfg)?;
    let odd = reconstruct(sorted[1], cfg)?;
    // Interlaced, the pair samples the source at twice the base rate.
    let b = SignalBlock::new(interlace(&[&even, &odd]), RateTag::Oversampled(2), 0);
    let y = lowpass_downsample(&b, 2, &cfg.interpolator)?;
    let y = fractional_delay(&y, &cfg.interpolator, ids[0] as f64 / 4.0)?;
    Ok(scaled(y, cfg.pair_multiplier(), cfg.steady_state_margin()))
}

/// Decodes whatever subset was received.
pub fn decode(packets: &[DescriptionPacket], cfg: &CodecConfig) -> Result<SignalBlock> {
    let sorted = gather(packets, cfg)?;
    match sorted.len() {
        1 => decode_side(sorted[0], cfg),
        n if n == cfg.factor() => decode_central(packets, cfg),
        _ => decode_subset_k4(packets, cfg),
    }
}

/// Oversampled phase `r` of `a`, for tests that inspect single descriptions.
pub fn phase_of(a: &SignalBlock, k: usize, r: usize) -> Vec<f64> {
    phase_samples(&a.samples, k, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shaping::design_yule_walker;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn mse(a: &SignalBlock, x: &[f64]) -> f64 {
        let m = a.margin;
        let n = x.len() - 2 * m;
        (m..x.len() - m).map(|i| (a.samples[i] - x[i]).powi(2)).sum::<f64>() / n as f64
    }

    fn config(k: Oversampling, step: f64, filter: ShapingFilter) -> CodecConfig {
        CodecConfig::new(1.0, QuantizerSpec::new(step).unwrap(), filter, k)
            .unwrap()
            .with_dither_seed(5)
    }

    #[test]
    fn multiplier_examples() {
        let m = compute_multipliers(1.0, 0.01, 0.125, 2.125);
        assert!((m.alpha - 0.97919).abs() < 1e-5);
        assert!((m.beta - 0.99875).abs() < 1e-5);
        let m = compute_multipliers(1.0, 0.0, 0.125, 2.125);
        assert_eq!((m.alpha, m.beta), (1.0, 1.0));
        let m = compute_multipliers(1.0, 1.0, 0.5, 1.0);
        assert_eq!(m.alpha, 0.5);
        assert!((m.beta - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hand_simulated_loop() {
        let c = ShapingFilter::from_tail(&[-0.5]).unwrap();
        let q = QuantizerSpec::new(1.0).unwrap();
        let out = encode_oversampled(&[0.4, 0.4], &[0.1, -0.2], &c, &q).unwrap();
        assert_eq!(out.indices, vec![1, 0]);
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&out.a_hat, &[0.9, 0.2]));
        assert!(close(&out.e, &[0.5, 0.05]));
        assert!(close(&out.eps, &[0.5, -0.2]));
    }

    #[test]
    fn zero_input_zero_dither() {
        let cfg = config(Oversampling::Two, 0.3, design_yule_walker(4, 0.1).unwrap());
        let x = SignalBlock::base(vec![0.0; 256]);
        let (packets, _) = encode(&x, &cfg, DitherSource::Zero).unwrap();
        assert!(packets.iter().all(|p| p.indices.iter().all(|&i| i == 0)));
        let y = decode_central(&packets, &cfg).unwrap();
        assert!(y.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn error_is_filtered_loop_error() {
        let c = design_yule_walker(8, 0.05).unwrap();
        let cfg = config(Oversampling::Two, 0.2, c.clone());
        let x = SignalBlock::base(gaussian(2048, 1));
        let (_, t) = encode(&x, &cfg, DitherSource::Seeded).unwrap();
        let taps = c.coeffs();
        for k in 0..t.e.len() {
            let conv: f64 = taps
                .iter()
                .enumerate()
                .filter(|(i, _)| *i <= k)
                .map(|(i, ci)| ci * t.e.samples[k - i])
                .sum();
            assert!((t.eps.samples[k] - conv).abs() < 1e-12);
            assert!((t.a_hat.samples[k] - t.a.samples[k] - t.eps.samples[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_reconstruction_k2() {
        // Odd length: the odd branch keeps every frequency bin.
        let n = 4097;
        let x = gaussian(n, 2);
        let cfg = config(Oversampling::Two, 1e-6, design_yule_walker(8, 0.05).unwrap());
        let (packets, _) = encode(&SignalBlock::base(x.clone()), &cfg, DitherSource::Seeded).unwrap();
        assert!(mse(&decode_central(&packets, &cfg).unwrap(), &x) <= 1e-10);
        for p in &packets {
            assert!(mse(&decode_side(p, &cfg).unwrap(), &x) <= 1e-6, "phase {}", p.phase);
        }
    }

    #[test]
    fn noiseless_reconstruction_k4() {
        let n = 2049;
        let x = gaussian(n, 3);
        let cfg = config(Oversampling::Four, 1e-6, design_yule_walker(4, 0.1).unwrap());
        let (packets, _) = encode(&SignalBlock::base(x.clone()), &cfg, DitherSource::Seeded).unwrap();
        assert!(mse(&decode(&packets, &cfg).unwrap(), &x) <= 1e-10);
        for p in &packets {
            assert!(mse(&decode(std::slice::from_ref(p), &cfg).unwrap(), &x) <= 1e-6, "phase {}", p.phase);
        }
        for pair in [[0, 2], [1, 3]] {
            let sub = [packets[pair[0]].clone(), packets[pair[1]].clone()];
            assert!(mse(&decode_subset_k4(&sub, &cfg).unwrap(), &x) <= 1e-6);
        }
        let bad = [packets[0].clone(), packets[1].clone()];
        assert_eq!(decode(&bad, &cfg), Err(Error::NonUniformSubset(vec![0, 1])));
    }

    #[test]
    fn fir_realization_reconstructs_bandlimited_input() {
        let n = 4096;
        let x: Vec<f64> = (0..n).map(|k| (0.4 * k as f64).sin() + 0.3 * (2.2 * k as f64).cos()).collect();
        let cfg = config(Oversampling::Two, 1e-6, design_yule_walker(4, 0.1).unwrap())
            .with_interpolator(InterpolatorSpec::default());
        let (packets, _) = encode(&SignalBlock::base(x.clone()), &cfg, DitherSource::Seeded).unwrap();
        assert!(mse(&decode_central(&packets, &cfg).unwrap(), &x) <= 1e-6);
        for p in &packets {
            assert!(mse(&decode_side(p, &cfg).unwrap(), &x) <= 1e-6);
        }
    }

    #[test]
    fn packet_validation() {
        let cfg = config(Oversampling::Two, 0.1, ShapingFilter::white());
        let x = SignalBlock::base(gaussian(64, 4));
        let packets = encode_packets(&x, &cfg, DitherSource::Seeded).unwrap();
        assert_eq!(packets.len(), 2);
        assert!(packets.iter().all(|p| p.indices.len() == 64 && p.dither_seed == Some(5)));
        assert_eq!(decode_central(&packets[..1], &cfg), Err(Error::MissingPacket(1)));
        let mut alien = packets[1].clone();
        alien.description_id = 2;
        alien.phase = 2;
        assert!(matches!(decode_side(&alien, &cfg), Err(Error::UnknownDescription { .. })));
        let mut reseeded = packets[1].clone();
        reseeded.dither_seed = Some(6);
        assert!(matches!(
            decode_central(&[packets[0].clone(), reseeded], &cfg),
            Err(Error::InconsistentPackets(_))
        ));
        assert!(decode_subset_k4(&packets, &cfg).is_err());
    }

    #[test]
    fn traced_and_light_encoders_agree() {
        let cfg = config(Oversampling::Four, 0.05, design_yule_walker(6, 0.2).unwrap());
        let x = SignalBlock::base(gaussian(300, 7));
        let (a, _) = encode(&x, &cfg, DitherSource::Seeded).unwrap();
        assert_eq!(a, encode_packets(&x, &cfg, DitherSource::Seeded).unwrap());
    }

    #[test]
    fn scale_equivariance() {
        let c = design_yule_walker(8, 0.1).unwrap();
        let x = gaussian(8192, 8);
        let s = 3.0;
        let base = config(Oversampling::Two, 0.3, c.clone());
        let big = CodecConfig::new(9.0, QuantizerSpec::new(0.3 * s).unwrap(), c, Oversampling::Two)
            .unwrap()
            .with_dither_seed(5);
        let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
        let (p1, _) = encode(&SignalBlock::base(x.clone()), &base, DitherSource::Seeded).unwrap();
        let (p2, _) = encode(&SignalBlock::base(xs.clone()), &big, DitherSource::Seeded).unwrap();
        let agree = p1
            .iter()
            .zip(&p2)
            .flat_map(|(a, b)| a.indices.iter().zip(&b.indices))
            .filter(|(a, b)| a == b)
            .count();
        // Rounding of the scaled products can flip an index at a cell boundary.
        assert!(agree as f64 >= 0.9999 * 2.0 * x.len() as f64);
        let m1 = mse(&decode_central(&p1, &base).unwrap(), &x);
        let m2 = mse(&decode_central(&p2, &big).unwrap(), &xs);
        assert!((m2 / (s * s * m1) - 1.0).abs() <= 1e-6, "{m1} {m2}");
    }
}
