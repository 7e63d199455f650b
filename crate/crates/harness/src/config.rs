//! Experiment configuration.
//!
//! The file format is flat UTF-8 `key = value` text. `#` starts a comment,
//! blank lines are ignored and every key may appear once. Command-line flags
//! are applied on top of the file through the same parser.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use mdsq_core::codec::{CodecConfig, Oversampling, PostScaling};
use mdsq_core::dsp::InterpolatorSpec;
use mdsq_core::ecdq::QuantizerSpec;
use mdsq_core::shaping::{
    design_multiband, design_yule_walker, find_lambda_for_ratio, BrickWallSpec, ShapingFilter,
};
use mdsq_core::theory::K4Spec;

use crate::source::SourceDist;
use crate::{HarnessError, Result};

pub const MIN_SAMPLES: usize = 1 << 14;

/// Where a raw value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => write!(f, "command line"),
        }
    }
}

const KEYS: &[&str] = &[
    "sigma_x2",
    "quant_step",
    "sigma_e2",
    "filter",
    "p",
    "lambda",
    "gamma",
    "delta",
    "coefficients",
    "band_edges",
    "band_weights",
    "delta0",
    "delta1",
    "oversampling",
    "n_samples",
    "n_trials",
    "seed",
    "source",
    "patterns",
    "post_scaling",
    "interpolator",
    "fir_half_length",
    "fir_beta",
    "tolerance",
];

/// Raw `key = value` pairs with their origin.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Config {
                origin: Origin::Line(line_no),
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if raw.entries.contains_key(key) {
                return Err(HarnessError::Config {
                    origin: Origin::Line(line_no),
                    message: format!("duplicate key `{key}`"),
                });
            }
            raw.insert(key, value.trim(), Origin::Line(line_no))?;
        }
        Ok(raw)
    }

    /// Sets `key`, replacing any earlier value.
    pub fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(HarnessError::Config {
                origin,
                message: format!("unknown key `{key}`"),
            });
        }
        self.entries.insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn get(&self, key: &str) -> Option<&(String, Origin)> {
        self.entries.get(key)
    }

    fn bad(&self, key: &str, message: String) -> HarnessError {
        let origin = self.get(key).map_or(Origin::Flag, |(_, o)| o.clone());
        HarnessError::Config {
            origin,
            message: format!("`{key}`: {message}"),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, _)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.bad(key, format!("cannot parse `{v}`"))),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        let v = self.parsed::<f64>(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(self.bad(key, "must be finite".into())),
            _ => Ok(v),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        let v = self.real(key)?;
        match v {
            Some(x) if x <= 0.0 => Err(self.bad(key, format!("{x} must be positive"))),
            _ => Ok(v),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, _)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| self.bad(key, format!("cannot parse list `{v}`"))),
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.get(key).map(|(v, _)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantizerSource {
    Step(f64),
    NoiseVariance(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterSource {
    /// Order `p` with the given stop-band to pass-band weight ratio.
    YuleWalker { p: usize, lambda: f64 },
    /// Order `p` with `P_ds / P_dc` matched to `gamma`.
    YuleWalkerGamma { p: usize, gamma: f64 },
    Coefficients(Vec<f64>),
    /// Upper band edges in radians, last one `pi`.
    Multiband { p: usize, edges: Vec<f64>, weights: Vec<f64> },
}

/// Erasure pattern: which descriptions reach the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    Central,
    Even,
    Odd,
    Pair02,
    Pair13,
    Single(usize),
}

impl Pattern {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "central" => Pattern::Central,
            "even" => Pattern::Even,
            "odd" => Pattern::Odd,
            "pair02" => Pattern::Pair02,
            "pair13" => Pattern::Pair13,
            "single0" => Pattern::Single(0),
            "single1" => Pattern::Single(1),
            "single2" => Pattern::Single(2),
            "single3" => Pattern::Single(3),
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Pattern::Central => "central".into(),
            Pattern::Even => "even".into(),
            Pattern::Odd => "odd".into(),
            Pattern::Pair02 => "pair02".into(),
            Pattern::Pair13 => "pair13".into(),
            Pattern::Single(r) => format!("single{r}"),
        }
    }

    /// Description ids received under this pattern.
    pub fn descriptions(&self, k: usize) -> Vec<usize> {
        match self {
            Pattern::Central => (0..k).collect(),
            Pattern::Even => vec![0],
            Pattern::Odd => vec![1],
            Pattern::Pair02 => vec![0, 2],
            Pattern::Pair13 => vec![1, 3],
            Pattern::Single(r) => vec![*r],
        }
    }

    pub fn valid_for(&self, k: usize) -> bool {
        match self {
            Pattern::Central => true,
            Pattern::Even | Pattern::Odd => k == 2,
            Pattern::Pair02 | Pattern::Pair13 => k == 4,
            Pattern::Single(r) => k == 4 && *r < 4,
        }
    }

    pub fn all_for(k: usize) -> Vec<Self> {
        if k == 2 {
            vec![Pattern::Central, Pattern::Even, Pattern::Odd]
        } else {
            let mut v = vec![Pattern::Central, Pattern::Pair02, Pattern::Pair13];
            v.extend((0..4).map(Pattern::Single));
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sigma_x2: f64,
    pub quantizer: QuantizerSource,
    pub filter: FilterSource,
    /// Target brick-wall level when the filter was specified through `delta`.
    pub delta: Option<f64>,
    /// Three-level target for four descriptions.
    pub k4: Option<(f64, f64)>,
    pub oversampling: Oversampling,
    pub n_samples: usize,
    pub n_trials: usize,
    pub master_seed: u64,
    pub source: SourceDist,
    pub patterns: Vec<Pattern>,
    pub post_scaling: PostScaling,
    pub interpolator: InterpolatorSpec,
    /// Relative tolerance of the pass flags.
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let sigma_x2 = raw.positive("sigma_x2")?.unwrap_or(1.0);
        let quantizer = match (raw.positive("quant_step")?, raw.positive("sigma_e2")?) {
            (Some(_), Some(_)) => {
                return Err(raw.bad("sigma_e2", "give either quant_step or sigma_e2, not both".into()))
            }
            (Some(step), None) => QuantizerSource::Step(step),
            (None, Some(v)) => QuantizerSource::NoiseVariance(v),
            (None, None) => QuantizerSource::NoiseVariance(0.01),
        };
        let k = raw.parsed::<usize>("oversampling")?.unwrap_or(2);
        let oversampling =
            Oversampling::from_factor(k).map_err(|e| raw.bad("oversampling", e.to_string()))?;

        let delta = raw.positive("delta")?;
        let k4 = match (raw.positive("delta0")?, raw.positive("delta1")?) {
            (Some(d0), Some(d1)) => {
                if k != 4 {
                    return Err(raw.bad("delta0", "three-level targets need oversampling = 4".into()));
                }
                K4Spec::new(d0, d1, 1.0, 1.0).map_err(|e| raw.bad("delta0", e.to_string()))?;
                Some((d0, d1))
            }
            (None, None) => None,
            _ => return Err(raw.bad("delta0", "delta0 and delta1 go together".into())),
        };
        let filter = Self::filter_source(raw, delta, k4)?;

        let n_samples = raw.parsed::<usize>("n_samples")?.unwrap_or(1 << 20);
        if n_samples < MIN_SAMPLES {
            return Err(raw.bad("n_samples", format!("{n_samples} is below {MIN_SAMPLES}")));
        }
        let n_trials = raw.parsed::<usize>("n_trials")?.unwrap_or(4);
        if n_trials == 0 {
            return Err(raw.bad("n_trials", "need at least one trial".into()));
        }
        let master_seed = raw.parsed::<u64>("seed")?.unwrap_or(0);
        let source = match raw.text("source") {
            None => SourceDist::Gaussian,
            Some(s) => SourceDist::parse(s).ok_or_else(|| raw.bad("source", format!("unknown source `{s}`")))?,
        };
        let patterns = match raw.text("patterns") {
            None => Pattern::all_for(k),
            Some(s) => {
                let mut v = Vec::new();
                for name in s.split(',').map(str::trim) {
                    let p = Pattern::parse(name)
                        .filter(|p| p.valid_for(k))
                        .ok_or_else(|| raw.bad("patterns", format!("`{name}` is not a pattern for K = {k}")))?;
                    v.push(p);
                }
                v
            }
        };
        let post_scaling = match raw.text("post_scaling") {
            None | Some("wiener") => PostScaling::Wiener,
            Some("unity") => PostScaling::Unity,
            Some(s) => return Err(raw.bad("post_scaling", format!("`{s}` is not wiener or unity"))),
        };
        let interpolator = match raw.text("interpolator") {
            None | Some("periodic") => InterpolatorSpec::periodic(),
            Some("fir") => InterpolatorSpec::fir(
                raw.parsed::<usize>("fir_half_length")?.unwrap_or(128),
                raw.real("fir_beta")?.unwrap_or(10.0),
            )
            .map_err(|e| raw.bad("fir_half_length", e.to_string()))?,
            Some(s) => return Err(raw.bad("interpolator", format!("`{s}` is not periodic or fir"))),
        };
        let tolerance = raw.positive("tolerance")?.unwrap_or(0.03);
        Ok(Self {
            sigma_x2,
            quantizer,
            filter,
            delta,
            k4,
            oversampling,
            n_samples,
            n_trials,
            master_seed,
            source,
            patterns,
            post_scaling,
            interpolator,
            tolerance,
        })
    }

    fn filter_source(raw: &RawConfig, delta: Option<f64>, k4: Option<(f64, f64)>) -> Result<FilterSource> {
        let p = raw.parsed::<usize>("p")?;
        let order = || p.ok_or_else(|| raw.bad("p", "filter order required".into()));
        let explicit = raw.text("filter");
        let gamma = match (raw.positive("gamma")?, delta) {
            (Some(_), Some(_)) => return Err(raw.bad("gamma", "give either gamma or delta, not both".into())),
            (Some(g), None) => Some(g),
            (None, Some(d)) => Some(BrickWallSpec::new(d).map_err(|e| raw.bad("delta", e.to_string()))?.gamma()),
            (None, None) => None,
        };
        let lambda = raw.real("lambda")?;
        if let Some(l) = lambda {
            if l < 0.0 {
                return Err(raw.bad("lambda", format!("{l} must be >= 0")));
            }
        }
        let kind = match explicit {
            Some(k) => k.to_string(),
            None if raw.contains("coefficients") => "coefficients".into(),
            None if raw.contains("band_edges") || k4.is_some() => "multiband".into(),
            None if gamma.is_some() => "yule_walker_gamma".into(),
            None if lambda.is_some() => "yule_walker".into(),
            None => "white".into(),
        };
        Ok(match kind.as_str() {
            "white" => FilterSource::Coefficients(vec![1.0]),
            "yule_walker" => FilterSource::YuleWalker {
                p: order()?,
                lambda: lambda.ok_or_else(|| raw.bad("lambda", "required by yule_walker".into()))?,
            },
            "yule_walker_gamma" => FilterSource::YuleWalkerGamma {
                p: order()?,
                gamma: gamma.ok_or_else(|| raw.bad("gamma", "required by yule_walker_gamma".into()))?,
            },
            "coefficients" => FilterSource::Coefficients(
                raw.list("coefficients")?
                    .ok_or_else(|| raw.bad("coefficients", "required".into()))?,
            ),
            "multiband" => {
                let (edges, weights) = match (raw.list("band_edges")?, raw.list("band_weights")?, k4) {
                    (Some(e), Some(w), _) => (e.iter().map(|f| f * PI).collect(), w),
                    (None, None, Some((d0, d1))) => k4_bands(d0, d1),
                    _ => return Err(raw.bad("band_edges", "band_edges and band_weights go together".into())),
                };
                FilterSource::Multiband {
                    p: order()?,
                    edges,
                    weights,
                }
            }
            other => return Err(raw.bad("filter", format!("unknown filter `{other}`"))),
        })
    }

    pub fn factor(&self) -> usize {
        self.oversampling.factor()
    }

    pub fn quantizer_spec(&self) -> Result<QuantizerSpec> {
        Ok(match self.quantizer {
            QuantizerSource::Step(s) => QuantizerSpec::new(s)?,
            QuantizerSource::NoiseVariance(v) => QuantizerSpec::from_noise_variance(v)?,
        })
    }

    pub fn design_filter(&self) -> Result<ShapingFilter> {
        Ok(match &self.filter {
            FilterSource::YuleWalker { p, lambda } => design_yule_walker(*p, *lambda)?,
            FilterSource::YuleWalkerGamma { p, gamma } => {
                design_yule_walker(*p, find_lambda_for_ratio(*gamma, *p)?)?
            }
            FilterSource::Coefficients(c) => ShapingFilter::new(c.clone())?,
            FilterSource::Multiband { p, edges, weights } => design_multiband(*p, edges, weights)?,
        })
    }

    /// Codec configuration with the given dither seed.
    pub fn codec(&self, filter: ShapingFilter, dither_seed: u64) -> Result<CodecConfig> {
        Ok(CodecConfig::new(self.sigma_x2, self.quantizer_spec()?, filter, self.oversampling)?
            .with_interpolator(self.interpolator)
            .with_dither_seed(dither_seed)
            .with_post_scaling(self.post_scaling))
    }

    pub fn filter_order(&self) -> usize {
        match &self.filter {
            FilterSource::YuleWalker { p, .. }
            | FilterSource::YuleWalkerGamma { p, .. }
            | FilterSource::Multiband { p, .. } => *p,
            FilterSource::Coefficients(c) => c.len().saturating_sub(1),
        }
    }
}

/// Edges and inverse-level weights of the three-level target.
pub fn k4_bands(delta0: f64, delta1: f64) -> (Vec<f64>, Vec<f64>) {
    let delta2 = 1.0 / (delta0 * delta1).sqrt();
    (
        vec![PI / 4.0, 0.75 * PI, PI],
        vec![1.0 / delta0, 1.0 / delta2, 1.0 / delta1],
    )
}
