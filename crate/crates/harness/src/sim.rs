//! Seeded Monte-Carlo runs of the full codec.
//!
//! Trial `t` draws its source from substream `(master, t, Source)` and its
//! dither seed from `(master, t, Dither)`, so trials are independent tasks
//! whose results do not depend on how they are scheduled. Rows are merged in
//! trial order.

use std::fmt::Write as _;

use mdsq_core::codec::{decode, encode_packets, reconstruct, CodecConfig, DitherSource, PostScaling};
use mdsq_core::dsp::SignalBlock;
use mdsq_core::ecdq::rate_accounting;
use mdsq_core::rng::{dither_seed, substream, Role};
use mdsq_core::shaping::ShapingFilter;
use mdsq_core::theory::{description_rate, wiener_distortion};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, FilterSource, Pattern};
use crate::entropy::{estimate_index_entropy, EntropyEstimate, MIN_INDICES};
use crate::Result;

pub const CSV_HEADER: &str = "trial,pattern,n_samples,sigma_x2,sigma_e2,p,K,delta_or_gamma,pdc,pds,\
rate_theory_bits,rate_gauss_emp_bits,index_entropy_bits,mse_theory,mse_emp,stderr";

const BATCHES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialLabel {
    Index(usize),
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub trial: TrialLabel,
    pub pattern: Pattern,
    pub n_samples: usize,
    pub sigma_x2: f64,
    pub sigma_e2: f64,
    pub p: usize,
    pub k: usize,
    pub delta_or_gamma: f64,
    pub pdc: f64,
    pub pds: f64,
    pub rate_theory_bits: f64,
    pub rate_gauss_emp_bits: f64,
    pub index_entropy_bits: f64,
    pub mse_theory: f64,
    pub mse_emp: f64,
    pub stderr: f64,
}

impl CsvRow {
    pub fn to_line(&self) -> String {
        let trial = match self.trial {
            TrialLabel::Index(t) => t.to_string(),
            TrialLabel::Mean => "mean".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            trial,
            self.pattern.name(),
            self.n_samples,
            self.sigma_x2,
            self.sigma_e2,
            self.p,
            self.k,
            self.delta_or_gamma,
            self.pdc,
            self.pds,
            self.rate_theory_bits,
            self.rate_gauss_emp_bits,
            self.index_entropy_bits,
            self.mse_theory,
            self.mse_emp,
            self.stderr
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSummary {
    pub pattern: Pattern,
    pub mse_theory: f64,
    pub mse_emp: f64,
    pub stderr: f64,
    pub trial_mse: Vec<f64>,
    pub pass: bool,
}

impl PatternSummary {
    pub fn relative_error(&self) -> f64 {
        self.mse_emp / self.mse_theory - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub filter: ShapingFilter,
    pub sigma_e2: f64,
    /// In-band power of the all-description reconstruction.
    pub pdc: f64,
    pub pds: f64,
    pub rate_theory_bits: f64,
    pub var_output_theory: f64,
    pub var_output_emp: f64,
    pub rate_gauss_emp_bits: f64,
    /// Averaged over descriptions and trials; `None` below the sample floor.
    pub index_entropy: Option<EntropyEstimate>,
    pub space_filling_bits: f64,
    pub patterns: Vec<PatternSummary>,
    pub rows: Vec<CsvRow>,
}

impl SimResult {
    pub fn pattern(&self, p: Pattern) -> Option<&PatternSummary> {
        self.patterns.iter().find(|s| s.pattern == p)
    }

    pub fn all_pass(&self) -> bool {
        self.patterns.iter().all(|s| s.pass)
    }

    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(256 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.to_line());
        }
        out
    }

    /// Human-readable summary, one quantity per line.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "sigma_e2 = {}", self.sigma_e2);
        let _ = writeln!(s, "pdc = {}  pds = {}  order = {}", self.pdc, self.pds, self.filter.order());
        let _ = writeln!(s, "rate_theory_bits = {}", self.rate_theory_bits);
        let _ = writeln!(
            s,
            "var_output: theory {} empirical {}",
            self.var_output_theory, self.var_output_emp
        );
        let _ = writeln!(s, "rate_gauss_emp_bits = {}", self.rate_gauss_emp_bits);
        match &self.index_entropy {
            Some(e) => {
                let _ = writeln!(
                    s,
                    "index_entropy_bits = {} (gap {} to theory; space-filling {}; miller term {}, not subtracted)",
                    e.bits,
                    e.bits - self.rate_theory_bits,
                    self.space_filling_bits,
                    e.miller_correction_bits
                );
            }
            None => {
                let _ = writeln!(s, "index_entropy_bits = n/a (fewer than {MIN_INDICES} indices per description)");
            }
        }
        for p in &self.patterns {
            let _ = writeln!(
                s,
                "{:<8} mse_theory {:.6e} mse_emp {:.6e} +- {:.2e} rel {:+.4} {}",
                p.pattern.name(),
                p.mse_theory,
                p.mse_emp,
                p.stderr,
                p.relative_error(),
                if p.pass { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

/// Fraction of `sigma_e2` reaching the decoder under `pattern`.
pub fn pattern_power(cfg: &CodecConfig, pattern: Pattern) -> f64 {
    match pattern {
        Pattern::Central => cfg.central_power(),
        Pattern::Even | Pattern::Odd | Pattern::Single(_) => cfg.side_power(),
        Pattern::Pair02 | Pattern::Pair13 => cfg.pair_power(),
    }
}

pub fn pattern_theory(cfg: &CodecConfig, pattern: Pattern) -> f64 {
    let e = cfg.quantizer.noise_variance();
    let power = pattern_power(cfg, pattern);
    match cfg.post_scaling {
        PostScaling::Wiener => wiener_distortion(cfg.source_variance, e, power),
        PostScaling::Unity => e * power,
    }
}

struct TrialOutcome {
    mse: Vec<f64>,
    batch_stderr: Vec<f64>,
    var_output: f64,
    entropy: Option<(f64, f64)>,
}

fn batch_means(sq_err: &[f64]) -> (f64, f64) {
    let n = sq_err.len();
    let mean = sq_err.iter().sum::<f64>() / n as f64;
    let size = n / BATCHES;
    if size == 0 {
        return (mean, f64::NAN);
    }
    let batches: Vec<f64> = sq_err
        .chunks_exact(size)
        .take(BATCHES)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let bm = batches.iter().sum::<f64>() / BATCHES as f64;
    let var = batches.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (mean, (var / BATCHES as f64).sqrt())
}

fn run_trial(exp: &ExperimentConfig, filter: &ShapingFilter, trial: usize) -> Result<TrialOutcome> {
    let t = trial as u64;
    let mut rng = substream(exp.master_seed, t, Role::Source, 0);
    let x = exp.source.sample(&mut rng, exp.n_samples, exp.sigma_x2);
    let cfg = exp.codec(filter.clone(), dither_seed(exp.master_seed, t))?;
    let packets = encode_packets(&SignalBlock::base(x.clone()), &cfg, DitherSource::Seeded)?;
    let k = cfg.factor();
    let margin = cfg.steady_state_margin();

    let mut mse = Vec::with_capacity(exp.patterns.len());
    let mut batch_stderr = Vec::with_capacity(exp.patterns.len());
    for pattern in &exp.patterns {
        let subset: Vec<_> = pattern
            .descriptions(k)
            .into_iter()
            .map(|r| packets[r].clone())
            .collect();
        let y = decode(&subset, &cfg)?;
        let sq: Vec<f64> = (margin..x.len() - margin)
            .map(|i| (y.samples[i] - x[i]).powi(2))
            .collect();
        let (m, se) = batch_means(&sq);
        mse.push(m);
        batch_stderr.push(se);
    }

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for p in &packets {
        let a_hat = reconstruct(p, &cfg)?;
        for v in &a_hat[margin..a_hat.len() - margin] {
            sum += v;
            sum_sq += v * v;
        }
        count += a_hat.len() - 2 * margin;
    }
    let mean = sum / count as f64;
    let var_output = sum_sq / count as f64 - mean * mean;

    let entropy = if exp.n_samples >= MIN_INDICES {
        let mut bits = 0.0;
        let mut miller = 0.0;
        for p in &packets {
            let e = estimate_index_entropy(&p.indices)?;
            bits += e.bits;
            miller += e.miller_correction_bits;
        }
        Some((bits / k as f64, miller / k as f64))
    } else {
        None
    };

    Ok(TrialOutcome {
        mse,
        batch_stderr,
        var_output,
        entropy,
    })
}

fn delta_or_gamma(exp: &ExperimentConfig, pdc: f64, pds: f64) -> f64 {
    match (&exp.filter, exp.delta) {
        (_, Some(d)) => d,
        (FilterSource::YuleWalkerGamma { gamma, .. }, None) => *gamma,
        _ => pds / pdc,
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs every trial of `exp` and collects the per-pattern statistics.
pub fn run(exp: &ExperimentConfig) -> Result<SimResult> {
    let filter = exp.design_filter()?;
    run_with_filter(exp, filter)
}

pub fn run_with_filter(exp: &ExperimentConfig, filter: ShapingFilter) -> Result<SimResult> {
    let cfg = exp.codec(filter.clone(), 0)?;
    let q = cfg.quantizer;
    let sigma_e2 = q.noise_variance();
    let pdc = cfg.central_power();
    let pds = cfg.side_power();
    let rate_theory_bits = description_rate(exp.sigma_x2, sigma_e2, pds);
    let var_output_theory = exp.sigma_x2 + sigma_e2 * pds;
    let theory: Vec<f64> = exp.patterns.iter().map(|&p| pattern_theory(&cfg, p)).collect();

    let outcomes = (0..exp.n_trials)
        .into_par_iter()
        .map(|t| run_trial(exp, &filter, t))
        .collect::<Result<Vec<_>>>()?;

    let gauss_rates = outcomes
        .iter()
        .map(|o| Ok(rate_accounting(o.var_output, &q)?.gaussian_rate_bits))
        .collect::<Result<Vec<f64>>>()?;
    let entropies: Vec<f64> = outcomes
        .iter()
        .map(|o| o.entropy.map_or(f64::NAN, |e| e.0))
        .collect();

    let template = CsvRow {
        trial: TrialLabel::Mean,
        pattern: Pattern::Central,
        n_samples: exp.n_samples,
        sigma_x2: exp.sigma_x2,
        sigma_e2,
        p: filter.order(),
        k: exp.factor(),
        delta_or_gamma: delta_or_gamma(exp, pdc, pds),
        pdc,
        pds,
        rate_theory_bits,
        rate_gauss_emp_bits: f64::NAN,
        index_entropy_bits: f64::NAN,
        mse_theory: f64::NAN,
        mse_emp: f64::NAN,
        stderr: f64::NAN,
    };

    let mut rows = Vec::with_capacity((exp.n_trials + 1) * exp.patterns.len());
    for (t, o) in outcomes.iter().enumerate() {
        for (j, &pattern) in exp.patterns.iter().enumerate() {
            rows.push(CsvRow {
                trial: TrialLabel::Index(t),
                pattern,
                rate_gauss_emp_bits: gauss_rates[t],
                index_entropy_bits: entropies[t],
                mse_theory: theory[j],
                mse_emp: o.mse[j],
                stderr: o.batch_stderr[j],
                ..template.clone()
            });
        }
    }

    let n_trials = exp.n_trials as f64;
    let mut patterns = Vec::with_capacity(exp.patterns.len());
    for (j, &pattern) in exp.patterns.iter().enumerate() {
        let trial_mse: Vec<f64> = outcomes.iter().map(|o| o.mse[j]).collect();
        let mse_emp = mean(&trial_mse);
        let stderr = if exp.n_trials >= 4 {
            let var = trial_mse.iter().map(|m| (m - mse_emp).powi(2)).sum::<f64>() / (n_trials - 1.0);
            (var / n_trials).sqrt()
        } else {
            outcomes.iter().map(|o| o.batch_stderr[j].powi(2)).sum::<f64>().sqrt() / n_trials
        };
        let pass = ((mse_emp / theory[j]) - 1.0).abs() <= exp.tolerance;
        rows.push(CsvRow {
            pattern,
            rate_gauss_emp_bits: mean(&gauss_rates),
            index_entropy_bits: mean(&entropies),
            mse_theory: theory[j],
            mse_emp,
            stderr,
            ..template.clone()
        });
        patterns.push(PatternSummary {
            pattern,
            mse_theory: theory[j],
            mse_emp,
            stderr,
            trial_mse,
            pass,
        });
    }

    let index_entropy = if outcomes.iter().all(|o| o.entropy.is_some()) {
        let count = exp.n_samples * exp.factor() * exp.n_trials;
        Some(EntropyEstimate {
            bits: mean(&entropies),
            miller_correction_bits: mean(
                &outcomes.iter().map(|o| o.entropy.map_or(0.0, |e| e.1)).collect::<Vec<_>>(),
            ),
            distinct: 0,
            count,
        })
    } else {
        None
    };

    Ok(SimResult {
        filter,
        sigma_e2,
        pdc,
        pds,
        rate_theory_bits,
        var_output_theory,
        var_output_emp: mean(&outcomes.iter().map(|o| o.var_output).collect::<Vec<_>>()),
        rate_gauss_emp_bits: mean(&gauss_rates),
        index_entropy,
        space_filling_bits: q.space_filling_bits(),
        patterns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn small(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_raw(&RawConfig::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn batch_means_of_constant() {
        let (m, se) = batch_means(&vec![2.0; 640]);
        assert_eq!(m, 2.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn rows_and_header() {
        let exp = small("p = 8\ndelta = 2\nn_samples = 16384\nn_trials = 2\nseed = 3\n");
        let r = run(&exp).unwrap();
        assert_eq!(r.rows.len(), 3 * 3);
        let csv = r.csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(CSV_HEADER.split(',').count(), 16);
        for line in lines {
            assert_eq!(line.split(',').count(), 16, "{line}");
        }
        assert!(csv.lines().last().unwrap().starts_with("mean,odd,16384,1,"));
        // Below the entropy sample floor the column is NaN.
        assert!(r.index_entropy.is_none());
    }

    #[test]
    fn odd_pattern_routes_to_side_decoder() {
        let exp = small("p = 8\ndelta = 4\nn_samples = 16384\nn_trials = 1\npatterns = odd\n");
        let r = run(&exp).unwrap();
        let odd = r.pattern(Pattern::Odd).unwrap();
        let cfg = exp.codec(r.filter.clone(), 0).unwrap();
        assert_eq!(odd.mse_theory, pattern_theory(&cfg, Pattern::Odd));
        assert!(odd.relative_error().abs() < 0.1, "{}", odd.relative_error());
        assert_eq!(r.rows[0].pattern.name(), "odd");
    }

    #[test]
    fn deterministic_csv() {
        let exp = small("p = 8\ndelta = 4\nn_samples = 16384\nn_trials = 3\nseed = 77\n");
        let a = run(&exp).unwrap().csv();
        let b = run(&exp).unwrap().csv();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| run(&exp).unwrap().csv());
        assert_eq!(a, c);
    }
}
