//! Distortion checks for non-Gaussian sources.
//!
//! The distortion formulas depend only on second moments, so the same
//! theory columns apply. The Gaussian rate accounting becomes an upper bound
//! on the rate needed by a source of the same variance.

use crate::config::ExperimentConfig;
use crate::sim::{run, SimResult};
use crate::source::SourceDist;
use crate::{HarnessError, Result};

/// Largest `sigma_e2 / sigma_x2` accepted as high resolution.
pub const HIGH_RESOLUTION_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct UniversalityReport {
    pub source: SourceDist,
    pub result: SimResult,
    /// Gaussian accounting rate; an upper bound for other sources.
    pub gaussian_rate_upper_bound: f64,
}

impl UniversalityReport {
    pub fn all_pass(&self) -> bool {
        self.result.all_pass()
    }
}

pub fn universality_check(exp: &ExperimentConfig) -> Result<UniversalityReport> {
    let sigma_e2 = exp.quantizer_spec()?.noise_variance();
    let ratio = sigma_e2 / exp.sigma_x2;
    // Allow for the rounding of a step given in decimal.
    if ratio > HIGH_RESOLUTION_RATIO * (1.0 + 1e-9) {
        return Err(HarnessError::NotHighResolution { ratio });
    }
    let result = run(exp)?;
    Ok(UniversalityReport {
        source: exp.source,
        gaussian_rate_upper_bound: result.rate_theory_bits,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    #[test]
    fn low_resolution_rejected() {
        let exp = ExperimentConfig::from_raw(&RawConfig::parse("sigma_e2 = 0.01\nsource = laplace\n").unwrap()).unwrap();
        assert!(matches!(universality_check(&exp), Err(HarnessError::NotHighResolution { .. })));
    }
}
