//! i.i.d. test sources with a prescribed variance.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceDist {
    Gaussian,
    Laplace,
    Uniform,
}

impl SourceDist {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian" => Some(SourceDist::Gaussian),
            "laplace" => Some(SourceDist::Laplace),
            "uniform" => Some(SourceDist::Uniform),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceDist::Gaussian => "gaussian",
            SourceDist::Laplace => "laplace",
            SourceDist::Uniform => "uniform",
        }
    }

    /// `n` zero-mean samples of variance `variance`.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize, variance: f64) -> Vec<f64> {
        let sigma = variance.sqrt();
        match self {
            SourceDist::Gaussian => (0..n)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            SourceDist::Laplace => {
                // Scale b has variance 2b^2.
                let b = sigma / std::f64::consts::SQRT_2;
                (0..n)
                    .map(|_| {
                        let m: f64 = rng.sample(Exp1);
                        if rng.random::<bool>() {
                            b * m
                        } else {
                            -b * m
                        }
                    })
                    .collect()
            }
            SourceDist::Uniform => {
                let half = 3f64.sqrt() * sigma;
                (0..n).map(|_| half * (2.0 * rng.random::<f64>() - 1.0)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn moments_match() {
        let n = 400_000;
        for dist in [SourceDist::Gaussian, SourceDist::Laplace, SourceDist::Uniform] {
            let mut rng = ChaCha12Rng::seed_from_u64(3);
            let x = dist.sample(&mut rng, n, 2.5);
            let mean = x.iter().sum::<f64>() / n as f64;
            let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
            let kurt = x.iter().map(|v| v.powi(4)).sum::<f64>() / n as f64 / (var * var);
            assert!(mean.abs() < 0.02, "{dist:?} mean {mean}");
            assert!((var / 2.5 - 1.0).abs() < 0.02, "{dist:?} var {var}");
            let expected = match dist {
                SourceDist::Gaussian => 3.0,
                SourceDist::Laplace => 6.0,
                SourceDist::Uniform => 1.8,
            };
            assert!((kurt - expected).abs() < 0.1 * expected, "{dist:?} kurtosis {kurt}");
        }
    }

    #[test]
    fn uniform_support() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let x = SourceDist::Uniform.sample(&mut rng, 10_000, 1.0);
        assert!(x.iter().all(|v| v.abs() <= 3f64.sqrt()));
    }
}
