//! Plug-in entropy of quantizer indices.
//!
//! The histogram estimate of the marginal index distribution ignores both the
//! dither and the memory between indices, so it sits above the conditional
//! entropy `H(Q|Z)` the rate formulas describe. The Miller-Madow term
//! `(m - 1) / (2 n ln 2)` is reported next to it but never subtracted.

use std::f64::consts::LN_2;

use crate::{HarnessError, Result};

pub const MIN_INDICES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub bits: f64,
    pub miller_correction_bits: f64,
    pub distinct: usize,
    pub count: usize,
}

pub fn estimate_index_entropy(indices: &[i64]) -> Result<EntropyEstimate> {
    if indices.len() < MIN_INDICES {
        return Err(HarnessError::TooFewIndices {
            needed: MIN_INDICES,
            got: indices.len(),
        });
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut bits = 0.0;
    let mut distinct = 0;
    for run in sorted.chunk_by(|a, b| a == b) {
        let p = run.len() as f64 / n;
        bits -= p * p.log2();
        distinct += 1;
    }
    Ok(EntropyEstimate {
        bits: bits.max(0.0),
        miller_correction_bits: (distinct as f64 - 1.0) / (2.0 * n * LN_2),
        distinct,
        count: sorted.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn constant_indices_carry_nothing() {
        let e = estimate_index_entropy(&vec![0; MIN_INDICES]).unwrap();
        assert_eq!(e.bits, 0.0);
        assert_eq!(e.miller_correction_bits, 0.0);
    }

    #[test]
    fn too_few_indices() {
        assert!(estimate_index_entropy(&[1, 2, 3]).is_err());
    }

    #[test]
    fn uniform_alphabet() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let v: Vec<i64> = (0..1 << 18).map(|_| rng.random_range(0..8)).collect();
        let e = estimate_index_entropy(&v).unwrap();
        assert!((e.bits - 3.0).abs() < 1e-3, "{}", e.bits);
        assert_eq!(e.distinct, 8);
    }

    #[test]
    fn two_point_distribution() {
        let mut v = vec![0i64; 75_000];
        v.extend(std::iter::repeat_n(5, 25_000));
        let e = estimate_index_entropy(&v).unwrap();
        let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((e.bits - h).abs() < 1e-12);
    }
}
