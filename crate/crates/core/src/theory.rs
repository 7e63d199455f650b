//! Closed-form operating points and bounds for Gaussian sources.
//!
//! Rates are bits per description per source sample. Distortions are mean
//! squared errors after the optimal (Wiener) post-multipliers.

use crate::shaping::BrickWallSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPoint {
    pub rate_bits: f64,
    pub dc: f64,
    pub ds: f64,
    pub pdc: f64,
    pub pds: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Set for brick-wall points.
    pub delta: Option<f64>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

/// Linear-MMSE distortion of `X + noise` with noise power `sigma_e2 * p`.
pub fn wiener_distortion(sigma_x2: f64, sigma_e2: f64, p: f64) -> f64 {
    sigma_x2 * sigma_e2 * p / (sigma_x2 + sigma_e2 * p)
}

/// Optimal scaling of an observation `X + noise` with noise power `sigma_e2 * p`.
pub fn wiener_multiplier(sigma_x2: f64, sigma_e2: f64, p: f64) -> f64 {
    sigma_x2 / (sigma_x2 + sigma_e2 * p)
}

/// Description rate for output variance `sigma_x2 + sigma_e2 * pds`.
pub fn description_rate(sigma_x2: f64, sigma_e2: f64, pds: f64) -> f64 {
    if sigma_e2 == 0.0 {
        f64::INFINITY
    } else {
        0.5 * ((sigma_x2 + sigma_e2 * pds) / sigma_e2).log2()
    }
}

/// Operating point of the ideal two-step shaping spectrum, written out in
/// the brick-wall parameterization.
pub fn brickwall_point(delta: f64, sigma_e2: f64, sigma_x2: f64) -> Result<TheoryPoint> {
    check_positive("delta", delta)?;
    check_positive("sigma_e2", sigma_e2)?;
    check_positive("sigma_x2", sigma_x2)?;
    let inv = 1.0 / delta;
    let sum = delta + inv;
    let bw = BrickWallSpec::new(delta)?;
    Ok(TheoryPoint {
        rate_bits: 0.5 * ((sigma_x2 + sigma_e2 * sum / 2.0) / sigma_e2).log2(),
        dc: sigma_x2 * sigma_e2 * inv / (2.0 * sigma_x2 + sigma_e2 * inv),
        ds: sigma_x2 * sigma_e2 * sum / (2.0 * sigma_x2 + sigma_e2 * sum),
        pdc: bw.pdc(),
        pds: bw.pds(),
        alpha: sigma_x2 / (sigma_x2 + sigma_e2 * sum / 2.0),
        beta: sigma_x2 / (sigma_x2 + sigma_e2 * inv / 2.0),
        delta: Some(delta),
    })
}

/// Operating point of an arbitrary shaping filter with powers `(pdc, pds)`.
pub fn finite_p_point(pdc: f64, pds: f64, sigma_e2: f64, sigma_x2: f64) -> Result<TheoryPoint> {
    check_positive("pdc", pdc)?;
    check_positive("sigma_x2", sigma_x2)?;
    if !(pds >= pdc && pds.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "pds = {pds} must be at least pdc = {pdc}"
        )));
    }
    if !(sigma_e2.is_finite() && sigma_e2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma_e2 = {sigma_e2} must be >= 0")));
    }
    Ok(TheoryPoint {
        rate_bits: description_rate(sigma_x2, sigma_e2, pds),
        dc: wiener_distortion(sigma_x2, sigma_e2, pdc),
        ds: wiener_distortion(sigma_x2, sigma_e2, pds),
        pdc,
        pds,
        alpha: wiener_multiplier(sigma_x2, sigma_e2, pds),
        beta: wiener_multiplier(sigma_x2, sigma_e2, pdc),
        delta: None,
    })
}

/// `d_c d_s / (sigma_x^4/4 * 1/(1 - d_c/d_s) * 2^{-4R})`, which tends to 1 at
/// high resolution on the optimal tradeoff.
pub fn distortion_product_ratio(point: &TheoryPoint, sigma_x2: f64) -> f64 {
    let bound = sigma_x2 * sigma_x2 / 4.0 / (1.0 - point.dc / point.ds)
        * (-4.0 * point.rate_bits).exp2();
    point.dc * point.ds / bound
}

/// Symmetric two-description region evaluated at side distortion `ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OzarowEvaluation {
    pub rate_bits: f64,
    pub ds: f64,
    /// Smallest achievable side distortion at this rate.
    pub ds_floor: f64,
    pub pi_term: f64,
    pub delta_term: f64,
    /// Smallest achievable central distortion.
    pub dc_bound: f64,
}

/// Floor on `d_s` at rate `R`: `sigma_x2 * 2^{-2R}`.
pub fn side_floor(rate_bits: f64, sigma_x2: f64) -> f64 {
    sigma_x2 * (-2.0 * rate_bits).exp2()
}

pub fn ozarow_bounds(rate_bits: f64, ds: f64, sigma_x2: f64) -> Result<OzarowEvaluation> {
    check_positive("rate", rate_bits)?;
    check_positive("sigma_x2", sigma_x2)?;
    if !ds.is_finite() {
        return Err(Error::NonFinite("side distortion"));
    }
    let floor = side_floor(rate_bits, sigma_x2);
    let tolerance = 1e-12 * floor;
    if ds < floor - tolerance {
        return Err(Error::SideDistortionInfeasible { ds, floor });
    }
    let r4 = (-4.0 * rate_bits).exp2();
    let pi_term = (1.0 - ds / sigma_x2).powi(2);
    // On the floor (no excess marginal rate) the difference below is pure
    // rounding, and its square root would be amplified to ~1e-8.
    let delta_term = if (ds - floor).abs() <= tolerance {
        0.0
    } else {
        ds * ds / (sigma_x2 * sigma_x2) - r4
    };
    if pi_term < delta_term {
        return Err(Error::DegenerateRegion {
            pi: pi_term,
            delta: delta_term,
        });
    }
    let gap = pi_term.sqrt() - delta_term.sqrt();
    Ok(OzarowEvaluation {
        rate_bits,
        ds,
        ds_floor: floor,
        pi_term,
        delta_term,
        dc_bound: sigma_x2 * r4 / (1.0 - gap * gap),
    })
}

/// Symmetric noise pair of the optimal two-branch test channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestChannelParams {
    pub rho: f64,
    pub sigma_n2: f64,
}

impl TestChannelParams {
    pub fn new(rho: f64, sigma_n2: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("|rho| = {} must be < 1", rho.abs())));
        }
        check_positive("sigma_n2", sigma_n2)?;
        Ok(Self { rho, sigma_n2 })
    }

    /// `2R = log2((sigma_x2 + sigma_n2)/sigma_n2) - log2 sqrt(1 - rho^2)`.
    pub fn sum_rate_bits(&self, sigma_x2: f64) -> f64 {
        ((sigma_x2 + self.sigma_n2) / self.sigma_n2).log2()
            - (1.0 - self.rho * self.rho).sqrt().log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestChannelMode {
    HighRes,
    /// Solves the exact-resolution equations for a source of variance `sigma_x2`.
    General { sigma_x2: f64, delta_guess: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingParams {
    pub delta: f64,
    pub sigma_e2: f64,
    /// Fixed-point iterations used (0 in high-resolution mode).
    pub iterations: usize,
    /// Largest residual of the two defining equations.
    pub residual: f64,
}

const MAX_FIXED_POINT_ITERATIONS: usize = 1000;
const FIXED_POINT_TOLERANCE: f64 = 1e-10;
const DAMPING: f64 = 0.5;

fn general_denominator(tc: &TestChannelParams, sigma_x2: f64, delta: f64) -> f64 {
    let s = (1.0 - tc.rho * tc.rho).sqrt();
    2.0 * (sigma_x2 + tc.sigma_n2) - (delta + 1.0 / delta) * tc.sigma_n2 * s
}

/// `sigma_e2` that equates the description rate with half the sum rate.
fn general_sigma_e2(tc: &TestChannelParams, sigma_x2: f64, delta: f64) -> f64 {
    let s = (1.0 - tc.rho * tc.rho).sqrt();
    2.0 * sigma_x2 * tc.sigma_n2 * s / general_denominator(tc, sigma_x2, delta)
}

/// `delta` that equates the central distortion with the two-observation MMSE
/// `sigma_x2 sigma_n2 (1+rho) / (sigma_n2 (1+rho) + 2 sigma_x2)`.
fn general_delta(tc: &TestChannelParams, sigma_x2: f64, delta: f64) -> f64 {
    let ratio = ((1.0 - tc.rho) / (1.0 + tc.rho)).sqrt();
    2.0 * sigma_x2 * ratio / general_denominator(tc, sigma_x2, delta)
}

pub fn test_channel_map(tc: &TestChannelParams, mode: TestChannelMode) -> Result<ShapingParams> {
    let s = (1.0 - tc.rho * tc.rho).sqrt();
    let high_delta = ((1.0 - tc.rho) / (1.0 + tc.rho)).sqrt();
    match mode {
        TestChannelMode::HighRes => Ok(ShapingParams {
            delta: high_delta,
            sigma_e2: tc.sigma_n2 * s,
            iterations: 0,
            residual: 0.0,
        }),
        TestChannelMode::General {
            sigma_x2,
            delta_guess,
        } => {
            check_positive("sigma_x2", sigma_x2)?;
            let mut delta = delta_guess.unwrap_or(high_delta);
            check_positive("delta_guess", delta)?;
            let mut residual = f64::INFINITY;
            for it in 1..=MAX_FIXED_POINT_ITERATIONS {
                if general_denominator(tc, sigma_x2, delta) <= 0.0 {
                    return Err(Error::NoConvergence {
                        iterations: it,
                        residual,
                    });
                }
                let next = general_delta(tc, sigma_x2, delta);
                delta = (1.0 - DAMPING) * delta + DAMPING * next;
                let sigma_e2 = general_sigma_e2(tc, sigma_x2, delta);
                residual = (general_delta(tc, sigma_x2, delta) - delta).abs();
                if residual <= FIXED_POINT_TOLERANCE {
                    return Ok(ShapingParams {
                        delta,
                        sigma_e2,
                        iterations: it,
                        residual,
                    });
                }
            }
            Err(Error::NoConvergence {
                iterations: MAX_FIXED_POINT_ITERATIONS,
                residual,
            })
        }
    }
}

/// Three-level shaping target for four descriptions: level `delta0` on
/// `|w| <= pi/4`, `delta2` on `pi/4 < |w| < 3pi/4` and `delta1` above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K4Spec {
    pub delta0: f64,
    pub delta1: f64,
    pub sigma_e2: f64,
    pub sigma_x2: f64,
}

impl K4Spec {
    pub fn new(delta0: f64, delta1: f64, sigma_e2: f64, sigma_x2: f64) -> Result<Self> {
        check_positive("delta0", delta0)?;
        check_positive("delta1", delta1)?;
        check_positive("sigma_e2", sigma_e2)?;
        check_positive("sigma_x2", sigma_x2)?;
        if delta0 > 1.0 || delta0 * delta1 > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "need delta0 <= 1 and delta0*delta1 <= 1, got {delta0}, {delta1}"
            )));
        }
        Ok(Self {
            delta0,
            delta1,
            sigma_e2,
            sigma_x2,
        })
    }

    /// Level of the middle band, fixed by the zero log-integral.
    pub fn delta2(&self) -> f64 {
        1.0 / (self.delta0 * self.delta1).sqrt()
    }

    pub fn spectrum(&self, omega: f64) -> f64 {
        use std::f64::consts::FRAC_PI_4;
        let w = omega.abs();
        if w <= FRAC_PI_4 {
            self.delta0
        } else if w < 3.0 * FRAC_PI_4 {
            self.delta2()
        } else {
            self.delta1
        }
    }

    /// `(1/2pi) int log2 S`, zero by construction.
    pub fn log_spectrum_integral(&self) -> f64 {
        0.25 * self.delta0.log2() + 0.5 * self.delta2().log2() + 0.25 * self.delta1.log2()
    }

    /// Band powers `(low, middle, high)`; they sum to the total power.
    pub fn band_powers(&self) -> (f64, f64, f64) {
        (self.delta0 / 4.0, self.delta2() / 2.0, self.delta1 / 4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K4Point {
    pub dc: f64,
    /// Two descriptions with even index spacing.
    pub d2: f64,
    /// One description.
    pub d1: f64,
    pub rate_bits: f64,
}

/// High-resolution distortions without post-multipliers.
pub fn k4_point(spec: &K4Spec) -> K4Point {
    let e = spec.sigma_e2;
    let dc = e * spec.delta0 / 4.0;
    let d2 = dc + e * spec.delta1 / 4.0;
    let d1 = d2 + e / (2.0 * (spec.delta0 * spec.delta1).sqrt());
    let total = (spec.delta0 + spec.delta1 + 2.0 / (spec.delta0 * spec.delta1).sqrt()) / 4.0;
    K4Point {
        dc,
        d2,
        d1,
        rate_bits: 0.5 * ((spec.sigma_x2 + e * total) / e).log2(),
    }
}
