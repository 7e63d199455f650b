//! Noise-shaping filter design and spectral analysis.
//!
//! A shaping filter is a monic FIR `c(z) = 1 + c_1 z^-1 + ... + c_p z^-p`.
//! Its in-band power `P_dc` (over `|w| <= pi/2`) and total power `P_ds` fix the
//! central and side distortions of the two-description codec.
//!
//! All designs reduce to a Toeplitz normal system `R c' = -r` and are solved by
//! Levinson-Durbin, whose solution is the minimum-phase prediction-error filter
//! of the weighted spectrum.
//!
//! Near `lambda = 0` the optimal filters have coefficients in the millions
//! while `P_dc` falls towards 1e-10, so the recursion, the lags and the `P_dc`
//! quadratic form are evaluated in double-double arithmetic.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use twofloat::TwoFloat;

use crate::dsp::{sinc_half, spectrum_power};
use crate::{Error, Result};

/// Points of the uniform midpoint rule on `[-pi, pi]`.
pub const QUADRATURE_POINTS: usize = 8192;

/// Monic FIR noise-shaping filter.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapingFilter {
    coeffs: Vec<f64>,
}

impl ShapingFilter {
    /// Builds from the tail `(c_1, ..., c_p)`; `c_0 = 1` is implied.
    pub fn from_tail(tail: &[f64]) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(tail.len() + 1);
        coeffs.push(1.0);
        coeffs.extend_from_slice(tail);
        Self::new(coeffs)
    }

    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.first() != Some(&1.0) {
            return Err(Error::InvalidParameter("shaping filter must be monic (c_0 = 1)".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("filter coefficients"));
        }
        Ok(Self { coeffs })
    }

    pub fn white() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tail(&self) -> &[f64] {
        &self.coeffs[1..]
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn power_at(&self, omega: f64) -> f64 {
        spectrum_power(&self.coeffs, omega)
    }

    /// `sum_i c_i c_{i+|m|}`.
    pub fn autocorrelation(&self, m: usize) -> f64 {
        self.coeffs
            .iter()
            .zip(self.coeffs.iter().skip(m))
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `(1/2pi) int_{lo <= |w| <= hi} |c|^2 dw` in closed form.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        (0..=self.order())
            .map(|m| {
                let w = if m == 0 { 1.0 } else { 2.0 };
                w * self.autocorrelation(m) * band_gram(lo, hi, m as i64)
            })
            .sum()
    }

    pub fn pdc(&self) -> f64 {
        pdc_closed(self)
    }

    pub fn pds(&self) -> f64 {
        pds_closed(self)
    }
}

/// `(1/pi) int_lo^hi cos(w m) dw`, the Gram entry of a symmetric band at lag `m`.
pub fn band_gram(lo: f64, hi: f64, m: i64) -> f64 {
    if m == 0 {
        (hi - lo) / PI
    } else {
        let m = m as f64;
        ((hi * m).sin() - (lo * m).sin()) / (PI * m)
    }
}

/// `sinc(m/2)` in double-double.
fn sinc_half_dd(m: i64) -> TwoFloat {
    if m == 0 {
        TwoFloat::from(1.0)
    } else if m % 2 == 0 {
        TwoFloat::from(0.0)
    } else {
        let sign = if m.rem_euclid(4) == 1 { 1.0 } else { -1.0 };
        twofloat::consts::FRAC_2_PI * sign / m as f64
    }
}

/// `sin(pi f m)` in double-double, reducing `f m` modulo 2 first.
fn sin_pi_multiple(f: f64, m: i64) -> TwoFloat {
    let x = TwoFloat::new_mul(f, m as f64);
    let turns = (x.hi() / 2.0).floor() * 2.0;
    (twofloat::consts::PI * (x - turns)).sin()
}

/// `band_gram` in double-double. Edges are taken as multiples of pi
/// (`lo / pi`, `hi / pi`), so that edges such as `pi/2` are exact.
fn band_gram_dd(lo: f64, hi: f64, m: i64) -> TwoFloat {
    let (fl, fh) = (lo / PI, hi / PI);
    if m == 0 {
        TwoFloat::from(fh) - fl
    } else {
        (sin_pi_multiple(fh, m) - sin_pi_multiple(fl, m)) * twofloat::consts::FRAC_1_PI / m as f64
    }
}

/// `P_dc = 1/2 sum_ij sinc((i-j)/2) c_i c_j`.
pub fn pdc_closed(c: &ShapingFilter) -> f64 {
    let k = c.coeffs();
    let n = k.len() as i64;
    // Group by lag: sum_m sinc(m/2) * sum_i c_i c_{i+m}.
    let mut acc = TwoFloat::from(0.0);
    for m in -(n - 1)..n {
        let g = sinc_half_dd(m);
        if g == 0.0 {
            continue;
        }
        let lag = m.unsigned_abs() as usize;
        let mut r = TwoFloat::from(0.0);
        for i in 0..k.len() - lag {
            r += TwoFloat::new_mul(k[i], k[i + lag]);
        }
        acc += g * r;
    }
    f64::from(acc * 0.5)
}

/// `P_ds = sum_j c_j^2`.
pub fn pds_closed(c: &ShapingFilter) -> f64 {
    c.coeffs().iter().map(|v| v * v).sum()
}

fn midpoint_grid() -> impl Iterator<Item = f64> {
    let h = 2.0 * PI / QUADRATURE_POINTS as f64;
    (0..QUADRATURE_POINTS).map(move |k| -PI + (k as f64 + 0.5) * h)
}

/// `(1/2pi) int_{-pi}^{pi} f(w) dw` by the uniform midpoint rule.
pub fn mean_over_circle(f: impl Fn(f64) -> f64) -> f64 {
    midpoint_grid().map(f).sum::<f64>() / QUADRATURE_POINTS as f64
}

/// 16-point Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre_16() -> [(f64, f64); 16] {
    let n = 16;
    let mut out = [(0.0, 0.0); 16];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    out
}

/// `(1/2pi) int_{lo <= |w| <= hi} f(w) dw` for even `f`, by composite
/// Gauss-Legendre with `QUADRATURE_POINTS / 2` nodes on `[lo, hi]`.
pub fn mean_over_band(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let nodes = gauss_legendre_16();
    let panels = QUADRATURE_POINTS / 32;
    let width = (hi - lo) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * width;
        for &(x, w) in &nodes {
            acc += w * f(mid + 0.5 * width * x);
        }
    }
    acc * 0.5 * width / PI
}

pub fn pdc_quadrature(c: &ShapingFilter) -> f64 {
    mean_over_band(0.0, PI / 2.0, |w| c.power_at(w))
}

pub fn pds_quadrature(c: &ShapingFilter) -> f64 {
    mean_over_circle(|w| c.power_at(w))
}

/// Result of a Levinson-Durbin recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct Levinson {
    /// Monic prediction-error filter `(1, a_1, ..., a_p)`.
    pub coeffs: Vec<f64>,
    pub reflection: Vec<f64>,
    pub error_power: f64,
}

/// Solves `sum_j a_j r_{|i-j|} = 0` for `i = 1..=p` with `a_0 = 1`, i.e. the
/// monic minimizer of `a^T R a` for the Toeplitz matrix of `r`.
pub fn levinson(r: &[f64]) -> Result<Levinson> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("autocorrelation"));
    }
    let lags: Vec<TwoFloat> = r.iter().map(|&v| TwoFloat::from(v)).collect();
    levinson_dd(&lags)
}

/// `a / b` to double-double accuracy by long division on the leading parts
/// (`TwoFloat`'s own dd/dd quotient is only accurate to f64 precision).
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r1 = a - b * q1;
    let q2 = r1.hi() / b.hi();
    let r2 = r1 - b * q2;
    let q3 = r2.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

fn levinson_dd(r: &[TwoFloat]) -> Result<Levinson> {
    if r.is_empty() {
        return Err(Error::EmptySignal);
    }
    let p = r.len() - 1;
    let zero = TwoFloat::from(0.0);
    let mut a = vec![TwoFloat::from(1.0)];
    let mut reflection = Vec::with_capacity(p);
    let mut err = r[0];
    if !(err > 0.0) {
        return Err(Error::Factorization(format!(
            "lag-0 value {} is not positive",
            f64::from(err)
        )));
    }
    for m in 1..=p {
        let mut acc = zero;
        for i in 0..m {
            acc += a[i] * r[m - i];
        }
        let k = -dd_div(acc, err);
        if !(k.abs() < 1.0) {
            return Err(Error::Factorization(format!(
                "reflection coefficient {} at order {m} is not inside the unit interval",
                f64::from(k)
            )));
        }
        a.push(zero);
        let prev = a.clone();
        for i in 1..=m {
            a[i] = prev[i] + k * prev[m - i];
        }
        err *= -(k * k) + 1.0;
        reflection.push(f64::from(k));
    }
    Ok(Levinson {
        coeffs: a.into_iter().map(f64::from).collect(),
        reflection,
        error_power: f64::from(err),
    })
}

/// Normal equations of the finite-order problem, `(G + 2 lambda I) c' = -g`.
#[derive(Debug, Clone, PartialEq)]
pub struct YuleWalkerSystem {
    pub order: usize,
    pub lambda_ratio: f64,
}

impl YuleWalkerSystem {
    pub fn new(order: usize, lambda_ratio: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("filter order must be at least 1".into()));
        }
        if !(lambda_ratio >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda ratio {lambda_ratio} must be >= 0"
            )));
        }
        Ok(Self {
            order,
            lambda_ratio,
        })
    }

    /// `G_ij = sinc((i-j)/2)`, `i, j = 1..=p`.
    pub fn gram(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.order, self.order, |i, j| {
            sinc_half(i as i64 - j as i64)
        })
    }

    /// `g_i = sinc(i/2)`, `i = 1..=p`.
    pub fn rhs(&self) -> Vec<f64> {
        (1..=self.order as i64).map(sinc_half).collect()
    }

    /// Lags `0..=p` of the Toeplitz sequence of `[1 g^T; g G + 2 lambda I]`.
    pub fn toeplitz_lags(&self) -> Vec<f64> {
        self.toeplitz_lags_dd().into_iter().map(f64::from).collect()
    }

    fn toeplitz_lags_dd(&self) -> Vec<TwoFloat> {
        (0..=self.order as i64)
            .map(|m| {
                let g = sinc_half_dd(m);
                if m == 0 {
                    g + 2.0 * self.lambda_ratio
                } else {
                    g
                }
            })
            .collect()
    }

    pub fn solve(&self) -> Result<ShapingFilter> {
        if self.lambda_ratio.is_infinite() {
            return ShapingFilter::new(
                std::iter::once(1.0)
                    .chain(std::iter::repeat_n(0.0, self.order))
                    .collect(),
            );
        }
        // The monic system is [1, c']^T (T) with T = Toeplitz(g_0 + 2 lambda, g_1, ...),
        // except that the c_0 row/column carries no lambda; that row is never
        // used as an equation, so only the lag-0 diagonal of the tail matters.
        ShapingFilter::new(levinson_dd(&self.toeplitz_lags_dd())?.coeffs)
    }
}

/// Minimizes `P_dc + lambda P_ds` over monic filters of order `p`.
pub fn design_yule_walker(p: usize, lambda_ratio: f64) -> Result<ShapingFilter> {
    YuleWalkerSystem::new(p, lambda_ratio)?.solve()
}

/// Minimizes `sum_b weight_b * (power of |c|^2 in band b)` over monic filters
/// of order `p`. `band_edges` are the upper edges of consecutive bands starting
/// at 0; the last edge must be `pi`.
pub fn design_multiband(p: usize, band_edges: &[f64], band_weights: &[f64]) -> Result<ShapingFilter> {
    if band_edges.is_empty() || band_edges.len() != band_weights.len() {
        return Err(Error::InvalidParameter(
            "need one weight per band and at least one band".into(),
        ));
    }
    let mut lo = 0.0;
    for &e in band_edges {
        if !(e > lo && e <= PI) {
            return Err(Error::InvalidParameter(format!(
                "band edges must increase strictly within (0, pi], got {e}"
            )));
        }
        lo = e;
    }
    if (lo - PI).abs() > 1e-12 {
        return Err(Error::InvalidParameter("last band edge must be pi".into()));
    }
    if band_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
        || band_weights.iter().all(|&w| w == 0.0)
    {
        return Err(Error::InvalidParameter(
            "band weights must be finite, non-negative and not all zero".into(),
        ));
    }
    let lags: Vec<TwoFloat> = (0..=p as i64)
        .map(|m| {
            let mut lo = 0.0;
            let mut acc = TwoFloat::from(0.0);
            for (&hi, &w) in band_edges.iter().zip(band_weights) {
                acc += band_gram_dd(lo, hi, m) * w;
                lo = hi;
            }
            acc
        })
        .collect();
    ShapingFilter::new(levinson_dd(&lags)?.coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinPhaseReport {
    pub is_min_phase: bool,
    pub max_root_magnitude: f64,
    /// `(1/2pi) int log2 |c|^2 dw`, zero for monic minimum-phase filters.
    pub log_spectrum_integral: f64,
}

const ROOT_TOLERANCE: f64 = 1e-10;

/// Root magnitudes of `z^p + c_1 z^{p-1} + ... + c_p` from the companion matrix.
pub fn root_magnitudes(c: &ShapingFilter) -> Result<Vec<f64>> {
    let mut coeffs = c.coeffs().to_vec();
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
    }
    let p = coeffs.len() - 1;
    if p == 0 {
        return Ok(Vec::new());
    }
    let mut m = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        m[(0, j)] = -coeffs[j + 1];
    }
    for i in 1..p {
        m[(i, i - 1)] = 1.0;
    }
    let schur = Schur::try_new(m, 1e-14, 10_000).ok_or(Error::RootFinding { degree: p })?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.norm()).collect())
}

pub fn min_phase_check(c: &ShapingFilter) -> Result<MinPhaseReport> {
    let max_root_magnitude = root_magnitudes(c)?.into_iter().fold(0.0, f64::max);
    let log_spectrum_integral = mean_over_circle(|w| c.power_at(w).log2());
    Ok(MinPhaseReport {
        is_min_phase: max_root_magnitude < 1.0 - ROOT_TOLERANCE,
        max_root_magnitude,
        log_spectrum_integral,
    })
}

/// Reflection coefficients by the step-down recursion; all inside the unit
/// interval iff the filter is minimum phase.
pub fn reflection_coefficients(c: &ShapingFilter) -> Vec<f64> {
    let mut a = c.coeffs().to_vec();
    let mut ks = Vec::new();
    while a.len() > 1 {
        let m = a.len() - 1;
        let k = a[m];
        ks.push(k);
        if k.abs() >= 1.0 {
            break;
        }
        let den = 1.0 - k * k;
        let next: Vec<f64> = (0..m).map(|i| (a[i] - k * a[m - i]) / den).collect();
        a = next;
    }
    ks.reverse();
    ks
}

/// Ideal two-step spectrum: `1/delta` on `|w| <= pi/2`, `delta` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrickWallSpec {
    pub delta: f64,
}

impl BrickWallSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} must be positive")));
        }
        Ok(Self { delta })
    }

    /// Brick wall with `P_ds / P_dc = gamma`, i.e. `delta = sqrt(gamma - 1)`.
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter(format!("gamma {gamma} must exceed 1")));
        }
        Self::new((gamma - 1.0).sqrt())
    }

    pub fn pdc(&self) -> f64 {
        0.5 / self.delta
    }

    pub fn pds(&self) -> f64 {
        0.5 * (self.delta + 1.0 / self.delta)
    }

    pub fn gamma(&self) -> f64 {
        self.delta * self.delta + 1.0
    }

    pub fn spectrum(&self, omega: f64) -> f64 {
        if omega.abs() <= PI / 2.0 {
            1.0 / self.delta
        } else {
            self.delta
        }
    }

    /// Fourier coefficient `(1/2pi) int S(w) cos(w m) dw`.
    pub fn autocorrelation(&self, m: i64) -> f64 {
        let step = 0.5 * (1.0 / self.delta - self.delta) * sinc_half(m);
        if m == 0 {
            self.delta + step
        } else {
            step
        }
    }
}

/// Symmetric autocorrelation sequence `r_0..=r_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    pub lags: Vec<f64>,
}

impl Autocorrelation {
    pub fn spectrum(&self, omega: f64) -> f64 {
        self.lags
            .iter()
            .enumerate()
            .map(|(m, r)| if m == 0 { *r } else { 2.0 * r * (omega * m as f64).cos() })
            .sum()
    }
}

/// Order-`p` truncated Fourier series of the two-step spectrum.
pub fn truncated_fourier(target: &BrickWallSpec, p: usize) -> Autocorrelation {
    Autocorrelation {
        lags: (0..=p as i64).map(|m| target.autocorrelation(m)).collect(),
    }
}

/// `(1/2pi) int (S_target - S)^2 dw` by the midpoint rule.
pub fn spectrum_error(spectrum: impl Fn(f64) -> f64, target: &BrickWallSpec) -> f64 {
    mean_over_circle(|w| (target.spectrum(w) - spectrum(w)).powi(2))
}

pub fn approx_error_vs_brickwall(c: &ShapingFilter, target: &BrickWallSpec) -> f64 {
    spectrum_error(|w| c.power_at(w), target)
}

fn ratio(c: &ShapingFilter) -> f64 {
    pds_closed(c) / pdc_closed(c)
}

/// `lambda_ratio` at which the order-`p` Yule-Walker filter has
/// `P_ds / P_dc = gamma`. Returns infinity (the white filter) for `gamma = 2`.
pub fn find_lambda_for_ratio(gamma: f64, p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::InvalidParameter("filter order must be at least 1".into()));
    }
    let max = ratio(&design_yule_walker(p, 0.0)?);
    let out_of_range = || Error::RatioOutOfRange {
        gamma,
        p,
        min: 2.0,
        max,
    };
    if !gamma.is_finite() || gamma < 2.0 - 1e-12 || gamma > max {
        return Err(out_of_range());
    }
    if gamma <= 2.0 + 1e-12 {
        return Ok(f64::INFINITY);
    }
    if gamma == max {
        return Ok(0.0);
    }
    // The ratio falls monotonically from `max` at lambda = 0 to 2 as lambda grows.
    let at = |t: f64| design_yule_walker(p, t.exp()).map(|c| ratio(&c));
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    if at(lo)? < gamma {
        // Reached only between lambda = 0 and e^-60; resolve linearly.
        let (mut a, mut b) = (0.0, lo.exp());
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if ratio(&design_yule_walker(p, mid)?) > gamma {
                a = mid;
            } else {
                b = mid;
            }
        }
        return Ok(0.5 * (a + b));
    }
    if at(hi)? > gamma {
        return Err(out_of_range());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = at(mid)?;
        if (r / gamma - 1.0).abs() < 1e-12 {
            return Ok(mid.exp());
        }
        if r > gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::prelude::*;

    /// Independent solve of `(G + 2 lambda I) c' = -g` by Cholesky.
    fn cholesky_design(p: usize, lambda: f64) -> Vec<f64> {
        let sys = YuleWalkerSystem::new(p, lambda).unwrap();
        let a = sys.gram() + DMatrix::identity(p, p) * (2.0 * lambda);
        let g = DVector::from_vec(sys.rhs());
        let chol = a.cholesky().expect("positive definite");
        (-chol.solve(&g)).iter().copied().collect()
    }

    #[test]
    fn yule_walker_low_orders() {
        let c1 = design_yule_walker(1, 0.0).unwrap();
        assert!((c1.tail()[0] + 2.0 / PI).abs() < 1e-12);
        let c2 = design_yule_walker(2, 0.0).unwrap();
        // By hand: G = [[1, 2/pi], [2/pi, 1]], g = (2/pi, 0).
        let s = 2.0 / PI;
        let det = 1.0 - s * s;
        let hand = [-s / det, s * s / det];
        for (a, b) in c2.tail().iter().zip(hand) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((c2.tail()[0] + 1.07046).abs() < 1e-5);
        assert!((c2.tail()[1] - 0.68148).abs() < 1e-5);
    }

    #[test]
    fn yule_walker_matches_cholesky_oracle() {
        for p in [1, 3, 8, 16] {
            for lambda in [0.01, 0.1, 1.0] {
                let c = design_yule_walker(p, lambda).unwrap();
                for (a, b) in c.tail().iter().zip(cholesky_design(p, lambda)) {
                    assert!((a - b).abs() < 1e-9, "p {p} lambda {lambda}");
                }
            }
        }
    }

    #[test]
    fn heavy_lambda_gives_white_filter() {
        let c = design_yule_walker(4, 1e6).unwrap();
        assert!(c.tail().iter().all(|v| v.abs() < 1e-5));
        let w = design_yule_walker(4, f64::INFINITY).unwrap();
        assert_eq!(w.coeffs(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_orders_and_lambdas() {
        assert!(design_yule_walker(0, 0.1).is_err());
        assert!(design_yule_walker(3, -0.1).is_err());
        assert!(ShapingFilter::new(vec![0.5, 1.0]).is_err());
        assert!(ShapingFilter::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn power_examples() {
        let w = ShapingFilter::white();
        assert_eq!(pdc_closed(&w), 0.5);
        assert_eq!(pds_closed(&w), 1.0);
        let c = ShapingFilter::from_tail(&[-2.0 / PI]).unwrap();
        let k = 4.0 / (PI * PI);
        assert!((pdc_closed(&c) - 0.5 * (1.0 - k)).abs() < 1e-15);
        assert!((pds_closed(&c) - (1.0 + k)).abs() < 1e-15);
        assert!((pdc_closed(&c) - 0.29736).abs() < 1e-5);
        assert!((pds_closed(&c) - 1.40528).abs() < 1e-5);
    }

    #[test]
    fn band_power_partitions_total() {
        let c = design_yule_walker(12, 0.05).unwrap();
        let total = c.band_power(0.0, PI / 4.0)
            + c.band_power(PI / 4.0, 3.0 * PI / 4.0)
            + c.band_power(3.0 * PI / 4.0, PI);
        assert!((total - c.pds()).abs() < 1e-12);
        assert!((c.band_power(0.0, PI / 2.0) - c.pdc()).abs() < 1e-12);
        let q = mean_over_band(PI / 4.0, 3.0 * PI / 4.0, |w| c.power_at(w));
        assert!((q - c.band_power(PI / 4.0, 3.0 * PI / 4.0)).abs() < 1e-9);
    }

    #[test]
    fn min_phase_examples() {
        let a = min_phase_check(&ShapingFilter::from_tail(&[-0.5]).unwrap()).unwrap();
        assert!(a.is_min_phase);
        assert!((a.max_root_magnitude - 0.5).abs() < 1e-12);
        assert!(a.log_spectrum_integral.abs() < 1e-9);
        let b = min_phase_check(&ShapingFilter::from_tail(&[-2.0]).unwrap()).unwrap();
        assert!(!b.is_min_phase);
        assert!((b.max_root_magnitude - 2.0).abs() < 1e-12);
        let c = design_yule_walker(8, 0.1).unwrap();
        assert!(min_phase_check(&c).unwrap().is_min_phase);
        let trailing = ShapingFilter::new(vec![1.0, -0.25, 0.0, 0.0]).unwrap();
        assert_eq!(root_magnitudes(&trailing).unwrap().len(), 1);
    }

    #[test]
    fn step_down_agrees_with_levinson() {
        let lags = YuleWalkerSystem::new(10, 0.03).unwrap().toeplitz_lags();
        let lev = levinson(&lags).unwrap();
        let c = ShapingFilter::new(lev.coeffs).unwrap();
        for (a, b) in reflection_coefficients(&c).iter().zip(&lev.reflection) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn brickwall_targets() {
        let b = BrickWallSpec::new(4.0).unwrap();
        assert_eq!(b.pdc(), 0.125);
        assert_eq!(b.pds(), 2.125);
        assert_eq!(b.gamma(), 17.0);
        assert!((b.pds() - b.pdc() - 2.0).abs() < 1e-15);
        let one = BrickWallSpec::new(1.0).unwrap();
        assert_eq!(one.pds(), 1.0);
        assert_eq!(approx_error_vs_brickwall(&ShapingFilter::white(), &one), 0.0);
        let integral = mean_over_circle(|w| b.spectrum(w).log2());
        assert!(integral.abs() < 1e-12);
        let q = mean_over_circle(|w| b.spectrum(w) * (3.0 * w).cos());
        assert!((q - b.autocorrelation(3)).abs() < 1e-6);
    }

    #[test]
    fn truncated_fourier_error_has_parseval_form() {
        let b = BrickWallSpec::new(4.0).unwrap();
        let p = 16;
        let s = truncated_fourier(&b, p);
        let quad = spectrum_error(|w| s.spectrum(w), &b);
        // Parseval: the error is the energy of the discarded lags, summed to
        // lag 10^6 plus the 1/m^2 tail beyond it.
        let amp = 0.5 * (0.25f64 - 4.0);
        let mut tail: f64 = ((p as i64 + 1)..1_000_000)
            .map(|m| 2.0 * (amp * sinc_half(m)).powi(2))
            .sum();
        tail += 2.0 * (amp * 2.0 / PI).powi(2) / (2.0 * 1e6);
        assert!((quad - tail).abs() < 1e-3 * tail, "{quad} vs {tail}");
    }

    #[test]
    fn lambda_search_hits_ratio() {
        let lam = find_lambda_for_ratio(17.0, 32).unwrap();
        let c = design_yule_walker(32, lam).unwrap();
        assert!((ratio(&c) / 17.0 - 1.0).abs() < 1e-6);
        assert!((c.pdc() / 0.125 - 1.0).abs() < 0.05, "pdc {}", c.pdc());
        assert!((c.pds() / 2.125 - 1.0).abs() < 0.05, "pds {}", c.pds());
        assert_eq!(find_lambda_for_ratio(2.0, 8).unwrap(), f64::INFINITY);
        assert!(matches!(
            find_lambda_for_ratio(1.0, 8),
            Err(Error::RatioOutOfRange { .. })
        ));
        assert!(matches!(
            find_lambda_for_ratio(1e9, 2),
            Err(Error::RatioOutOfRange { .. })
        ));
    }

    #[test]
    fn multiband_special_cases() {
        let w = design_multiband(6, &[PI], &[3.0]).unwrap();
        assert!(w.tail().iter().all(|v| v.abs() < 1e-15));
        for p in [1, 5, 16] {
            let a = design_multiband(p, &[PI / 2.0, PI], &[1.0, 0.0]).unwrap();
            let b = design_yule_walker(p, 0.0).unwrap();
            for (x, y) in a.tail().iter().zip(b.tail()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert!(design_multiband(4, &[PI / 2.0], &[1.0]).is_err());
        assert!(design_multiband(4, &[PI / 2.0, PI / 4.0, PI], &[1.0, 1.0, 1.0]).is_err());
        assert!(design_multiband(4, &[PI / 2.0, PI], &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn multiband_three_bands_are_ordered() {
        let edges = [PI / 4.0, 3.0 * PI / 4.0, PI];
        let c = design_multiband(24, &edges, &[1.0 / 0.2, 1.0, 1.0 / 5.0]).unwrap();
        let lo = c.band_power(0.0, edges[0]);
        let mid = c.band_power(edges[0], edges[1]);
        let hi = c.band_power(edges[1], edges[2]);
        // Compare band-average spectral levels.
        assert!(lo / 0.25 < mid / 0.5 && mid / 0.5 < hi / 0.25);
        let q = mean_over_band(0.0, edges[0], |w| c.power_at(w));
        assert!((q - lo).abs() < 1e-9);
        assert!(min_phase_check(&c).unwrap().max_root_magnitude <= 1.0 - 1e-6);
    }

    proptest! {
        #[test]
        fn quadrature_matches_closed_forms(tail in proptest::collection::vec(-2.0f64..2.0, 0..40)) {
            let c = ShapingFilter::from_tail(&tail).unwrap();
            prop_assert!((pdc_quadrature(&c) - pdc_closed(&c)).abs() < 1e-9);
            prop_assert!((pds_quadrature(&c) - pds_closed(&c)).abs() < 1e-9);
        }

        #[test]
        fn designs_are_min_phase_and_bounded(p in 1usize..24, lambda in 0.005f64..5.0) {
            let c = design_yule_walker(p, lambda).unwrap();
            let rep = min_phase_check(&c).unwrap();
            prop_assert!(rep.max_root_magnitude <= 1.0 - 1e-6);
            prop_assert!(rep.log_spectrum_integral.abs() < 1e-6);
            prop_assert!((pdc_quadrature(&c) - c.pdc()).abs() < 1e-9);
            let gamma = ratio(&c);
            let s = (gamma - 1.0).sqrt();
            prop_assert!(c.pdc() >= 0.5 / s * (1.0 - 1e-12));
            prop_assert!(c.pds() >= 0.5 * (s + 1.0 / s) * (1.0 - 1e-12));
        }

        #[test]
        fn brickwall_identities(delta in 0.05f64..50.0) {
            let b = BrickWallSpec::new(delta).unwrap();
            prop_assert!(b.pds() >= b.pdc());
            prop_assert!(b.pds() >= 1.0 - 1e-15);
            prop_assert!((b.pds() - b.pdc() - delta / 2.0).abs() < 1e-12 * delta.max(1.0));
            prop_assert!((b.pds() / b.pdc() - b.gamma()).abs() < 1e-9 * b.gamma());
        }
    }
}
