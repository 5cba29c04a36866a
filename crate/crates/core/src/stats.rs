//! Small statistics helpers shared by the Monte Carlo test suites.
//!
//! Conventions: "within k sigma" always means the normal approximation to a
//! binomial or chi-squared reference, with the tolerance computed from the
//! theoretical distribution, never from the sample. Tolerances live here so
//! every suite pins the same arithmetic.

use serde::{Deserialize, Serialize};

/// A Monte Carlo rate estimate together with the radius of its confidence
/// interval (4 binomial sigmas by default, suitable for pass/fail gating).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    /// Half-width of the interval `rate ± radius` at the gate's sigma level.
    pub radius: f64,
}

impl RateEstimate {
    pub fn new(successes: u64, trials: u64) -> Self {
        let rate = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        RateEstimate {
            successes,
            trials,
            rate,
            radius: 4.0 * (rate * (1.0 - rate) / (trials.max(1) as f64)).sqrt(),
        }
    }
}

/// Binomial standard deviation of a rate estimate with success probability
/// `p` over `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// True when an observed success count sits within `sigmas` binomial standard
/// deviations of the expected probability `p`.
pub fn within_sigmas(successes: u64, trials: u64, p: f64, sigmas: f64) -> bool {
    let observed = successes as f64 / trials as f64;
    let sigma = binomial_sigma(p, trials);
    // A degenerate p (0 or 1) leaves no sampling noise; require exactness.
    if sigma == 0.0 {
        return observed == p;
    }
    (observed - p).abs() <= sigmas * sigma
}

/// Pearson chi-squared statistic for observed counts against expected counts.
/// Cells with expected count zero must also be observed zero.
pub fn chi_squared(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e == 0.0 {
            assert_eq!(o, 0, "observation in a zero-probability cell");
            continue;
        }
        let d = o as f64 - e;
        stat += d * d / e;
    }
    stat
}

/// Chi-squared goodness-of-fit gate: the statistic for `df` degrees of
/// freedom has mean `df` and variance `2 df`; accept while it stays within
/// `sigmas` standard deviations above the mean.
pub fn chi_squared_ok(observed: &[u64], expected: &[f64], sigmas: f64) -> bool {
    let df = expected.iter().filter(|&&e| e > 0.0).count().saturating_sub(1) as f64;
    if df <= 0.0 {
        return true;
    }
    chi_squared(observed, expected) <= df + sigmas * (2.0 * df).sqrt()
}
