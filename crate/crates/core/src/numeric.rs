//! Log-domain probability helpers shared by every solver.
//!
//! Binomial and Poisson terms for files of thousands of packets span hundreds
//! of orders of magnitude, so they are formed as logarithms and only
//! exponentiated when accumulated.

use std::ops::Mul;

use serde::Serialize;

use crate::error::{param_err, Result};

/// A probability stored as its natural logarithm.
///
/// Zero is the exact sentinel `-inf`, never a large negative float.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a log-probability. Values above zero are clamped to zero.
    pub fn from_ln(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        LogProb(value.min(0.0))
    }

    pub fn from_prob(p: f64) -> Self {
        if p <= 0.0 {
            Self::ZERO
        } else {
            LogProb(p.ln().min(0.0))
        }
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.0.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl Mul for LogProb {
    type Output = LogProb;

    fn mul(self, rhs: LogProb) -> LogProb {
        if self.is_zero() || rhs.is_zero() {
            LogProb::ZERO
        } else {
            LogProb::from_ln(self.0 + rhs.0)
        }
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// `ln C(n, k)`; the caller guarantees `k <= n`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        0.0
    } else {
        ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return param_err(format!("probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// `ln[C(n,k) p^k (1-p)^(n-k)]`.
pub fn log_binomial_pmf(n: u64, k: u64, p: f64) -> Result<LogProb> {
    if k > n {
        return param_err(format!("binomial count k = {k} exceeds n = {n}"));
    }
    check_probability(p)?;
    let q = 1.0 - p;
    if p == 0.0 {
        return Ok(if k == 0 { LogProb::ONE } else { LogProb::ZERO });
    }
    if q == 0.0 {
        return Ok(if k == n { LogProb::ONE } else { LogProb::ZERO });
    }
    let value = ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * q.ln();
    Ok(LogProb::from_ln(value))
}

/// Log of the Poisson probability `m^k e^{-m} / k!`.
pub fn log_poisson_pmf(k: u64, mean: f64) -> Result<LogProb> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return param_err(format!("Poisson mean {mean} must be finite and >= 0"));
    }
    if mean == 0.0 {
        return Ok(if k == 0 { LogProb::ONE } else { LogProb::ZERO });
    }
    Ok(LogProb::from_ln(k as f64 * mean.ln() - mean - ln_factorial(k)))
}

pub fn poisson_pmf(k: u64, mean: f64) -> Result<f64> {
    log_poisson_pmf(k, mean).map(LogProb::prob)
}
