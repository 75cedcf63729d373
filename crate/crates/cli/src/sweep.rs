//! `start:end:step` ranges; a bare number is a one-point sweep.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Sweep {
    pub fn single(v: f64) -> Self {
        Self {
            start: v,
            end: v,
            step: 1.0,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as u64 + 1;
        // start + k*step rather than repeated addition, so endpoints are exact
        (0..count).map(|k| self.start + k as f64 * self.step).collect()
    }

    /// Values as packet counts; every point must be a positive integer.
    pub fn counts(&self, flag: &str) -> Result<Vec<u64>, String> {
        self.values()
            .into_iter()
            .map(|v| {
                if v >= 1.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
                    Ok(v as u64)
                } else {
                    Err(format!("{flag}: {v} is not a positive integer"))
                }
            })
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a number"))
        };
        match parts.as_slice() {
            [v] => Ok(Self::single(num(v)?)),
            [a, b, c] => {
                let (start, end, step) = (num(a)?, num(b)?, num(c)?);
                if step <= 0.0 {
                    return Err(format!("sweep step must be positive, got {step}"));
                }
                if end < start {
                    return Err(format!("sweep end {end} is below its start {start}"));
                }
                Ok(Self { start, end, step })
            }
            _ => Err(format!("`{s}` is not of the form start:end:step")),
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}
