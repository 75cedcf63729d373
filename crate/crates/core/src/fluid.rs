//! File-level fluid approximation.
//!
//! Packets arrive at constant rate `lambda` and play out at rate `mu`. Playback
//! starts after `x1` packets, at time `x1/lambda`, and the buffer then drains
//! at `mu - lambda`, so a file starves iff it is longer than
//! `N_p = x1 * mu / (mu - lambda)` packets. With a random file size the
//! starvation probability is the tail `P(N > N_p)`.

use serde::Serialize;

use crate::error::{domain_err, param_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FileSizeDistribution {
    Exponential {
        theta: f64,
    },
    /// Minimum size `n_m` packets and tail exponent `upsilon`.
    Pareto {
        n_m: f64,
        upsilon: f64,
    },
    /// `ln N` is normal with mean `varrho` and standard deviation `sigma`.
    LogNormal {
        varrho: f64,
        sigma: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        param_err(format!("{name} = {v} must be positive and finite"))
    }
}

impl FileSizeDistribution {
    pub fn exponential(theta: f64) -> Result<Self> {
        positive("theta", theta)?;
        Ok(Self::Exponential { theta })
    }

    /// Finite mean requires `upsilon > 1`.
    pub fn pareto(n_m: f64, upsilon: f64) -> Result<Self> {
        if !(n_m >= 1.0 && n_m.is_finite()) {
            return param_err(format!("Pareto minimum n_m = {n_m} must be at least 1"));
        }
        if !(upsilon > 1.0 && upsilon.is_finite()) {
            return param_err(format!("Pareto exponent upsilon = {upsilon} must exceed 1"));
        }
        Ok(Self::Pareto { n_m, upsilon })
    }

    pub fn log_normal(varrho: f64, sigma: f64) -> Result<Self> {
        if !varrho.is_finite() {
            return param_err(format!("log-normal location varrho = {varrho} must be finite"));
        }
        positive("sigma", sigma)?;
        Ok(Self::LogNormal { varrho, sigma })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Exponential { theta } => 1.0 / theta,
            Self::Pareto { n_m, upsilon } => upsilon * n_m / (upsilon - 1.0),
            Self::LogNormal { varrho, sigma } => (varrho + sigma * sigma / 2.0).exp(),
        }
    }

    /// `P(N > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 0.0;
        }
        match *self {
            Self::Exponential { theta } => (-theta * x.max(0.0)).exp(),
            Self::Pareto { n_m, upsilon } => {
                if x <= n_m {
                    1.0
                } else {
                    (n_m / x).powf(upsilon)
                }
            }
            Self::LogNormal { varrho, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.5 * libm::erfc((x.ln() - varrho) / (std::f64::consts::SQRT_2 * sigma))
                }
            }
        }
    }
}

/// Which parameter of a family is held fixed when matching a target mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MeanMatch {
    Exponential,
    ParetoMinimum(f64),
    ParetoExponent(f64),
    LogNormalLocation(f64),
    LogNormalScale(f64),
}

/// The member of a family with mean `target_mean`, solving for the free
/// parameter.
pub fn match_means(target_mean: f64, family: MeanMatch) -> Result<FileSizeDistribution> {
    positive("target mean", target_mean)?;
    match family {
        MeanMatch::Exponential => FileSizeDistribution::exponential(1.0 / target_mean),
        MeanMatch::ParetoMinimum(n_m) => {
            if n_m >= target_mean {
                return param_err(format!("Pareto minimum {n_m} must be below the mean {target_mean}"));
            }
            FileSizeDistribution::pareto(n_m, target_mean / (target_mean - n_m))
        }
        MeanMatch::ParetoExponent(upsilon) => {
            if !(upsilon > 1.0) {
                return param_err(format!("Pareto exponent upsilon = {upsilon} must exceed 1"));
            }
            FileSizeDistribution::pareto(target_mean * (upsilon - 1.0) / upsilon, upsilon)
        }
        MeanMatch::LogNormalLocation(varrho) => {
            let gap = target_mean.ln() - varrho;
            if !(gap > 0.0) {
                return param_err(format!("log-normal location {varrho} must be below ln(mean)"));
            }
            FileSizeDistribution::log_normal(varrho, (2.0 * gap).sqrt())
        }
        MeanMatch::LogNormalScale(sigma) => {
            positive("sigma", sigma)?;
            FileSizeDistribution::log_normal(target_mean.ln() - sigma * sigma / 2.0, sigma)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluidScenario {
    lambda: f64,
    mu: f64,
    x1: f64,
}

impl FluidScenario {
    /// `lambda = 0` is allowed (the buffer only drains).
    pub fn new(lambda: f64, mu: f64, x1: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return param_err(format!("arrival rate lambda = {lambda} must be non-negative"));
        }
        positive("service rate mu", mu)?;
        positive("threshold x1", x1)?;
        Ok(Self { lambda, mu, x1 })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    /// Start-up delay `x1 / lambda`.
    pub fn startup_delay(&self) -> f64 {
        self.x1 / self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    /// Files up to this many packets play without starvation.
    Finite(f64),
    /// Arrivals keep pace with playback; no file starves.
    Never,
}

impl Horizon {
    pub fn packets(&self) -> f64 {
        match *self {
            Horizon::Finite(n) => n,
            Horizon::Never => f64::INFINITY,
        }
    }
}

/// `N_p = x1 * mu / (mu - lambda)`.
pub fn no_starvation_horizon(scn: &FluidScenario) -> Result<Horizon> {
    if scn.mu < scn.lambda {
        return domain_err(format!(
            "fluid model needs mu >= lambda (mu = {}, lambda = {})",
            scn.mu, scn.lambda
        ));
    }
    if scn.mu == scn.lambda {
        return Ok(Horizon::Never);
    }
    Ok(Horizon::Finite(scn.x1 * scn.mu / (scn.mu - scn.lambda)))
}

pub fn fluid_starvation_probability(scn: &FluidScenario, dist: &FileSizeDistribution) -> Result<f64> {
    Ok(dist.tail(no_starvation_horizon(scn)?.packets()))
}

/// Tail of an observed sample of file sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTail {
    sorted: Vec<f64>,
}

impl EmpiricalTail {
    pub fn new(mut sizes: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() {
            return param_err("empirical tail needs at least one file size");
        }
        if let Some(bad) = sizes.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return param_err(format!("file size {bad} must be positive"));
        }
        sizes.sort_by(f64::total_cmp);
        Ok(Self { sorted: sizes })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn mean(&self) -> f64 {
        crate::numeric::compensated_sum(self.sorted.iter().copied()) / self.sorted.len() as f64
    }

    /// Fraction of samples strictly greater than `x`.
    pub fn tail(&self, x: f64) -> f64 {
        let at_most = self.sorted.partition_point(|&s| s <= x);
        (self.sorted.len() - at_most) as f64 / self.sorted.len() as f64
    }

    pub fn starvation_probability(&self, scn: &FluidScenario) -> Result<f64> {
        Ok(self.tail(no_starvation_horizon(scn)?.packets()))
    }
}
