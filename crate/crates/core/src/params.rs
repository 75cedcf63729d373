//! Domain types shared by the solvers.

use serde::Serialize;

use crate::error::{param_err, Result};

/// Arrival and service rates of the playout buffer together with the
/// embedded-chain step probabilities.
///
/// `p` is the probability that the next event of a busy buffer is an
/// arrival, `q = 1 - p` that it is a departure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueParams {
    lambda: f64,
    mu: f64,
    rho: f64,
    p: f64,
    q: f64,
}

impl QueueParams {
    /// Builds from arrival rate `lambda` and service rate `mu` (packets/s).
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return param_err(format!("arrival rate lambda = {lambda} must be positive"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return param_err(format!("service rate mu = {mu} must be positive"));
        }
        let p = lambda / (lambda + mu);
        Ok(Self {
            lambda,
            mu,
            rho: lambda / mu,
            p,
            q: 1.0 - p,
        })
    }

    /// Traffic intensity only, with the service rate normalised to one.
    pub fn from_rho(rho: f64) -> Result<Self> {
        Self::new(rho, 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// ON/OFF modulation of the arrival process: `alpha` is the ON->OFF rate,
/// `beta` the OFF->ON rate. Arrivals only happen while ON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IppParams {
    pub alpha: f64,
    pub beta: f64,
}

impl IppParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return param_err(format!(
                "ON/OFF rates must be positive (alpha = {alpha}, beta = {beta})"
            ));
        }
        Ok(Self { alpha, beta })
    }
}

/// Slotted playback: one packet is served at the start of every slot of
/// `d` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotParams {
    pub d: f64,
}

impl SlotParams {
    pub fn new(d: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return param_err(format!("slot duration d = {d} must be positive"));
        }
        Ok(Self { d })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ArrivalModel {
    Poisson,
    Ipp(IppParams),
    Slotted(SlotParams),
}

/// File size, prefetch threshold and arrival model of one streaming session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioSpec {
    file_size: u64,
    threshold: u64,
    arrival: ArrivalModel,
}

impl ScenarioSpec {
    pub fn new(file_size: u64, threshold: u64, arrival: ArrivalModel) -> Result<Self> {
        if file_size < 1 {
            return param_err("file size N must be at least 1");
        }
        if threshold < 1 || threshold > file_size {
            return param_err(format!(
                "threshold x1 = {threshold} must lie in 1..=N (N = {file_size})"
            ));
        }
        Ok(Self {
            file_size,
            threshold,
            arrival,
        })
    }

    pub fn poisson(file_size: u64, threshold: u64) -> Result<Self> {
        Self::new(file_size, threshold, ArrivalModel::Poisson)
    }

    pub fn file_size(&self) -> u64 {
        self.file_size
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn arrival(&self) -> ArrivalModel {
        self.arrival
    }

    /// Upper bound `floor(N / x1)` on the number of starvations.
    pub fn max_starvations(&self) -> u64 {
        self.file_size / self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    BallotExact,
    BallotGaussian,
    Recursive,
    Takacs,
    Ipp,
}

/// Probability mass function over the number of starvations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarvationDistribution {
    pmf: Vec<f64>,
    max_starvations: u64,
    method: Method,
}

impl StarvationDistribution {
    pub(crate) fn new(mut pmf: Vec<f64>, max_starvations: u64, method: Method) -> Self {
        // Rounding in `1 - sum` can leave values a few ulps outside [0, 1].
        for v in pmf.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Self {
            pmf,
            max_starvations,
            method,
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of exactly `j` starvations; zero beyond the computed range.
    pub fn get(&self, j: usize) -> f64 {
        self.pmf.get(j).copied().unwrap_or(0.0)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn max_starvations(&self) -> u64 {
        self.max_starvations
    }

    /// True when every count up to `floor(N/x1)` has been computed.
    pub fn is_complete(&self) -> bool {
        self.pmf.len() as u64 > self.max_starvations
    }

    pub fn total(&self) -> f64 {
        crate::numeric::compensated_sum(self.pmf.iter().copied())
    }

    /// Probability generating function `G(z) = sum_j P(j) z^j`.
    pub fn pgf(&self, z: f64) -> f64 {
        // Horner from the highest power.
        self.pmf.iter().rev().fold(0.0, |acc, &pj| acc * z + pj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_probabilities_sum_to_one() {
        for &(l, m) in &[(0.95, 1.0), (1.1, 1.0), (20.0, 25.0), (1e-6, 3.0)] {
            let qp = QueueParams::new(l, m).unwrap();
            assert_eq!(qp.p() + qp.q(), 1.0);
            assert!((qp.rho() - l / m).abs() < 1e-15);
            assert!((qp.p() - qp.rho() / (1.0 + qp.rho())).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_rates() {
        assert!(QueueParams::new(0.0, 1.0).is_err());
        assert!(QueueParams::new(1.0, -1.0).is_err());
        assert!(QueueParams::new(f64::NAN, 1.0).is_err());
        assert!(IppParams::new(0.0, 0.2).is_err());
        assert!(SlotParams::new(0.0).is_err());
    }

    #[test]
    fn scenario_bounds() {
        assert!(ScenarioSpec::poisson(10, 11).is_err());
        assert!(ScenarioSpec::poisson(10, 0).is_err());
        let s = ScenarioSpec::poisson(200, 20).unwrap();
        assert_eq!(s.max_starvations(), 10);
        assert_eq!(ScenarioSpec::poisson(59, 20).unwrap().max_starvations(), 2);
    }

    #[test]
    fn pgf_endpoints() {
        let d = StarvationDistribution::new(vec![0.5, 0.3, 0.2], 2, Method::BallotExact);
        assert_eq!(d.pgf(0.0), 0.5);
        assert!((d.pgf(1.0) - 1.0).abs() < 1e-15);
        assert!((d.pgf(0.5) - (0.5 + 0.15 + 0.05)).abs() < 1e-15);
        assert_eq!(d.get(7), 0.0);
    }
}
