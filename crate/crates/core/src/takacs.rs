//! Slotted playback with Poisson arrivals (discrete-time M/D/1).
//!
//! Exactly one packet is served at the start of every slot of `d` seconds
//! while playback runs. By the Takacs Ballot theorem, the buffer started with
//! `x1` packets is first found empty after the `l`-th departure with
//! probability `(x1/l) * Poisson(l - x1; lambda*l*d)`. Starvation counts are
//! then assembled exactly as in the M/M/1 case.

use serde::Serialize;

use crate::error::{param_err, Result};
use crate::numeric::{log_poisson_pmf, KahanSum, LogProb};
use crate::params::{ArrivalModel, Method, ScenarioSpec, SlotParams, StarvationDistribution};
use crate::toeplitz::StarvationEvents;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlottedScenario {
    lambda: f64,
    slot: SlotParams,
    file_size: u64,
    threshold: u64,
}

impl SlottedScenario {
    pub fn new(lambda: f64, d: f64, file_size: u64, threshold: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return param_err(format!("arrival rate lambda = {lambda} must be positive"));
        }
        let slot = SlotParams::new(d)?;
        ScenarioSpec::new(file_size, threshold, ArrivalModel::Slotted(slot))?;
        Ok(Self {
            lambda,
            slot,
            file_size,
            threshold,
        })
    }

    /// Per-slot load `lambda * d`, with the slot normalised to one second.
    pub fn from_load(load: f64, file_size: u64, threshold: u64) -> Result<Self> {
        Self::new(load, 1.0, file_size, threshold)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn d(&self) -> f64 {
        self.slot.d
    }

    /// Mean number of arrivals per slot.
    pub fn load(&self) -> f64 {
        self.lambda * self.slot.d
    }

    pub fn file_size(&self) -> u64 {
        self.file_size
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn spec(&self) -> ScenarioSpec {
        ScenarioSpec::new(self.file_size, self.threshold, ArrivalModel::Slotted(self.slot))
            .expect("validated at construction")
    }
}

fn first_passage(load: f64, x1: u64, l: u64) -> f64 {
    if l < x1 || x1 == 0 {
        return 0.0;
    }
    let ballot = LogProb::from_prob(x1 as f64 / l as f64);
    let arrivals = log_poisson_pmf(l - x1, load * l as f64).expect("load is positive");
    (ballot * arrivals).prob()
}

/// Probability that the first starvation is revealed by the departure of
/// packet `l`. Zero outside `x1..=N-1`.
pub fn takacs_first_starvation(scn: &SlottedScenario, l: u64) -> f64 {
    if l >= scn.file_size {
        return 0.0;
    }
    first_passage(scn.load(), scn.threshold, l)
}

pub fn takacs_starvation_probability(scn: &SlottedScenario) -> f64 {
    let sum: KahanSum = (scn.threshold..scn.file_size)
        .map(|l| takacs_first_starvation(scn, l))
        .collect();
    sum.value().clamp(0.0, 1.0)
}

/// Distribution of the number of starvations, `j = 0..=j_max`.
pub fn takacs_pmf(scn: &SlottedScenario, j_max: u64) -> Result<StarvationDistribution> {
    let max = scn.file_size / scn.threshold;
    if j_max > max {
        return param_err(format!("j_max = {j_max} exceeds floor(N/x1) = {max}"));
    }
    let (n, x1) = (scn.file_size, scn.threshold);
    let generator = (0..n).map(|l| first_passage(scn.load(), x1, l)).collect();
    let events = StarvationEvents::new(n as usize, x1 as usize, generator);
    Ok(StarvationDistribution::new(
        events.pmf(j_max as usize),
        max,
        Method::Takacs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_starvation_edges() {
        let s = SlottedScenario::new(0.45, 2.0, 100, 10).unwrap();
        assert_eq!(takacs_first_starvation(&s, 9), 0.0);
        assert_eq!(takacs_first_starvation(&s, 100), 0.0);
        let want = (-0.9f64 * 10.0).exp();
        assert!((takacs_first_starvation(&s, 10) - want).abs() < 1e-17);
    }

    #[test]
    fn probability_edges() {
        let s = SlottedScenario::from_load(0.9, 30, 30).unwrap();
        assert_eq!(takacs_starvation_probability(&s), 0.0);
        let s = SlottedScenario::from_load(1e-12, 30, 3).unwrap();
        assert!((takacs_starvation_probability(&s) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn first_starvation_terms_sum_to_probability() {
        let s = SlottedScenario::from_load(1.1, 500, 20).unwrap();
        let direct: f64 = (0..=600).map(|l| takacs_first_starvation(&s, l)).sum();
        assert!((direct - takacs_starvation_probability(&s)).abs() < 1e-13);
    }

    #[test]
    fn pmf_consistency() {
        let s = SlottedScenario::from_load(0.9, 12, 12).unwrap();
        assert_eq!(takacs_pmf(&s, 1).unwrap().pmf(), &[1.0, 0.0]);
        for &load in &[0.6, 0.9, 1.1, 1.6] {
            for n in [7u64, 20, 45, 60] {
                for x1 in [1u64, 2, 5] {
                    let s = SlottedScenario::from_load(load, n, x1).unwrap();
                    let d = takacs_pmf(&s, n / x1).unwrap();
                    assert!((d.total() - 1.0).abs() < 1e-6, "load {load} n {n} x1 {x1}");
                    let p0 = 1.0 - takacs_starvation_probability(&s);
                    assert!((d.get(0) - p0).abs() < 1e-14);
                }
            }
        }
        assert!(takacs_pmf(&SlottedScenario::from_load(1.0, 20, 5).unwrap(), 5).is_err());
    }

    #[test]
    fn slotted_and_exponential_service_are_close_for_long_files() {
        // heuristic only: same load, different service variability
        use crate::ballot::starvation_probability;
        for &rho in &[1.2, 1.5] {
            let s = SlottedScenario::from_load(rho, 600, 20).unwrap();
            let slotted = 1.0 - takacs_starvation_probability(&s);
            let qp = crate::params::QueueParams::from_rho(rho).unwrap();
            let mm1 = 1.0 - starvation_probability(&qp, &ScenarioSpec::poisson(600, 20).unwrap()).unwrap();
            assert!(slotted >= mm1, "deterministic service starves less");
            assert!((slotted - mm1) / slotted < 0.1 || slotted > 0.99);
        }
    }
}
