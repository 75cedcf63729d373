//! Explicit starvation analysis of the M/M/1 playout buffer.
//!
//! While the buffer is non-empty and packets are still arriving, every event
//! is an arrival with probability `p` or a departure with probability `q`.
//! By the Ballot theorem, the buffer started with `x1` packets first empties
//! at departure `k` with probability
//!
//! ```text
//! x1 / (2k - x1) * C(2k - x1, k - x1) * p^(k - x1) * q^k
//! ```
//!
//! Summing over `k = x1..N-1` gives the starvation probability; chaining the
//! same first-passage law between consecutive starvations gives the full
//! distribution of the number of starvations.

use serde::Serialize;

use crate::error::{domain_err, param_err, Result};
use crate::numeric::{ln_choose, log_binomial_pmf, KahanSum, LogProb};
use crate::params::{ArrivalModel, Method, QueueParams, ScenarioSpec, StarvationDistribution};
use crate::toeplitz::{BandedToeplitzMatrix, StarvationEvents};

/// Which evaluation of the binomial terms to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exact,
    /// Normal-density substitution wherever the validity guard holds.
    Gaussian,
}

impl Mode {
    /// Exact up to 2000 packets, Gaussian above.
    pub fn default_for(file_size: u64) -> Self {
        if file_size <= 2000 {
            Mode::Exact
        } else {
            Mode::Gaussian
        }
    }
}

fn require_poisson(spec: &ScenarioSpec) -> Result<()> {
    match spec.arrival() {
        ArrivalModel::Poisson => Ok(()),
        other => param_err(format!("Ballot solver needs Poisson arrivals, got {other:?}")),
    }
}

/// Log of the binomial path term `C(2k-x1, k-x1) p^(k-x1) q^k`.
fn log_path_term(params: &QueueParams, k: u64, x1: u64) -> LogProb {
    log_binomial_pmf(2 * k - x1, k - x1, params.p()).expect("k >= x1 and p in (0,1)")
}

fn ballot_factor(k: u64, x1: u64) -> f64 {
    x1 as f64 / (2 * k - x1) as f64
}

/// First-passage probability: starting from `x1` buffered packets, the
/// buffer first empties at departure `k`. Zero for `k < x1`.
pub fn first_passage(params: &QueueParams, k: u64, x1: u64) -> f64 {
    if k < x1 || x1 == 0 {
        return 0.0;
    }
    (LogProb::from_prob(ballot_factor(k, x1)) * log_path_term(params, k, x1)).prob()
}

/// Normal approximation of one binomial path term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianTerm {
    /// Approximate (or, on fallback, exact) value of `C(n, k-x1) p^(k-x1) q^k`
    /// with `n = 2k - x1`.
    pub value: f64,
    /// True when the validity guard failed and the exact term was used.
    pub exact_fallback: bool,
    /// Berry-Esseen bound `0.7655 (p^2 + q^2) / sqrt(n p q)` on the CDF error.
    pub berry_esseen_bound: f64,
}

/// Whether the normal approximation of a binomial with `n` trials is
/// considered accurate.
pub fn gaussian_guard(n: u64, p: f64) -> bool {
    let q = 1.0 - p;
    let nf = n as f64;
    let counts_ok = nf * p > 5.0 && nf * q > 5.0;
    let skew_ok = ((q / p).sqrt() - (p / q).sqrt()).abs() / nf.sqrt() < 0.3;
    n > 0 && (counts_ok || skew_ok)
}

pub fn berry_esseen_bound(n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    0.7655 * (p * p + q * q) / (n as f64 * p * q).sqrt()
}

pub fn gaussian_term(params: &QueueParams, k: u64, x1: u64) -> GaussianTerm {
    debug_assert!(k >= x1);
    let (p, q) = (params.p(), params.q());
    let n = 2 * k - x1;
    let bound = berry_esseen_bound(n, p);
    if !gaussian_guard(n, p) {
        return GaussianTerm {
            value: log_path_term(params, k, x1).prob(),
            exact_fallback: true,
            berry_esseen_bound: bound,
        };
    }
    let nf = n as f64;
    let var = nf * p * q;
    let dev = (k - x1) as f64 - nf * p;
    GaussianTerm {
        value: (-dev * dev / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt(),
        exact_fallback: false,
        berry_esseen_bound: bound,
    }
}

/// First-passage generator `g[d]` for `d in 0..n`.
fn generator(params: &QueueParams, n: u64, x1: u64, mode: Mode) -> Vec<f64> {
    (0..n)
        .map(|d| {
            if d < x1 {
                0.0
            } else {
                match mode {
                    Mode::Exact => first_passage(params, d, x1),
                    Mode::Gaussian => ballot_factor(d, x1) * gaussian_term(params, d, x1).value,
                }
            }
        })
        .collect()
}

fn events(params: &QueueParams, spec: &ScenarioSpec, mode: Mode) -> Result<StarvationEvents> {
    require_poisson(spec)?;
    let (n, x1) = (spec.file_size(), spec.threshold());
    Ok(StarvationEvents::new(
        n as usize,
        x1 as usize,
        generator(params, n, x1, mode),
    ))
}

/// Probability of at least one starvation.
pub fn starvation_probability(params: &QueueParams, spec: &ScenarioSpec) -> Result<f64> {
    require_poisson(spec)?;
    let (n, x1) = (spec.file_size(), spec.threshold());
    // ascending k; terms decay geometrically away from rho = 1
    let sum: KahanSum = (x1..n).map(|k| first_passage(params, k, x1)).collect();
    Ok(sum.value().clamp(0.0, 1.0))
}

/// `P_E(k1)` for `k1 = 0..=N`; entry 0 is unused.
pub fn first_starvation_vector(params: &QueueParams, spec: &ScenarioSpec) -> Result<Vec<f64>> {
    Ok(events(params, spec, Mode::Exact)?.first_vector())
}

/// `P_U_j(k_j)` for `k_j = 0..=N`; entry 0 is unused.
pub fn last_starvation_vector(params: &QueueParams, spec: &ScenarioSpec, j: u64) -> Result<Vec<f64>> {
    if j < 1 || j > spec.max_starvations() {
        return param_err(format!(
            "starvation index j = {j} outside 1..={}",
            spec.max_starvations()
        ));
    }
    Ok(events(params, spec, Mode::Exact)?.last_vector(j as usize))
}

/// `P_S_l(k_l, k_{l+1})` for a path with `j` starvations.
pub fn inter_starvation_matrix(
    params: &QueueParams,
    spec: &ScenarioSpec,
    j: u64,
    l: u64,
) -> Result<BandedToeplitzMatrix> {
    if j > spec.max_starvations() {
        return param_err(format!("j = {j} exceeds floor(N/x1) = {}", spec.max_starvations()));
    }
    events(params, spec, Mode::Exact)?.inter_matrix(j as usize, l as usize)
}

fn check_j_max(spec: &ScenarioSpec, j_max: u64) -> Result<()> {
    if j_max > spec.max_starvations() {
        return param_err(format!(
            "j_max = {j_max} exceeds floor(N/x1) = {}",
            spec.max_starvations()
        ));
    }
    Ok(())
}

/// Distribution of the number of starvations, `j = 0..=j_max`.
pub fn starvation_pmf(
    params: &QueueParams,
    spec: &ScenarioSpec,
    j_max: u64,
    mode: Mode,
) -> Result<StarvationDistribution> {
    check_j_max(spec, j_max)?;
    let ev = events(params, spec, mode)?;
    let method = match mode {
        Mode::Exact => Method::BallotExact,
        Mode::Gaussian => Method::BallotGaussian,
    };
    Ok(StarvationDistribution::new(
        ev.pmf(j_max as usize),
        spec.max_starvations(),
        method,
    ))
}

/// Full distribution up to `floor(N/x1)`.
pub fn full_starvation_pmf(params: &QueueParams, spec: &ScenarioSpec, mode: Mode) -> Result<StarvationDistribution> {
    starvation_pmf(params, spec, spec.max_starvations(), mode)
}

/// `P(j)` through the explicit matrix chain `P_E (prod P_S_l) P_U_j^T`,
/// multiplying the banded matrices directly. Slower than
/// [`starvation_pmf`] when many `j` are needed, but follows the event
/// decomposition literally.
pub fn starvation_count_probability(params: &QueueParams, spec: &ScenarioSpec, j: u64) -> Result<f64> {
    check_j_max(spec, j)?;
    events(params, spec, Mode::Exact)?
        .pmf_entry_by_products(j as usize)
        .map(|v| v.clamp(0.0, 1.0))
}

/// Sum over the Gaussian-substituted terms of `P_s` of the Berry-Esseen
/// bound, each weighted by its Ballot factor `x1 / (2k - x1)`.
pub fn gaussian_error_budget(params: &QueueParams, spec: &ScenarioSpec) -> Result<f64> {
    require_poisson(spec)?;
    let (n, x1) = (spec.file_size(), spec.threshold());
    let sum: KahanSum = (x1..n)
        .map(|k| {
            let t = gaussian_term(params, k, x1);
            if t.exact_fallback {
                0.0
            } else {
                ballot_factor(k, x1) * t.berry_esseen_bound
            }
        })
        .collect();
    Ok(sum.value())
}

/// Limit of the starvation probability as the file size grows without bound.
pub fn asymptotic_starvation_probability(params: &QueueParams, x1: u64) -> f64 {
    if params.rho() <= 1.0 {
        return 1.0;
    }
    let (p, q) = (params.p(), params.q());
    (x1 as f64 * (1.0 - 2.0 * p) / (2.0 * p * q)).exp()
}

/// Mean time between consecutive starvations of an endless stream with
/// `rho < 1`: refilling `x1` packets plus the busy period they start.
pub fn mean_starvation_interval(params: &QueueParams, x1: u64) -> Result<f64> {
    if params.rho() >= 1.0 {
        return domain_err(format!(
            "mean starvation interval is undefined for rho = {} >= 1",
            params.rho()
        ));
    }
    Ok(x1 as f64 / (params.lambda() * (1.0 - params.rho())))
}

/// `ln C(2k - x1, k - x1)`, exposed for the symmetry check against the
/// `C(2k - x1, k)` form.
pub fn ln_path_count(k: u64, x1: u64) -> f64 {
    ln_choose(2 * k - x1, k - x1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(rho: f64) -> QueueParams {
        QueueParams::from_rho(rho).unwrap()
    }

    #[test]
    fn whole_file_prefetched_never_starves() {
        let spec = ScenarioSpec::poisson(25, 25).unwrap();
        assert_eq!(starvation_probability(&qp(0.7), &spec).unwrap(), 0.0);
        let d = starvation_pmf(&qp(0.7), &spec, 1, Mode::Exact).unwrap();
        assert_eq!(d.pmf(), &[1.0, 0.0]);
    }

    #[test]
    fn two_packets_single_race() {
        for rho in [0.3, 1.0, 2.5] {
            let p = qp(rho);
            let spec = ScenarioSpec::poisson(2, 1).unwrap();
            let ps = starvation_probability(&p, &spec).unwrap();
            assert!((ps - 1.0 / (1.0 + rho)).abs() < 1e-15);
        }
    }

    #[test]
    fn first_vector_zero_branches_and_sum() {
        let p = qp(1.1);
        let spec = ScenarioSpec::poisson(100, 20).unwrap();
        let v = first_starvation_vector(&p, &spec).unwrap();
        assert_eq!(v.len(), 101);
        assert_eq!(v[19], 0.0);
        assert_eq!(v[100], 0.0);
        let total: f64 = v.iter().sum();
        let ps = starvation_probability(&p, &spec).unwrap();
        assert!((total - ps).abs() < 1e-14);
    }

    #[test]
    fn last_vector_branches() {
        let p = qp(0.9);
        let spec = ScenarioSpec::poisson(60, 5).unwrap();
        let u = last_starvation_vector(&p, &spec, 3).unwrap();
        assert_eq!(u[14], 0.0);
        assert_eq!(u[60], 0.0);
        assert!(u[55..60].iter().all(|&v| v == 1.0));
        for (k, &uk) in u.iter().enumerate().take(55).skip(15) {
            let rest = ScenarioSpec::poisson(60 - k as u64, 5).unwrap();
            let want = 1.0 - starvation_probability(&p, &rest).unwrap();
            assert!((uk - want).abs() < 1e-14, "k = {k}");
        }
        assert!(last_starvation_vector(&p, &spec, 13).is_err());
    }

    #[test]
    fn immediate_restarvation_is_q_to_the_x1() {
        let p = qp(1.3);
        let spec = ScenarioSpec::poisson(40, 4).unwrap();
        let m = inter_starvation_matrix(&p, &spec, 3, 1).unwrap();
        assert!((m.get(4, 8) - p.q().powi(4)).abs() < 1e-15);
        assert_eq!(m.get(4, 7), 0.0);
        assert!(inter_starvation_matrix(&p, &spec, 3, 3).is_err());
    }

    #[test]
    fn binomial_forms_are_symmetric() {
        for x1 in 1..10u64 {
            for k in x1..200 {
                let a = ln_path_count(k, x1);
                let b = ln_choose(2 * k - x1, k);
                assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn gaussian_term_accuracy_and_guard() {
        let p = qp(1.0);
        let t = gaussian_term(&p, 100, 20);
        assert!(!t.exact_fallback);
        let exact = log_binomial_pmf(180, 80, 0.5).unwrap().prob();
        assert!(((t.value - exact) / exact).abs() < 0.01);
        assert!((t.berry_esseen_bound - 0.7655 * 0.5 / 45f64.sqrt()).abs() < 1e-15);

        // p = 0.95 with three events: neither guard condition holds
        let skewed = QueueParams::new(19.0, 1.0).unwrap();
        let t = gaussian_term(&skewed, 3, 3);
        assert!(t.exact_fallback);
        assert!((t.value - skewed.q().powi(3)).abs() < 1e-15);
    }

    #[test]
    fn asymptote_branches() {
        assert_eq!(asymptotic_starvation_probability(&qp(0.95), 20), 1.0);
        assert_eq!(asymptotic_starvation_probability(&qp(1.0), 20), 1.0);
        let p = qp(2.0);
        let want = (10.0 * (1.0 - 2.0 * p.p()) / (2.0 * p.p() * p.q())).exp();
        assert_eq!(asymptotic_starvation_probability(&p, 10), want);
    }

    #[test]
    fn mean_interval() {
        let p = QueueParams::new(0.95, 1.0).unwrap();
        let t = mean_starvation_interval(&p, 20).unwrap();
        assert!((t - 20.0 / (0.95 * 0.05)).abs() < 1e-9);
        assert!((mean_starvation_interval(&p, 40).unwrap() - 2.0 * t).abs() < 1e-9);
        assert!(mean_starvation_interval(&qp(1.0), 20).is_err());
        assert!(mean_starvation_interval(&qp(0.999_999), 20).unwrap() > 1e6);
    }

    #[test]
    fn rejects_non_poisson_and_large_j() {
        let p = qp(1.0);
        let spec = ScenarioSpec::new(
            50,
            5,
            ArrivalModel::Slotted(crate::params::SlotParams::new(1.0).unwrap()),
        )
        .unwrap();
        assert!(starvation_probability(&p, &spec).is_err());
        let spec = ScenarioSpec::poisson(50, 5).unwrap();
        assert!(starvation_pmf(&p, &spec, 11, Mode::Exact).is_err());
    }

    #[test]
    fn product_route_matches_chain() {
        for &(n, x1, rho) in &[(60u64, 5u64, 0.8), (45, 3, 1.25), (30, 1, 1.0)] {
            let p = qp(rho);
            let spec = ScenarioSpec::poisson(n, x1).unwrap();
            let d = full_starvation_pmf(&p, &spec, Mode::Exact).unwrap();
            for j in 0..=spec.max_starvations().min(8) {
                let lit = starvation_count_probability(&p, &spec, j).unwrap();
                assert!((lit - d.get(j as usize)).abs() < 1e-13, "n={n} x1={x1} j={j}");
            }
        }
    }
}
