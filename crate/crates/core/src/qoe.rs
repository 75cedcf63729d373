//! Prefetch thresholds that balance start-up delay against starvation.
//!
//! Every cost adds `gamma * (x1/lambda)^2`, the squared start-up delay, to a
//! starvation measure that falls as `x1` grows. For finite files the
//! measure is exact and the cost is neither convex nor concave, so the
//! optimum is found by scanning every threshold. The three remaining
//! scenarios share the form `exp(-a*x1) + gamma*(x1/lambda)^2` and have the
//! closed-form optimum `W(a^2 lambda^2 / (2 gamma)) / a`.

use serde::Serialize;

use crate::ballot::{starvation_pmf, starvation_probability, Mode};
use crate::error::{domain_err, param_err, Result};
use crate::params::{QueueParams, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QoeWeights {
    /// Weight of the squared start-up delay.
    pub gamma: f64,
    /// Weight of the playback duration between starvations.
    pub delta: f64,
}

impl QoeWeights {
    /// `gamma = 0` is accepted by the finite-media scan only.
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return param_err(format!("gamma = {gamma} must be non-negative"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return param_err(format!("delta = {delta} must be positive"));
        }
        Ok(Self { gamma, delta })
    }

    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OptMethod {
    LambertClosedForm,
    GridSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    /// Real-valued optimum; `None` for the finite scan.
    pub x1_real: Option<f64>,
    pub x1_star: u64,
    pub cost_at_optimum: f64,
    pub method: OptMethod,
}

/// Optional clamps on the threshold, in packets.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ThresholdBounds {
    pub min: Option<u64>,
    pub max: Option<u64>,
}

impl ThresholdBounds {
    fn range(&self, lo: u64, hi: u64) -> Result<(u64, u64)> {
        let lo = self.min.map_or(lo, |m| m.max(lo));
        let hi = self.max.map_or(hi, |m| m.min(hi));
        if lo > hi {
            return param_err(format!("threshold bounds leave no admissible value ({lo} > {hi})"));
        }
        Ok((lo, hi))
    }
}

/// Principal branch of the Lambert W function.
pub fn lambert_w0(x: f64) -> Result<f64> {
    const BRANCH: f64 = -1.0 / std::f64::consts::E;
    if x.is_nan() || x < BRANCH {
        return domain_err(format!("Lambert W0 is undefined for x = {x} < -1/e"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let mut w = if x < -0.25 {
        // series around the branch point
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - x.ln_1p() / (2.0 + x.ln_1p()))
    } else {
        let l = x.ln();
        l - l.ln()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * w.abs().max(1e-300) {
            break;
        }
    }
    Ok(w)
}

/// `C(x) = exp(-a x) + gamma (x / lambda)^2` with `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialCost {
    pub a: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl ExponentialCost {
    pub fn cost(&self, x: f64) -> f64 {
        (-self.a * x).exp() + self.gamma * (x / self.lambda).powi(2)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -self.a * (-self.a * x).exp() + 2.0 * self.gamma * x / (self.lambda * self.lambda)
    }

    /// Relative residual of `x exp(a x) = a lambda^2 / (2 gamma)`.
    pub fn stationarity_residual(&self, x: f64) -> f64 {
        let rhs = self.a * self.lambda * self.lambda / (2.0 * self.gamma);
        ((x * (self.a * x).exp() - rhs) / rhs).abs()
    }

    /// Real minimiser.
    pub fn argmin(&self) -> Result<f64> {
        let arg = (self.a * self.lambda).powi(2) / (2.0 * self.gamma);
        Ok(lambert_w0(arg)? / self.a)
    }

    fn optimize(&self, bounds: ThresholdBounds) -> Result<OptimizationResult> {
        if !(self.gamma > 0.0) {
            return param_err("closed-form optimum needs gamma > 0");
        }
        let x = self.argmin()?;
        let (lo, hi) = bounds.range(1, u64::MAX)?;
        let real = x.clamp(
            bounds.min.map_or(0.0, |m| m as f64),
            bounds.max.map_or(f64::INFINITY, |m| m as f64),
        );
        // integer thresholds start at one packet
        let floor = (real.floor() as u64).clamp(lo, hi);
        let ceil = (real.ceil() as u64).clamp(lo, hi);
        let (c_floor, c_ceil) = (self.cost(floor as f64), self.cost(ceil as f64));
        let (x1_star, cost) = if c_ceil < c_floor {
            (ceil, c_ceil)
        } else {
            (floor, c_floor)
        };
        Ok(OptimizationResult {
            x1_real: Some(real),
            x1_star,
            cost_at_optimum: cost,
            method: OptMethod::LambertClosedForm,
        })
    }
}

/// Asymptotic cost of an endless stream with `rho > 1`.
pub fn supercritical_cost(params: &QueueParams, w: &QoeWeights) -> Result<ExponentialCost> {
    if params.rho() <= 1.0 {
        return domain_err(format!("supercritical optimum needs rho > 1, got {}", params.rho()));
    }
    let (p, q) = (params.p(), params.q());
    Ok(ExponentialCost {
        a: (2.0 * p - 1.0) / (2.0 * p * q),
        lambda: params.lambda(),
        gamma: w.gamma,
    })
}

/// Cost of an endless stream with `rho < 1`, rewarding long playback
/// between starvations.
pub fn subcritical_cost(params: &QueueParams, w: &QoeWeights) -> Result<ExponentialCost> {
    if params.rho() >= 1.0 {
        return domain_err(format!("subcritical optimum needs rho < 1, got {}", params.rho()));
    }
    Ok(ExponentialCost {
        a: w.delta / (params.lambda() * (1.0 - params.rho())),
        lambda: params.lambda(),
        gamma: w.gamma,
    })
}

/// Server-side cost over exponentially distributed file sizes with mean
/// `1/theta`, using the fluid starvation probability.
pub fn file_level_cost(lambda: f64, mu: f64, theta: f64, w: &QoeWeights) -> Result<ExponentialCost> {
    if !(lambda > 0.0 && mu > 0.0 && theta > 0.0) {
        return param_err(format!("lambda, mu, theta must be positive ({lambda}, {mu}, {theta})"));
    }
    if mu <= lambda {
        return domain_err(format!(
            "file-level optimum needs mu > lambda (mu = {mu}, lambda = {lambda})"
        ));
    }
    Ok(ExponentialCost {
        a: theta * mu / (mu - lambda),
        lambda,
        gamma: w.gamma,
    })
}

pub fn optimize_infinite_supercritical(
    params: &QueueParams,
    w: &QoeWeights,
    bounds: ThresholdBounds,
) -> Result<OptimizationResult> {
    supercritical_cost(params, w)?.optimize(bounds)
}

pub fn optimize_infinite_subcritical(
    params: &QueueParams,
    w: &QoeWeights,
    bounds: ThresholdBounds,
) -> Result<OptimizationResult> {
    subcritical_cost(params, w)?.optimize(bounds)
}

pub fn optimize_file_level(
    lambda: f64,
    mu: f64,
    theta: f64,
    w: &QoeWeights,
    bounds: ThresholdBounds,
) -> Result<OptimizationResult> {
    if mu == lambda && lambda > 0.0 && theta > 0.0 {
        // No file ever starves, so only the delay term remains and the
        // smallest admissible threshold wins.
        let (lo, _) = bounds.range(1, u64::MAX)?;
        return Ok(OptimizationResult {
            x1_real: Some(bounds.min.map_or(0.0, |m| m as f64)),
            x1_star: lo,
            cost_at_optimum: w.gamma * (lo as f64 / lambda).powi(2),
            method: OptMethod::LambertClosedForm,
        });
    }
    file_level_cost(lambda, mu, theta, w)?.optimize(bounds)
}

/// Options of the finite-media scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteSearch {
    /// Starvations the user accepts without penalty.
    pub tolerance: u64,
    pub bounds: ThresholdBounds,
    pub mode: Mode,
}

impl Default for FiniteSearch {
    fn default() -> Self {
        Self {
            tolerance: 0,
            bounds: ThresholdBounds::default(),
            mode: Mode::Exact,
        }
    }
}

/// Probability of more than `tolerance` starvations.
fn starvation_measure(params: &QueueParams, spec: &ScenarioSpec, tolerance: u64, mode: Mode) -> Result<f64> {
    if tolerance == 0 && mode == Mode::Exact {
        return starvation_probability(params, spec);
    }
    let j_max = tolerance.min(spec.max_starvations());
    let d = starvation_pmf(params, spec, j_max, mode)?;
    Ok((1.0 - d.total()).clamp(0.0, 1.0))
}

/// `C1(x1) = P(more than tolerance starvations) + gamma (x1/lambda)^2`.
pub fn cost_finite(params: &QueueParams, n: u64, x1: u64, w: &QoeWeights, tolerance: u64) -> Result<f64> {
    let spec = ScenarioSpec::poisson(n, x1)?;
    Ok(starvation_measure(params, &spec, tolerance, Mode::Exact)? + w.gamma * (x1 as f64 / params.lambda()).powi(2))
}

/// Exhaustive scan over all admissible thresholds; ties go to the smaller
/// threshold.
pub fn optimize_finite(
    params: &QueueParams,
    n: u64,
    w: &QoeWeights,
    search: FiniteSearch,
) -> Result<OptimizationResult> {
    let (lo, hi) = search.bounds.range(1, n)?;
    let mut best: Option<(u64, f64)> = None;
    for x1 in lo..=hi {
        let spec = ScenarioSpec::poisson(n, x1)?;
        let cost = starvation_measure(params, &spec, search.tolerance, search.mode)?
            + w.gamma * (x1 as f64 / params.lambda()).powi(2);
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((x1, cost));
        }
    }
    let (x1_star, cost_at_optimum) = best.expect("range is non-empty");
    Ok(OptimizationResult {
        x1_real: None,
        x1_star,
        cost_at_optimum,
        method: OptMethod::GridSearch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambert_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(-1.0 / std::f64::consts::E).unwrap() + 1.0).abs() < 1e-7);
        assert!(lambert_w0(-0.4).is_err());
        for &x in &[-0.367, -0.3, -0.1, 1e-10, 0.5, 1.0, 10.0, 1e3, 1e8, 1e100, 1e300] {
            let w = lambert_w0(x).unwrap();
            let r = (w * w.exp() - x).abs();
            assert!(r < 1e-12 * x.abs().max(1.0), "x = {x}: residual {r}");
        }
    }

    #[test]
    fn closed_forms_are_stationary() {
        let w = QoeWeights::with_gamma(1e-3).unwrap();
        let p = QueueParams::new(1.3, 1.0).unwrap();
        let c = supercritical_cost(&p, &w).unwrap();
        let x = c.argmin().unwrap();
        assert!(c.stationarity_residual(x) < 1e-12);
        assert!(c.derivative(x).abs() < 1e-12);

        let p = QueueParams::new(0.8, 1.0).unwrap();
        let c = subcritical_cost(&p, &w).unwrap();
        assert!(c.stationarity_residual(c.argmin().unwrap()) < 1e-12);

        let c = file_level_cost(22.0, 25.0, 1.0 / 2000.0, &w).unwrap();
        assert!(c.stationarity_residual(c.argmin().unwrap()) < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let w = QoeWeights::with_gamma(1e-3).unwrap();
        let sub = QueueParams::new(0.9, 1.0).unwrap();
        let sup = QueueParams::new(1.1, 1.0).unwrap();
        assert!(optimize_infinite_supercritical(&sub, &w, Default::default()).is_err());
        assert!(optimize_infinite_supercritical(&QueueParams::from_rho(1.0).unwrap(), &w, Default::default()).is_err());
        assert!(optimize_infinite_subcritical(&sup, &w, Default::default()).is_err());
        assert!(optimize_file_level(25.5, 25.0, 1e-3, &w, Default::default()).is_err());
        assert!(file_level_cost(25.0, 25.0, 1e-3, &w).is_err());
        let zero = QoeWeights::with_gamma(0.0).unwrap();
        assert!(optimize_infinite_subcritical(&sub, &zero, Default::default()).is_err());
        assert!(QoeWeights::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn file_level_balanced_rates_never_starve() {
        let w = QoeWeights::with_gamma(1e-2).unwrap();
        let r = optimize_file_level(25.0, 25.0, 5e-4, &w, Default::default()).unwrap();
        assert_eq!((r.x1_real, r.x1_star), (Some(0.0), 1));
        let b = ThresholdBounds {
            min: Some(4),
            max: None,
        };
        assert_eq!(optimize_file_level(25.0, 25.0, 5e-4, &w, b).unwrap().x1_star, 4);
        // the optimum shrinks continuously toward this limit
        let near = optimize_file_level(24.99999, 25.0, 5e-4, &w, Default::default()).unwrap();
        assert!(near.x1_real.unwrap() < 0.05);
    }

    #[test]
    fn integer_optimum_is_best_neighbour() {
        let w = QoeWeights::with_gamma(5e-3).unwrap();
        let r = optimize_file_level(21.0, 25.0, 1e-3, &w, Default::default()).unwrap();
        let c = file_level_cost(21.0, 25.0, 1e-3, &w).unwrap();
        let x = r.x1_real.unwrap();
        assert!(r.x1_star == x.floor() as u64 || r.x1_star == x.ceil() as u64);
        let other = if r.x1_star == x.floor() as u64 {
            x.ceil()
        } else {
            x.floor()
        };
        assert!(c.cost(r.x1_star as f64) <= c.cost(other));
    }

    #[test]
    fn bounds_clamp() {
        let w = QoeWeights::with_gamma(1e-4).unwrap();
        let p = QueueParams::new(1.2, 1.0).unwrap();
        let free = optimize_infinite_supercritical(&p, &w, Default::default()).unwrap();
        let b = ThresholdBounds {
            min: None,
            max: Some(free.x1_star / 2),
        };
        let capped = optimize_infinite_supercritical(&p, &w, b).unwrap();
        assert_eq!(capped.x1_star, free.x1_star / 2);
        let b = ThresholdBounds {
            min: Some(5),
            max: Some(3),
        };
        assert!(optimize_infinite_supercritical(&p, &w, b).is_err());
    }

    #[test]
    fn finite_edges() {
        let p = QueueParams::new(20.0, 25.0).unwrap();
        let zero = QoeWeights::with_gamma(0.0).unwrap();
        let r = optimize_finite(&p, 40, &zero, FiniteSearch::default()).unwrap();
        assert_eq!(r.x1_star, 40);
        assert_eq!(r.cost_at_optimum, 0.0);
        let w = QoeWeights::with_gamma(1e-3).unwrap();
        let c = cost_finite(&p, 50, 50, &w, 0).unwrap();
        assert!((c - 1e-3 * (50.0f64 / 20.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn finite_scan_equals_brute_force() {
        let p = QueueParams::new(19.0, 25.0).unwrap();
        for gamma in [1e-4, 1e-3, 1e-2] {
            let w = QoeWeights::with_gamma(gamma).unwrap();
            for tol in [0u64, 1] {
                let r = optimize_finite(
                    &p,
                    30,
                    &w,
                    FiniteSearch {
                        tolerance: tol,
                        ..Default::default()
                    },
                )
                .unwrap();
                let costs: Vec<f64> = (1..=30).map(|x| cost_finite(&p, 30, x, &w, tol).unwrap()).collect();
                let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
                let first = costs.iter().position(|&c| c == min).unwrap() as u64 + 1;
                assert_eq!(r.x1_star, first);
            }
        }
    }

    #[test]
    fn tolerating_one_starvation_lowers_threshold() {
        let p = QueueParams::new(22.0, 25.0).unwrap();
        let w = QoeWeights::with_gamma(1e-3).unwrap();
        let strict = optimize_finite(&p, 300, &w, FiniteSearch::default()).unwrap();
        let relaxed = optimize_finite(
            &p,
            300,
            &w,
            FiniteSearch {
                tolerance: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(relaxed.x1_star <= strict.x1_star);
        assert!(relaxed.cost_at_optimum <= strict.cost_at_optimum);
    }
}
