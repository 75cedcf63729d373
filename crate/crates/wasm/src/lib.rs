//! Browser bindings: starvation-count curves over file size, fluid
//! starvation probability over the threshold, and the file-level QoE
//! optimum over the arrival rate.
//!
//! Every export returns a JSON string, either the result object or
//! `{"error": "..."}`, so the page never has to catch exceptions and the
//! plain functions run in native tests.

use playout_core::ballot::{starvation_pmf, Mode};
use playout_core::fluid::{fluid_starvation_probability, match_means, FluidScenario, MeanMatch};
use playout_core::qoe::{optimize_file_level, QoeWeights, ThresholdBounds};
use playout_core::{QueueParams, Result, ScenarioSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Sweep points are capped so a typo cannot freeze the page.
const MAX_POINTS: usize = 2000;

fn points(start: f64, end: f64, step: f64) -> Vec<f64> {
    let valid = step > 0.0 && end >= start && start.is_finite() && end.is_finite();
    if !valid {
        return Vec::new();
    }
    let count = (((end - start) / step + 1e-9).floor() as usize + 1).min(MAX_POINTS);
    (0..count).map(|k| start + k as f64 * step).collect()
}

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("results are plain JSON"),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Debug, Serialize, PartialEq)]
pub struct PmfCurves {
    pub n: Vec<u64>,
    /// `pmf[j][k]`: probability of `j` starvations at file size `n[k]`.
    pub pmf: Vec<Vec<f64>>,
}

pub fn pmf_curves(rho: f64, x1: u64, n_start: u64, n_end: u64, n_step: u64, jmax: u64) -> Result<PmfCurves> {
    let p = QueueParams::from_rho(rho)?;
    let n: Vec<u64> = points(n_start as f64, n_end as f64, n_step as f64)
        .into_iter()
        .map(|v| v as u64)
        .filter(|&v| v >= x1.max(1))
        .collect();
    let mut pmf = vec![Vec::with_capacity(n.len()); jmax as usize + 1];
    for &size in &n {
        let spec = ScenarioSpec::poisson(size, x1)?;
        let d = starvation_pmf(&p, &spec, jmax.min(spec.max_starvations()), Mode::default_for(size))?;
        for (j, row) in pmf.iter_mut().enumerate() {
            row.push(d.get(j));
        }
    }
    Ok(PmfCurves { n, pmf })
}

#[derive(Debug, Serialize, PartialEq)]
pub struct FluidCurves {
    pub x1: Vec<f64>,
    pub exponential: Vec<f64>,
    pub pareto: Vec<f64>,
    pub lognormal: Vec<f64>,
    pub upsilon: f64,
    pub sigma: f64,
}

/// All three families share the mean `1/theta`; Pareto fixes its minimum
/// `nm` and log-normal its location `varrho`.
pub fn fluid_curves(
    rho: f64,
    theta: f64,
    nm: f64,
    varrho: f64,
    x1_start: f64,
    x1_end: f64,
    x1_step: f64,
) -> Result<FluidCurves> {
    let mean = 1.0 / theta;
    let exp = match_means(mean, MeanMatch::Exponential)?;
    let pareto = match_means(mean, MeanMatch::ParetoMinimum(nm))?;
    let lognormal = match_means(mean, MeanMatch::LogNormalLocation(varrho))?;
    let x1 = points(x1_start, x1_end, x1_step);
    let mut out = FluidCurves {
        x1: x1.clone(),
        exponential: Vec::new(),
        pareto: Vec::new(),
        lognormal: Vec::new(),
        upsilon: match pareto {
            playout_core::fluid::FileSizeDistribution::Pareto { upsilon, .. } => upsilon,
            _ => unreachable!("matched a Pareto family"),
        },
        sigma: match lognormal {
            playout_core::fluid::FileSizeDistribution::LogNormal { sigma, .. } => sigma,
            _ => unreachable!("matched a log-normal family"),
        },
    };
    for x in x1 {
        let scn = FluidScenario::new(rho, 1.0, x)?;
        out.exponential.push(fluid_starvation_probability(&scn, &exp)?);
        out.pareto.push(fluid_starvation_probability(&scn, &pareto)?);
        out.lognormal.push(fluid_starvation_probability(&scn, &lognormal)?);
    }
    Ok(out)
}

#[derive(Debug, Serialize, PartialEq)]
pub struct QoeCurve {
    pub lambda: Vec<f64>,
    pub x1_real: Vec<f64>,
    pub x1_star: Vec<u64>,
    /// Fluid starvation probability at the integer optimum.
    pub starvation: Vec<f64>,
}

pub fn qoe_curve(
    mu: f64,
    theta: f64,
    gamma: f64,
    lambda_start: f64,
    lambda_end: f64,
    lambda_step: f64,
) -> Result<QoeCurve> {
    let w = QoeWeights::with_gamma(gamma)?;
    let mut out = QoeCurve {
        lambda: Vec::new(),
        x1_real: Vec::new(),
        x1_star: Vec::new(),
        starvation: Vec::new(),
    };
    for lambda in points(lambda_start, lambda_end, lambda_step) {
        let r = optimize_file_level(lambda, mu, theta, &w, ThresholdBounds::default())?;
        let dist = match_means(1.0 / theta, MeanMatch::Exponential)?;
        let scn = FluidScenario::new(lambda, mu, r.x1_star as f64)?;
        out.lambda.push(lambda);
        out.x1_real.push(r.x1_real.unwrap_or(f64::NAN));
        out.x1_star.push(r.x1_star);
        out.starvation.push(fluid_starvation_probability(&scn, &dist)?);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = pmfCurves)]
pub fn pmf_curves_json(rho: f64, x1: u32, n_start: u32, n_end: u32, n_step: u32, jmax: u32) -> String {
    to_json(pmf_curves(
        rho,
        x1.into(),
        n_start.into(),
        n_end.into(),
        n_step.into(),
        jmax.into(),
    ))
}

#[wasm_bindgen(js_name = fluidCurves)]
pub fn fluid_curves_json(
    rho: f64,
    theta: f64,
    nm: f64,
    varrho: f64,
    x1_start: f64,
    x1_end: f64,
    x1_step: f64,
) -> String {
    to_json(fluid_curves(rho, theta, nm, varrho, x1_start, x1_end, x1_step))
}

#[wasm_bindgen(js_name = qoeCurve)]
pub fn qoe_curve_json(mu: f64, theta: f64, gamma: f64, lambda_start: f64, lambda_end: f64, lambda_step: f64) -> String {
    to_json(qoe_curve(mu, theta, gamma, lambda_start, lambda_end, lambda_step))
}
