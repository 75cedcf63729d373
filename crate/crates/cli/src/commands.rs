//! One function per subcommand, each producing a manifest and a table.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use playout_core::ballot::{self, Mode};
use playout_core::fluid::{
    fluid_starvation_probability, match_means, no_starvation_horizon, EmpiricalTail, FileSizeDistribution,
    FluidScenario, MeanMatch,
};
use playout_core::qoe::{
    optimize_file_level, optimize_finite, optimize_infinite_subcritical, optimize_infinite_supercritical, FiniteSearch,
    OptimizationResult, QoeWeights, ThresholdBounds,
};
use playout_core::recursive::{ipp_kernel, mm1_kernel, starvation_pmf_recursive_with_resume, DepartureKernel};
use playout_core::sim::{compare_pmf, simulate, SimConfig};
use playout_core::takacs::{takacs_pmf, takacs_starvation_probability, SlottedScenario};
use playout_core::{ArrivalModel, IppParams, QueueParams, ScenarioSpec, SlotParams};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    CompareArgs, DistArg, ExactArgs, FluidArgs, ModeArg, OnOffArgs, OutputArgs, QoeArgs, RateArgs, RecursiveArgs,
    Scenario, SimArgs, SimulateArgs, SizeArgs, TakacsArgs,
};
use crate::output::{emit, Cell, RunManifest, Table};
use crate::{CliError, Status};

type CmdResult = Result<Status, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn finish<A: Serialize>(
    name: &str,
    args: &A,
    seed: Option<u64>,
    table: &Table,
    out: &OutputArgs,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let params = serde_json::to_value(args).expect("arguments serialize to JSON");
    let manifest = RunManifest::new(name, params, seed);
    emit(&manifest, table, out.out.as_deref(), out.format, stdout)?;
    Ok(())
}

/// `--rho` alone sets `mu = 1`; otherwise `--lambda` and `--mu` are both
/// needed unless the command supplies a default service rate.
fn queue_params(r: &RateArgs, default_mu: Option<f64>) -> Result<QueueParams, CliError> {
    match (r.rho, r.lambda, r.mu.or(default_mu)) {
        (Some(rho), _, _) => Ok(QueueParams::from_rho(rho)?),
        (None, Some(lambda), Some(mu)) => Ok(QueueParams::new(lambda, mu)?),
        _ => usage("give either --rho or both --lambda and --mu"),
    }
}

fn grid(s: &SizeArgs) -> Result<Vec<(u64, u64)>, CliError> {
    let ns = match (s.n, &s.n_sweep) {
        (Some(n), _) => vec![n],
        (None, Some(sw)) => sw.counts("--n-sweep").map_err(CliError::Usage)?,
        (None, None) => return usage("give --n or --n-sweep"),
    };
    let xs = match (s.x1, &s.x1_sweep) {
        (Some(x), _) => vec![x],
        (None, Some(sw)) => sw.counts("--x1-sweep").map_err(CliError::Usage)?,
        (None, None) => return usage("give --x1 or --x1-sweep"),
    };
    Ok(ns.iter().flat_map(|&n| xs.iter().map(move |&x| (n, x))).collect())
}

fn mode(m: Option<ModeArg>, n: u64) -> Mode {
    match m {
        Some(ModeArg::Exact) => Mode::Exact,
        Some(ModeArg::Gaussian) => Mode::Gaussian,
        None => Mode::default_for(n),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Gaussian => "gaussian",
    }
}

fn ipp(o: &OnOffArgs) -> Result<Option<IppParams>, CliError> {
    match (o.alpha, o.beta) {
        (Some(a), Some(b)) => Ok(Some(IppParams::new(a, b)?)),
        (None, None) => Ok(None),
        _ => usage("--alpha and --beta go together"),
    }
}

fn pmf_columns(t: Table, jmax: u64) -> Table {
    (0..=jmax).fold(t, |t, j| t.column(format!("pmf_{j}"), "probability"))
}

/// `pmf[0..=jmax]`, zero past the computed range.
fn pmf_cells(pmf: &[f64], jmax: u64) -> Vec<Cell> {
    (0..=jmax as usize)
        .map(|j| Cell::Real(pmf.get(j).copied().unwrap_or(0.0)))
        .collect()
}

pub fn exact(a: &ExactArgs, stdout: &mut dyn Write) -> CmdResult {
    let p = queue_params(&a.rates, None)?;
    let t = Table::new()
        .column("n", "packets")
        .column("x1", "packets")
        .column("rho", "dimensionless")
        .column("mode", "text");
    let mut t = pmf_columns(t.column("p_starvation", "probability"), a.jmax);
    for (n, x1) in grid(&a.sizes)? {
        let spec = ScenarioSpec::poisson(n, x1)?;
        let m = mode(a.mode, n);
        let d = ballot::starvation_pmf(&p, &spec, a.jmax.min(spec.max_starvations()), m)?;
        let mut row = vec![
            n.into(),
            x1.into(),
            p.rho().into(),
            mode_name(m).into(),
            (1.0 - d.get(0)).into(),
        ];
        row.extend(pmf_cells(d.pmf(), a.jmax));
        t.push(row);
    }
    finish("exact", a, None, &t, &a.output, stdout)?;
    Ok(Status::Success)
}

fn kernel(p: &QueueParams, on_off: Option<IppParams>, i_max: u64) -> Result<DepartureKernel, CliError> {
    Ok(match on_off {
        Some(ipp) => ipp_kernel(p, &ipp, i_max)?,
        None => mm1_kernel(p, i_max)?,
    })
}

pub fn recursive(a: &RecursiveArgs, stdout: &mut dyn Write) -> CmdResult {
    let p = queue_params(&a.rates, None)?;
    let on_off = ipp(&a.on_off)?;
    let points = grid(&a.sizes)?;
    let n_max = points.iter().map(|&(n, _)| n).max().unwrap_or(1);
    let k = kernel(&p, on_off, n_max)?;
    let t = Table::new()
        .column("n", "packets")
        .column("x1", "packets")
        .column("rho", "dimensionless")
        .column("arrivals", "text");
    let mut t = pmf_columns(t.column("p_starvation", "probability"), a.jmax);
    for (n, x1) in points {
        let spec = ScenarioSpec::poisson(n, x1)?;
        let jm = a.jmax.min(spec.max_starvations());
        let d = starvation_pmf_recursive_with_resume(&k, n, x1, jm, a.resume.unwrap_or(x1))?;
        let arrivals = if on_off.is_some() { "on-off" } else { "poisson" };
        let mut row = vec![
            n.into(),
            x1.into(),
            p.rho().into(),
            arrivals.into(),
            (1.0 - d.get(0)).into(),
        ];
        row.extend(pmf_cells(d.pmf(), a.jmax));
        t.push(row);
    }
    finish("recursive", a, None, &t, &a.output, stdout)?;
    Ok(Status::Success)
}

pub fn takacs(a: &TakacsArgs, stdout: &mut dyn Write) -> CmdResult {
    let t = Table::new()
        .column("n", "packets")
        .column("x1", "packets")
        .column("load", "arrivals per slot");
    let mut t = pmf_columns(t.column("p_starvation", "probability"), a.jmax);
    for (n, x1) in grid(&a.sizes)? {
        let scn = SlottedScenario::new(a.lambda, a.slot_d, n, x1)?;
        let d = takacs_pmf(&scn, a.jmax.min(n / x1))?;
        let mut row = vec![
            n.into(),
            x1.into(),
            scn.load().into(),
            takacs_starvation_probability(&scn).into(),
        ];
        row.extend(pmf_cells(d.pmf(), a.jmax));
        t.push(row);
    }
    finish("takacs", a, None, &t, &a.output, stdout)?;
    Ok(Status::Success)
}

/// Resolves a family from its flags, matching the mean `1/theta` when one
/// parameter is left out.
fn distribution(kind: DistArg, a: &FluidArgs) -> Result<FileSizeDistribution, CliError> {
    let mean = || match a.theta {
        Some(theta) if theta > 0.0 => Ok(1.0 / theta),
        Some(theta) => usage(format!("--theta must be positive, got {theta}")),
        None => usage("--theta is needed to match the mean of a partially specified family"),
    };
    Ok(match kind {
        DistArg::Exp => match a.theta {
            Some(theta) => FileSizeDistribution::exponential(theta)?,
            None => return usage("--dist exp needs --theta"),
        },
        DistArg::Pareto => match (a.nm, a.upsilon) {
            (Some(nm), Some(u)) => FileSizeDistribution::pareto(nm, u)?,
            (Some(nm), None) => match_means(mean()?, MeanMatch::ParetoMinimum(nm))?,
            (None, Some(u)) => match_means(mean()?, MeanMatch::ParetoExponent(u))?,
            (None, None) => return usage("--dist pareto needs --nm or --upsilon"),
        },
        DistArg::Lognormal => match (a.varrho, a.sigma) {
            (Some(r), Some(s)) => FileSizeDistribution::log_normal(r, s)?,
            (Some(r), None) => match_means(mean()?, MeanMatch::LogNormalLocation(r))?,
            (None, Some(s)) => match_means(mean()?, MeanMatch::LogNormalScale(s))?,
            (None, None) => return usage("--dist lognormal needs --varrho or --sigma"),
        },
    })
}

fn describe(d: &FileSizeDistribution) -> String {
    match *d {
        FileSizeDistribution::Exponential { theta } => format!("exp theta={theta:.16e}"),
        FileSizeDistribution::Pareto { n_m, upsilon } => format!("pareto nm={n_m:.16e} upsilon={upsilon:.16e}"),
        FileSizeDistribution::LogNormal { varrho, sigma } => {
            format!("lognormal varrho={varrho:.16e} sigma={sigma:.16e}")
        }
    }
}

/// Observed file sizes: one positive integer per line, optional
/// `file_size_packets` header.
pub fn read_sizes(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(File::open(path)?);
    let mut sizes = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let field = rec.get(0).unwrap_or("");
        if rec.len() != 1 {
            return Err(CliError::Input(format!(
                "{}:{}: expected one column",
                path.display(),
                line + 1
            )));
        }
        if line == 0 && field == "file_size_packets" {
            continue;
        }
        match field.parse::<u64>() {
            Ok(v) if v >= 1 => sizes.push(v as f64),
            _ => {
                return Err(CliError::Input(format!(
                    "{}:{}: `{field}` is not a positive integer",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    Ok(sizes)
}

pub fn fluid(a: &FluidArgs, stdout: &mut dyn Write) -> CmdResult {
    let p = queue_params(&a.rates, None)?;
    let xs = match (a.x1, &a.x1_sweep) {
        (Some(x), _) => vec![x],
        (None, Some(sw)) => sw.values(),
        (None, None) => return usage("give --x1 or --x1-sweep"),
    };
    if a.dist.is_empty() && a.sizes_csv.is_none() {
        return usage("give --dist, --sizes-csv, or both");
    }
    let mut dists = Vec::new();
    for &kind in &a.dist {
        if !dists.iter().any(|&(k, _)| k == kind) {
            dists.push((kind, distribution(kind, a)?));
        }
    }
    let empirical = match &a.sizes_csv {
        Some(path) => Some(EmpiricalTail::new(read_sizes(path)?)?),
        None => None,
    };

    let mut t = Table::new().column("x1", "packets").column("horizon", "packets");
    for (kind, _) in &dists {
        let name = match kind {
            DistArg::Exp => "p_exp",
            DistArg::Pareto => "p_pareto",
            DistArg::Lognormal => "p_lognormal",
        };
        t = t.column(name, "probability");
    }
    if empirical.is_some() {
        t = t.column("p_empirical", "probability");
    }
    t.notes = dists.iter().map(|(_, d)| describe(d)).collect();
    if let Some(e) = &empirical {
        t.notes
            .push(format!("empirical files={} mean={:.16e}", e.len(), e.mean()));
    }
    for x1 in xs {
        let scn = FluidScenario::new(p.lambda(), p.mu(), x1)?;
        let mut row = vec![x1.into(), no_starvation_horizon(&scn)?.packets().into()];
        for (_, d) in &dists {
            row.push(fluid_starvation_probability(&scn, d)?.into());
        }
        if let Some(e) = &empirical {
            row.push(e.starvation_probability(&scn)?.into());
        }
        t.push(row);
    }
    finish("fluid", a, None, &t, &a.output, stdout)?;
    Ok(Status::Success)
}

pub fn qoe(a: &QoeArgs, stdout: &mut dyn Write) -> CmdResult {
    let rates: Vec<QueueParams> = match &a.lambda_sweep {
        Some(sw) => {
            let Some(mu) = a.rates.mu else {
                return usage("--lambda-sweep needs --mu");
            };
            sw.values()
                .into_iter()
                .map(|l| QueueParams::new(l, mu))
                .collect::<Result<_, _>>()?
        }
        None => vec![queue_params(&a.rates, None)?],
    };
    let gammas = match (a.gamma, &a.gamma_sweep) {
        (Some(g), _) => vec![g],
        (None, Some(sw)) => sw.values(),
        (None, None) => return usage("give --gamma or --gamma-sweep"),
    };
    let bounds = ThresholdBounds {
        min: a.min_x1,
        max: a.max_x1,
    };
    let mut t = Table::new()
        .column("lambda", "packets/s")
        .column("mu", "packets/s")
        .column("gamma", "dimensionless")
        .column("x1_real", "packets")
        .column("x1_star", "packets")
        .column("cost", "dimensionless");
    for p in &rates {
        for &gamma in &gammas {
            let w = QoeWeights::new(gamma, a.delta)?;
            let r: OptimizationResult = match a.scenario {
                Scenario::Finite => {
                    let Some(n) = a.n else {
                        return usage("--scenario finite needs --n");
                    };
                    let search = FiniteSearch {
                        tolerance: a.tolerance,
                        bounds,
                        mode: mode(a.mode, n),
                    };
                    optimize_finite(p, n, &w, search)?
                }
                Scenario::Supercritical => optimize_infinite_supercritical(p, &w, bounds)?,
                Scenario::Subcritical => optimize_infinite_subcritical(p, &w, bounds)?,
                Scenario::FileLevel => {
                    let Some(theta) = a.theta else {
                        return usage("--scenario file-level needs --theta");
                    };
                    optimize_file_level(p.lambda(), p.mu(), theta, &w, bounds)?
                }
            };
            t.push(vec![
                p.lambda().into(),
                p.mu().into(),
                gamma.into(),
                r.x1_real.into(),
                r.x1_star.into(),
                r.cost_at_optimum.into(),
            ]);
        }
    }
    finish("qoe", a, None, &t, &a.output, stdout)?;
    Ok(Status::Success)
}

/// Queue parameters, scenario and simulator settings shared by `simulate`
/// and `compare`.
fn sim_setup(
    rates: &RateArgs,
    n: u64,
    x1: u64,
    on_off: &OnOffArgs,
    s: &SimArgs,
) -> Result<(QueueParams, ScenarioSpec, SimConfig), CliError> {
    let arrival = match (s.slot_d, ipp(on_off)?) {
        (Some(d), _) => ArrivalModel::Slotted(SlotParams::new(d)?),
        (None, Some(ipp)) => ArrivalModel::Ipp(ipp),
        (None, None) => ArrivalModel::Poisson,
    };
    // Slotted playback serves one packet per slot.
    let p = queue_params(rates, s.slot_d.map(|d| 1.0 / d))?;
    let spec = ScenarioSpec::new(n, x1, arrival)?;
    let mut cfg = SimConfig::new(p, spec)
        .replications(s.replications)
        .seed(s.seed)
        .parallel(!s.serial);
    if let Some(r) = s.resume {
        cfg = cfg.resume_threshold(r);
    }
    Ok((p, spec, cfg))
}

pub fn simulate_cmd(a: &SimulateArgs, stdout: &mut dyn Write) -> CmdResult {
    let (_, _, cfg) = sim_setup(&a.rates, a.n, a.x1, &a.on_off, &a.sim)?;
    let r = simulate(&cfg)?;
    let mut t = Table::new()
        .column("j", "starvations")
        .column("count", "replications")
        .column("empirical_pmf", "probability")
        .column("std_error", "probability");
    for (j, &c) in r.histogram.iter().enumerate() {
        t.push(vec![
            (j as u64).into(),
            c.into(),
            r.pmf(j).into(),
            r.std_errors[j].into(),
        ]);
    }
    if let Some(e) = &r.mean_inter_starvation {
        t.notes.push(format!(
            "mean_inter_starvation_s={:.16e} std_error={:.16e} gaps={}",
            e.mean, e.std_error, e.samples
        ));
    }
    t.summary = Some(json!({
        "replications": r.replications,
        "total_events": r.total_events,
        "mean_inter_starvation": r.mean_inter_starvation,
    }));
    finish("simulate", a, Some(a.sim.seed), &t, &a.output, stdout)?;
    Ok(Status::Success)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn compare(a: &CompareArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let (p, spec, cfg) = sim_setup(&a.rates, a.n, a.x1, &a.on_off, &a.sim)?;
    let (n, x1) = (a.n, a.x1);
    let jm = a.jmax.unwrap_or(spec.max_starvations());
    if jm > spec.max_starvations() {
        return usage(format!("--jmax {jm} exceeds floor(N/x1) = {}", spec.max_starvations()));
    }
    let resume = a.sim.resume.unwrap_or(x1);
    let default_resume = resume == x1;

    let mut methods: Vec<(&str, Vec<f64>)> = Vec::new();
    match spec.arrival() {
        ArrivalModel::Poisson => {
            if default_resume {
                let d = ballot::starvation_pmf(&p, &spec, jm, Mode::default_for(n))?;
                methods.push(("ballot", d.pmf().to_vec()));
            }
            let k = mm1_kernel(&p, n)?;
            let d = starvation_pmf_recursive_with_resume(&k, n, x1, jm, resume)?;
            methods.push(("recursive", d.pmf().to_vec()));
        }
        ArrivalModel::Ipp(ipp) => {
            let k = ipp_kernel(&p, &ipp, n)?;
            let d = starvation_pmf_recursive_with_resume(&k, n, x1, jm, resume)?;
            methods.push(("recursive", d.pmf().to_vec()));
        }
        ArrivalModel::Slotted(slot) => {
            if !default_resume {
                return usage("--resume is not supported with --slot-d");
            }
            let scn = SlottedScenario::new(p.lambda(), slot.d, n, x1)?;
            methods.push(("takacs", takacs_pmf(&scn, jm)?.pmf().to_vec()));
        }
    }

    let report = simulate(&cfg)?;
    let verdicts: Vec<_> = methods
        .iter()
        .map(|(_, pmf)| compare_pmf(&report, pmf, a.sigmas))
        .collect();

    let mut t = Table::new().column("j", "starvations");
    for name in ["ballot", "recursive", "takacs"] {
        t = t.column(name, "probability");
    }
    t = t
        .column("monte_carlo", "probability")
        .column("std_error", "probability")
        .column("max_abs_z", "standard errors")
        .column("pass", "boolean");
    for j in 0..=jm as usize {
        let mut row = vec![Cell::Int(j as u64)];
        for name in ["ballot", "recursive", "takacs"] {
            row.push(methods.iter().find(|(m, _)| *m == name).map(|(_, pmf)| pmf[j]).into());
        }
        let z = verdicts.iter().map(|v| v[j].z.abs()).fold(0.0, f64::max);
        let pass = verdicts.iter().all(|v| v[j].pass);
        row.extend([report.pmf(j).into(), report.std_errors[j].into(), z.into(), pass.into()]);
        t.push(row);
    }

    let bins = jm as usize + 1;
    let mc: Vec<f64> = (0..bins).map(|j| report.pmf(j)).collect();
    let mut summary = serde_json::Map::new();
    let mut lines = Vec::new();
    for (name, pmf) in &methods {
        let d = max_abs_diff(pmf, &mc);
        summary.insert(format!("max_abs_{name}_vs_monte_carlo"), json!(d));
        lines.push(format!("max |{name} - monte_carlo| = {d:.3e}"));
    }
    if let [(a_name, a_pmf), (b_name, b_pmf)] = methods.as_slice() {
        let d = max_abs_diff(a_pmf, b_pmf);
        summary.insert(format!("max_abs_{a_name}_vs_{b_name}"), json!(d));
        lines.push(format!("max |{a_name} - {b_name}| = {d:.3e}"));
    }
    let failed: Vec<usize> = (0..bins).filter(|&j| verdicts.iter().any(|v| !v[j].pass)).collect();
    let pass = failed.is_empty();
    summary.insert("pass".into(), json!(pass));
    summary.insert("failed_bins".into(), json!(failed));
    summary.insert("sigmas".into(), json!(a.sigmas));
    t.summary = Some(serde_json::Value::Object(summary));

    finish("compare", a, Some(a.sim.seed), &t, &a.output, stdout)?;

    for l in &lines {
        writeln!(stderr, "{l}")?;
    }
    if pass {
        writeln!(
            stderr,
            "verdict: PASS ({bins} bins within {} standard errors)",
            a.sigmas
        )?;
        Ok(Status::Success)
    } else {
        writeln!(
            stderr,
            "verdict: FAIL (bins {failed:?} outside {} standard errors)",
            a.sigmas
        )?;
        Ok(Status::VerdictFailed)
    }
}
