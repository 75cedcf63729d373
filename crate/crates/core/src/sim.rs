//! Discrete-event Monte Carlo simulation of the prefetching playout buffer.
//!
//! Each replication streams one file of `N` packets. Playback starts once
//! `x1` packets are buffered (or the whole remainder, if shorter), and after
//! every starvation it resumes at the resume threshold. A starvation is a
//! departure that empties the buffer before packet `N` has been played.
//!
//! Replication `r` draws from its own ChaCha stream `(master_seed, r)`, and
//! per-replication outcomes are reduced in replication order, so a report
//! depends only on the configuration, never on scheduling.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, LogNormal, Pareto};
use serde::Serialize;

use crate::error::{param_err, Result};
use crate::fluid::FileSizeDistribution;
use crate::params::{ArrivalModel, IppParams, QueueParams, ScenarioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Arrival rate and, for unslotted models, the service rate. The slotted
    /// model serves one packet per slot and ignores `mu`.
    pub params: QueueParams,
    pub scenario: ScenarioSpec,
    pub replications: u64,
    pub master_seed: u64,
    pub parallel: bool,
    /// Packets to re-buffer after a starvation; `None` means `x1`.
    pub resume_threshold: Option<u64>,
}

impl SimConfig {
    pub const DEFAULT_REPLICATIONS: u64 = 5000;

    pub fn new(params: QueueParams, scenario: ScenarioSpec) -> Self {
        Self {
            params,
            scenario,
            replications: Self::DEFAULT_REPLICATIONS,
            master_seed: 0,
            parallel: true,
            resume_threshold: None,
        }
    }

    pub fn replications(mut self, r: u64) -> Self {
        self.replications = r;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn resume_threshold(mut self, resume: u64) -> Self {
        self.resume_threshold = Some(resume);
        self
    }

    fn resume(&self) -> u64 {
        self.resume_threshold.unwrap_or(self.scenario.threshold())
    }

    fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return param_err("at least one replication is required");
        }
        if self.resume() < 1 {
            return param_err("resume threshold must be at least 1");
        }
        Ok(())
    }
}

/// Mean of a sample with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Option<Self> {
        if xs.len() < 2 {
            return None;
        }
        let n = xs.len() as f64;
        let mean = crate::numeric::compensated_sum(xs.iter().copied()) / n;
        let var = crate::numeric::compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
        Some(Self {
            mean,
            std_error: (var / n).sqrt(),
            samples: xs.len() as u64,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub replications: u64,
    /// `histogram[j]`: replications with exactly `j` starvations.
    pub histogram: Vec<u64>,
    pub empirical_pmf: Vec<f64>,
    /// `sqrt(p_hat (1 - p_hat) / R)` per bin.
    pub std_errors: Vec<f64>,
    /// Gaps between consecutive starvations within a file, in seconds.
    pub mean_inter_starvation: Option<Estimate>,
    /// `first_starvation[l]`: replications whose first starvation followed
    /// the departure of packet `l`.
    pub first_starvation: Vec<u64>,
    pub total_events: u64,
    #[serde(serialize_with = "as_seconds")]
    pub wall_time: Duration,
}

fn as_seconds<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// Equality of everything but the wall time.
impl PartialEq for SimReport {
    fn eq(&self, other: &Self) -> bool {
        self.replications == other.replications
            && self.histogram == other.histogram
            && self.empirical_pmf == other.empirical_pmf
            && self.std_errors == other.std_errors
            && self.mean_inter_starvation == other.mean_inter_starvation
            && self.first_starvation == other.first_starvation
            && self.total_events == other.total_events
    }
}

impl SimReport {
    pub fn pmf(&self, j: usize) -> f64 {
        self.empirical_pmf.get(j).copied().unwrap_or(0.0)
    }

    /// Fraction of replications with at least one starvation.
    pub fn starvation_frequency(&self) -> f64 {
        1.0 - self.pmf(0)
    }
}

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

/// Arrival epochs, generated lazily.
enum Arrivals {
    Poisson {
        lambda: f64,
        t: f64,
    },
    Ipp {
        lambda: f64,
        ipp: IppParams,
        t: f64,
        on: bool,
    },
}

impl Arrivals {
    fn new(lambda: f64, model: ArrivalModel) -> Self {
        match model {
            ArrivalModel::Ipp(ipp) => Arrivals::Ipp {
                lambda,
                ipp,
                t: 0.0,
                on: true,
            },
            ArrivalModel::Poisson | ArrivalModel::Slotted(_) => Arrivals::Poisson { lambda, t: 0.0 },
        }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Arrivals::Poisson { lambda, t } => {
                *t += exp_sample(rng, *lambda);
                *t
            }
            Arrivals::Ipp { lambda, ipp, t, on } => loop {
                if *on {
                    let to_arrival = exp_sample(rng, *lambda);
                    let to_off = exp_sample(rng, ipp.alpha);
                    if to_arrival < to_off {
                        *t += to_arrival;
                        return *t;
                    }
                    *t += to_off;
                    *on = false;
                } else {
                    *t += exp_sample(rng, ipp.beta);
                    *on = true;
                }
            },
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Outcome {
    starvation_times: Vec<f64>,
    /// Packet whose departure revealed the first starvation.
    first_starvation: Option<u64>,
    arrivals: u64,
    departures: u64,
}

fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Waits for `need` buffered packets; returns the time playback (re)starts.
fn prefetch(
    arrivals: &mut Arrivals,
    rng: &mut ChaCha8Rng,
    queue: &mut Vec<f64>,
    arrived: &mut u64,
    served: u64,
    need: u64,
    now: f64,
) -> f64 {
    let mut t = now;
    while *arrived - served < need {
        t = next_arrival(arrivals, rng, queue, *arrived);
        *arrived += 1;
    }
    t
}

/// Epoch of arrival number `index` (0-based); arrivals are drawn in order and
/// cached so look-ahead never consumes randomness twice.
fn next_arrival(arrivals: &mut Arrivals, rng: &mut ChaCha8Rng, queue: &mut Vec<f64>, index: u64) -> f64 {
    while queue.len() as u64 <= index {
        let t = arrivals.next(rng);
        queue.push(t);
    }
    queue[index as usize]
}

fn run_exponential(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Outcome {
    let n = cfg.scenario.file_size();
    let mu = cfg.params.mu();
    let mut arrivals = Arrivals::new(cfg.params.lambda(), cfg.scenario.arrival());
    let mut epochs = Vec::with_capacity(n as usize);
    let mut out = Outcome::default();
    let (mut arrived, mut served) = (0u64, 0u64);
    let mut need = cfg.scenario.threshold();
    let mut t = 0.0;
    'file: loop {
        t = prefetch(
            &mut arrivals,
            rng,
            &mut epochs,
            &mut arrived,
            served,
            need.min(n - served),
            t,
        );
        let mut departure = t + exp_sample(rng, mu);
        loop {
            let next = if arrived < n {
                next_arrival(&mut arrivals, rng, &mut epochs, arrived)
            } else {
                f64::INFINITY
            };
            if next < departure {
                arrived += 1;
                continue;
            }
            t = departure;
            served += 1;
            if served == n {
                break 'file;
            }
            if arrived == served {
                out.first_starvation.get_or_insert(served);
                out.starvation_times.push(t);
                need = cfg.resume();
                continue 'file;
            }
            departure = t + exp_sample(rng, mu);
        }
    }
    out.arrivals = arrived;
    out.departures = served;
    out
}

/// One departure at the end of each slot of length `d`; slots are aligned
/// to the moment playback (re)starts.
fn run_slotted(cfg: &SimConfig, d: f64, rng: &mut ChaCha8Rng) -> Outcome {
    let n = cfg.scenario.file_size();
    let mut arrivals = Arrivals::new(cfg.params.lambda(), cfg.scenario.arrival());
    let mut epochs = Vec::with_capacity(n as usize);
    let mut out = Outcome::default();
    let (mut arrived, mut served) = (0u64, 0u64);
    let mut need = cfg.scenario.threshold();
    let mut t = 0.0;
    'file: loop {
        let start = prefetch(
            &mut arrivals,
            rng,
            &mut epochs,
            &mut arrived,
            served,
            need.min(n - served),
            t,
        );
        let mut slot = 0u64;
        loop {
            slot += 1;
            t = start + slot as f64 * d;
            while arrived < n && next_arrival(&mut arrivals, rng, &mut epochs, arrived) <= t {
                arrived += 1;
            }
            served += 1;
            if served == n {
                break 'file;
            }
            if arrived == served {
                out.first_starvation.get_or_insert(served);
                out.starvation_times.push(t);
                need = cfg.resume();
                continue 'file;
            }
        }
    }
    out.arrivals = arrived;
    out.departures = served;
    out
}

fn run_replication(cfg: &SimConfig, rep: u64) -> Outcome {
    let mut rng = replication_rng(cfg.master_seed, rep);
    match cfg.scenario.arrival() {
        ArrivalModel::Slotted(slot) => run_slotted(cfg, slot.d, &mut rng),
        _ => run_exponential(cfg, &mut rng),
    }
}

fn run_all<T, F>(count: u64, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..count).map(f).collect()
}

pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let started = Instant::now();
    let outcomes = run_all(cfg.replications, cfg.parallel, |rep| run_replication(cfg, rep));

    let max_j = outcomes.iter().map(|o| o.starvation_times.len()).max().unwrap_or(0);
    let bins = max_j.max(cfg.scenario.max_starvations() as usize) + 1;
    let mut histogram = vec![0u64; bins];
    let mut first_starvation = vec![0u64; cfg.scenario.file_size() as usize];
    let mut gaps = Vec::new();
    let mut total_events = 0;
    for o in &outcomes {
        histogram[o.starvation_times.len()] += 1;
        if let Some(l) = o.first_starvation {
            first_starvation[l as usize] += 1;
        }
        gaps.extend(o.starvation_times.windows(2).map(|w| w[1] - w[0]));
        total_events += o.arrivals + o.departures;
    }
    let r = cfg.replications as f64;
    let empirical_pmf: Vec<f64> = histogram.iter().map(|&c| c as f64 / r).collect();
    let std_errors = empirical_pmf.iter().map(|&p| (p * (1.0 - p) / r).sqrt()).collect();
    Ok(SimReport {
        replications: cfg.replications,
        histogram,
        empirical_pmf,
        std_errors,
        mean_inter_starvation: Estimate::from_samples(&gaps),
        first_starvation,
        total_events,
        wall_time: started.elapsed(),
    })
}

/// Inter-arrival law used by [`simulate_kernel_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelSource {
    Poisson(QueueParams),
    Ipp(QueueParams, IppParams),
}

/// Empirical law of the number of departures, out of `i` buffered packets,
/// during one inter-arrival period. Returns frequencies for `k = 0..=i`.
pub fn simulate_kernel_check(source: KernelSource, i: u64, samples: u64, seed: u64) -> Result<Vec<f64>> {
    if i < 1 || samples < 1 {
        return param_err("kernel check needs i >= 1 and at least one sample");
    }
    let (params, model) = match source {
        KernelSource::Poisson(p) => (p, ArrivalModel::Poisson),
        KernelSource::Ipp(p, ipp) => (p, ArrivalModel::Ipp(IppParams::new(ipp.alpha, ipp.beta)?)),
    };
    let mut rng = replication_rng(seed, 0);
    let mut counts = vec![0u64; i as usize + 1];
    for _ in 0..samples {
        // each period starts right after an arrival, i.e. in the ON state
        let period = Arrivals::new(params.lambda(), model).next(&mut rng);
        let mut elapsed = 0.0;
        let mut k = 0;
        while k < i {
            elapsed += exp_sample(&mut rng, params.mu());
            if elapsed > period {
                break;
            }
            k += 1;
        }
        counts[k as usize] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / samples as f64).collect())
}

/// Mean time between consecutive starvations of an endless Poisson stream
/// with exponential playback, from `gaps` renewal cycles.
pub fn simulate_starvation_interval(params: &QueueParams, x1: u64, gaps: u64, seed: u64) -> Result<Estimate> {
    if x1 < 1 || gaps < 2 {
        return param_err("interval simulation needs x1 >= 1 and at least two gaps");
    }
    if params.rho() >= 1.0 {
        return param_err("interval simulation needs rho < 1 to terminate");
    }
    let mut rng = replication_rng(seed, 0);
    let (lambda, mu) = (params.lambda(), params.mu());
    let mut t = 0.0;
    let mut last: Option<f64> = None;
    let mut samples = Vec::with_capacity(gaps as usize);
    let mut next_arrival = exp_sample(&mut rng, lambda);
    while (samples.len() as u64) < gaps {
        // prefetch x1 packets
        let mut buffer = 0u64;
        while buffer < x1 {
            t = next_arrival;
            next_arrival = t + exp_sample(&mut rng, lambda);
            buffer += 1;
        }
        let mut departure = t + exp_sample(&mut rng, mu);
        while buffer > 0 {
            if next_arrival < departure {
                t = next_arrival;
                next_arrival = t + exp_sample(&mut rng, lambda);
                buffer += 1;
            } else {
                t = departure;
                buffer -= 1;
                departure = t + exp_sample(&mut rng, mu);
            }
        }
        if let Some(prev) = last {
            samples.push(t - prev);
        }
        last = Some(t);
    }
    Ok(Estimate::from_samples(&samples).expect("at least two gaps"))
}

/// `count` file sizes drawn from `dist`.
pub fn sample_file_sizes(dist: &FileSizeDistribution, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = replication_rng(seed, 0);
    match *dist {
        FileSizeDistribution::Exponential { theta } => (0..count).map(|_| exp_sample(&mut rng, theta)).collect(),
        FileSizeDistribution::Pareto { n_m, upsilon } => {
            let d = Pareto::new(n_m, upsilon).expect("validated parameters");
            (0..count).map(|_| d.sample(&mut rng)).collect()
        }
        FileSizeDistribution::LogNormal { varrho, sigma } => {
            let d = LogNormal::new(varrho, sigma).expect("validated parameters");
            (0..count).map(|_| d.sample(&mut rng)).collect()
        }
    }
}

/// Agreement of one analytic probability with an observed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinVerdict {
    pub analytic: f64,
    pub empirical: f64,
    /// The larger of the standard errors under the empirical and the
    /// analytic probability, so empty and full bins are still testable.
    pub std_error: f64,
    pub z: f64,
    pub pass: bool,
}

pub fn bin_verdict(analytic: f64, empirical: f64, trials: u64, sigmas: f64) -> BinVerdict {
    let r = trials as f64;
    let se_hat = (empirical * (1.0 - empirical) / r).sqrt();
    let a = analytic.clamp(0.0, 1.0);
    let se_null = (a * (1.0 - a) / r).sqrt();
    let std_error = se_hat.max(se_null);
    let diff = (analytic - empirical).abs();
    let impossible = (a == 0.0 && empirical > 0.0) || (a == 1.0 && empirical < 1.0);
    let (z, pass) = if impossible {
        (f64::INFINITY, false)
    } else if std_error > 0.0 {
        (diff / std_error, diff <= sigmas * std_error)
    } else {
        // both degenerate; allow rounding in the analytic value only
        (if diff <= 1e-12 { 0.0 } else { f64::INFINITY }, diff <= 1e-12)
    };
    BinVerdict {
        analytic,
        empirical,
        std_error,
        z,
        pass,
    }
}

/// Verdict for bins `0..analytic.len()` of a simulated histogram.
pub fn compare_pmf(report: &SimReport, analytic: &[f64], sigmas: f64) -> Vec<BinVerdict> {
    analytic
        .iter()
        .enumerate()
        .map(|(j, &a)| bin_verdict(a, report.pmf(j), report.replications, sigmas))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SlotParams;

    fn cfg(rho: f64, n: u64, x1: u64) -> SimConfig {
        SimConfig::new(
            QueueParams::from_rho(rho).unwrap(),
            ScenarioSpec::poisson(n, x1).unwrap(),
        )
    }

    #[test]
    fn whole_file_prefetched() {
        let r = simulate(&cfg(0.5, 30, 30).replications(200)).unwrap();
        assert_eq!(r.histogram[0], 200);
        assert_eq!(r.pmf(0), 1.0);
    }

    #[test]
    fn counts_and_events() {
        for model in [
            ArrivalModel::Poisson,
            ArrivalModel::Ipp(IppParams::new(0.2, 0.2).unwrap()),
            ArrivalModel::Slotted(SlotParams::new(1.0).unwrap()),
        ] {
            let spec = ScenarioSpec::new(100, 7, model).unwrap();
            let c = SimConfig::new(QueueParams::from_rho(0.9).unwrap(), spec).replications(300);
            let r = simulate(&c).unwrap();
            assert_eq!(r.histogram.iter().sum::<u64>(), 300);
            assert_eq!(r.total_events, 300 * 200);
            assert_eq!(r.histogram.len(), 100 / 7 + 1);
        }
    }

    #[test]
    fn deterministic_and_schedule_independent() {
        let c = cfg(1.1, 200, 10).replications(400).seed(42);
        let a = simulate(&c).unwrap();
        let b = simulate(&c.parallel(false)).unwrap();
        assert_eq!(a, b);
        let other = simulate(&c.seed(43)).unwrap();
        assert_ne!(a.histogram, other.histogram);
    }

    #[test]
    fn two_packet_race() {
        // x1 = 1, N = 2: starvation iff the first packet finishes first
        let r = simulate(&cfg(1.0, 2, 1).replications(20_000).seed(3)).unwrap();
        let v = bin_verdict(0.5, r.pmf(1), r.replications, 4.0);
        assert!(v.pass, "{v:?}");
    }

    #[test]
    fn symmetric_kernel_race() {
        let p = QueueParams::from_rho(1.0).unwrap();
        let f = simulate_kernel_check(KernelSource::Poisson(p), 1, 100_000, 1).unwrap();
        assert!((f[0] - 0.5).abs() < 4.0 * (0.25f64 / 1e5).sqrt());
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verdict_handles_degenerate_bins() {
        assert!(bin_verdict(0.0, 0.0, 100, 3.0).pass);
        assert!(!bin_verdict(0.0, 0.01, 100, 3.0).pass);
        assert!(bin_verdict(1e-6, 0.0, 100, 3.0).pass);
        assert!(!bin_verdict(0.5, 0.0, 100, 3.0).pass);
    }

    #[test]
    fn file_size_samples_have_right_mean() {
        let d = FileSizeDistribution::exponential(1.0 / 2000.0).unwrap();
        let xs = sample_file_sizes(&d, 100_000, 9);
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m - 2000.0).abs() < 4.0 * 2000.0 / (1e5f64).sqrt());
        assert_eq!(xs, sample_file_sizes(&d, 100_000, 9));
    }
}
