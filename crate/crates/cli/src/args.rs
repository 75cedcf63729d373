use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::sweep::Sweep;

#[derive(Debug, Parser)]
#[command(
    name = "playout",
    version,
    about = "Starvation analysis of streaming playout buffers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ballot-theorem starvation distribution (Poisson arrivals).
    Exact(ExactArgs),
    /// Recursive solver, Poisson or ON/OFF arrivals.
    Recursive(RecursiveArgs),
    /// Slotted playback (one packet per slot).
    Takacs(TakacsArgs),
    /// File-level fluid starvation probability.
    Fluid(FluidArgs),
    /// QoE-optimal prefetch threshold.
    Qoe(QoeArgs),
    /// Monte Carlo starvation histogram.
    Simulate(SimulateArgs),
    /// Analytic solvers against Monte Carlo on one scenario.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistArg {
    Exp,
    Pareto,
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Finite,
    Supercritical,
    Subcritical,
    FileLevel,
}

/// Where and how results are written. Not part of the manifest.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output path; the extension is replaced per format. Stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RateArgs {
    /// Arrival rate, packets/s.
    #[arg(long, conflicts_with = "rho")]
    pub lambda: Option<f64>,
    /// Service rate, packets/s.
    #[arg(long, conflicts_with = "rho")]
    pub mu: Option<f64>,
    /// Traffic intensity lambda/mu, with mu = 1.
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SizeArgs {
    /// File size, packets.
    #[arg(long, conflicts_with = "n_sweep")]
    pub n: Option<u64>,
    #[arg(long, value_name = "START:END:STEP")]
    pub n_sweep: Option<Sweep>,
    /// Prefetch threshold, packets.
    #[arg(long, conflicts_with = "x1_sweep")]
    pub x1: Option<u64>,
    #[arg(long, value_name = "START:END:STEP")]
    pub x1_sweep: Option<Sweep>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OnOffArgs {
    /// ON->OFF rate of the arrival modulation, 1/s.
    #[arg(long, requires = "beta")]
    pub alpha: Option<f64>,
    /// OFF->ON rate of the arrival modulation, 1/s.
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rates: RateArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sizes: SizeArgs,
    /// Largest starvation count reported.
    #[arg(long, default_value_t = 3)]
    pub jmax: u64,
    /// Binomial evaluation; exact up to 2000 packets, Gaussian above.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecursiveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rates: RateArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sizes: SizeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub on_off: OnOffArgs,
    #[arg(long, default_value_t = 3)]
    pub jmax: u64,
    /// Packets re-buffered after a starvation; defaults to x1.
    #[arg(long)]
    pub resume: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TakacsArgs {
    /// Arrival rate, packets/s.
    #[arg(long)]
    pub lambda: f64,
    /// Slot length, s.
    #[arg(long, default_value_t = 1.0)]
    pub slot_d: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub sizes: SizeArgs,
    #[arg(long, default_value_t = 3)]
    pub jmax: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FluidArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rates: RateArgs,
    /// Prefetch threshold, packets.
    #[arg(long, conflicts_with = "x1_sweep")]
    pub x1: Option<f64>,
    #[arg(long, value_name = "START:END:STEP")]
    pub x1_sweep: Option<Sweep>,
    /// File-size families; comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub dist: Vec<DistArg>,
    /// Exponential rate, 1/packets; also the mean 1/theta that Pareto and
    /// log-normal are matched to when their second parameter is absent.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Pareto minimum file size, packets.
    #[arg(long)]
    pub nm: Option<f64>,
    /// Pareto tail exponent.
    #[arg(long)]
    pub upsilon: Option<f64>,
    /// Log-normal location, ln(packets).
    #[arg(long, allow_negative_numbers = true)]
    pub varrho: Option<f64>,
    /// Log-normal scale, ln(packets).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Observed file sizes, one positive integer per line.
    #[arg(long)]
    pub sizes_csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QoeArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[command(flatten)]
    #[serde(flatten)]
    pub rates: RateArgs,
    #[arg(long, value_name = "START:END:STEP", conflicts_with_all = ["lambda", "rho"])]
    pub lambda_sweep: Option<Sweep>,
    /// Start-up delay weight.
    #[arg(long, conflicts_with = "gamma_sweep")]
    pub gamma: Option<f64>,
    #[arg(long, value_name = "START:END:STEP")]
    pub gamma_sweep: Option<Sweep>,
    /// Playback-duration weight.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// File size for the finite scenario, packets.
    #[arg(long)]
    pub n: Option<u64>,
    /// Exponential file-size rate for the file-level scenario, 1/packets.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Starvations tolerated without penalty (finite scenario).
    #[arg(long, default_value_t = 0)]
    pub tolerance: u64,
    #[arg(long)]
    pub min_x1: Option<u64>,
    #[arg(long)]
    pub max_x1: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = 5000)]
    pub replications: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Slotted playback with this slot length, s (one packet per slot).
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    pub slot_d: Option<f64>,
    /// Packets re-buffered after a starvation; defaults to x1.
    #[arg(long)]
    pub resume: Option<u64>,
    /// Run replications on one thread. Output is identical either way.
    #[arg(long)]
    #[serde(skip)]
    pub serial: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rates: RateArgs,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub x1: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub on_off: OnOffArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rates: RateArgs,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub x1: u64,
    /// Largest starvation count compared; defaults to floor(N/x1).
    #[arg(long)]
    pub jmax: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub on_off: OnOffArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    /// Standard errors allowed per bin.
    #[arg(long, default_value_t = 3.0)]
    pub sigmas: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}
