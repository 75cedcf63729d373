//! Recursive solver over the state seen by each arriving packet.
//!
//! State `(i, n)`: an arriving packet finds `i` packets in the buffer and `n`
//! packets, itself included, are still to arrive. Between two arrivals `k`
//! of the `i + 1` buffered packets depart with probability `Q_{i+1}(k)`; if
//! all of them depart, the next arrival finds the buffer empty and a
//! starvation has occurred. States with `i + n > N` are unreachable.
//!
//! Both supported kernels are finite geometric mixtures,
//! `Q_i(k) = sum_c c * r^k` for `k < i` with the remaining mass on `k = i`,
//! so every sum over `k` is maintained as a running accumulator and one
//! step in `n` costs `O(N)` per starvation count.

use serde::Serialize;

use crate::error::{param_err, Result};
use crate::params::{IppParams, Method, QueueParams, StarvationDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelVariant {
    /// Poisson arrivals.
    Mm1,
    /// Interrupted Poisson arrivals; every arrival happens in the ON state.
    IppOn,
}

/// Departure-count law during one inter-arrival period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepartureKernel {
    variant: KernelVariant,
    /// `(c, r)` pairs with `0 < r < 1`.
    terms: Vec<(f64, f64)>,
    i_max: u64,
}

impl DepartureKernel {
    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    /// Largest number of buffered packets the kernel is defined for.
    pub fn i_max(&self) -> u64 {
        self.i_max
    }

    fn geometric(&self, k: u64) -> f64 {
        self.terms.iter().map(|&(c, r)| c * r.powf(k as f64)).sum()
    }

    fn boundary(&self, i: u64) -> f64 {
        self.terms.iter().map(|&(c, r)| c * r.powf(i as f64) / (1.0 - r)).sum()
    }

    /// `Q_i(k)`: `k` of `i` buffered packets depart before the next arrival.
    pub fn q(&self, i: u64, k: u64) -> f64 {
        debug_assert!(i <= self.i_max);
        if k < i {
            self.geometric(k)
        } else if k == i {
            self.boundary(i)
        } else {
            0.0
        }
    }

    /// `Q_i(0..=i)`.
    pub fn row(&self, i: u64) -> Vec<f64> {
        (0..=i).map(|k| self.q(i, k)).collect()
    }
}

/// `Q_i(k) = p q^k` for `k < i`, `Q_i(i) = q^i`.
pub fn mm1_kernel(params: &QueueParams, i_max: u64) -> Result<DepartureKernel> {
    if i_max < 1 {
        return param_err("kernel needs i_max >= 1");
    }
    Ok(DepartureKernel {
        variant: KernelVariant::Mm1,
        terms: vec![(params.p(), params.q())],
        i_max,
    })
}

/// Kernel for arrivals modulated by an ON/OFF chain (ON->OFF rate `alpha`,
/// OFF->ON rate `beta`); service continues in both states. Each period
/// starts in ON, right after an arrival, so the periods are i.i.d.
pub fn ipp_kernel(params: &QueueParams, ipp: &IppParams, i_max: u64) -> Result<DepartureKernel> {
    if i_max < 1 {
        return param_err("kernel needs i_max >= 1");
    }
    let IppParams { alpha, beta } = IppParams::new(ipp.alpha, ipp.beta)?;
    let (lambda, mu) = (params.lambda(), params.mu());
    let s = lambda + alpha + beta;
    let disc = s * s - 4.0 * lambda * beta;
    assert!(
        disc >= 0.0,
        "discriminant is (lambda - beta)^2 + alpha^2 + 2 alpha (lambda + beta) >= 0"
    );
    let a1 = 1.0 + s / (2.0 * mu) + disc.sqrt() / (2.0 * mu);
    let a2 = 1.0 + s / (2.0 * mu) - disc.sqrt() / (2.0 * mu);
    // coefficients in units of mu; exact for any service rate
    let mu2 = mu * mu;
    let c1 = (lambda * (beta + mu) - lambda * mu * a1) / (a1 * (a2 - a1) * mu2);
    let c2 = (lambda * (beta + mu) - lambda * mu * a2) / (a2 * (a1 - a2) * mu2);
    Ok(DepartureKernel {
        variant: KernelVariant::IppOn,
        terms: vec![(c1, 1.0 / a1), (c2, 1.0 / a2)],
        i_max,
    })
}

fn check_scenario(kernel: &DepartureKernel, n: u64, x1: u64) -> Result<()> {
    if n < 1 || x1 < 1 || x1 > n {
        return param_err(format!("threshold x1 = {x1} must lie in 1..=N (N = {n})"));
    }
    if kernel.i_max < n {
        return param_err(format!("kernel defined up to i = {}, file needs {n}", kernel.i_max));
    }
    Ok(())
}

/// One step in `n` for a single starvation count: given `R_m(n-1)` for
/// `m = 1..` (`next[m]`) and `R_0(n-1)` (`next[0]`), fills
/// `out[i] = sum_{k<=i} Q_{i+1}(k) R_{i+1-k}(n-1) + Q_{i+1}(i+1) R_0(n-1)`
/// for `i = 0..out.len()`.
fn step(kernel: &DepartureKernel, next: &[f64], out: &mut [f64]) {
    let mut acc = [0.0f64; 2];
    let mut tail_pow = [1.0f64; 2];
    debug_assert!(kernel.terms.len() <= 2);
    for (i, slot) in out.iter_mut().enumerate() {
        let mut v = 0.0;
        for (t, &(c, r)) in kernel.terms.iter().enumerate() {
            let incoming = next.get(i + 1).copied().unwrap_or(0.0);
            acc[t] = r * acc[t] + c * incoming;
            tail_pow[t] *= r;
            v += acc[t] + c * tail_pow[t] / (1.0 - r) * next[0];
        }
        *slot = v;
    }
}

/// Table of starvation probabilities `P_i(n)` for every reachable state of
/// a file of `N` packets.
#[derive(Debug, Clone, PartialEq)]
pub struct StarvationTable {
    n_total: u64,
    /// `rows[n - 1][i]` holds the no-prior-starvation value for `i = 0..=N-n`;
    /// entry `i = 0` is the case where the empty buffer is the initial one.
    rows: Vec<Vec<f64>>,
}

impl StarvationTable {
    pub fn build(kernel: &DepartureKernel, n_total: u64) -> Result<Self> {
        check_scenario(kernel, n_total, 1)?;
        let n_total_us = n_total as usize;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_total_us);
        // n = 1: the last packet arrives, nothing can starve afterwards
        rows.push(vec![0.0; n_total_us]);
        for n in 2..=n_total_us {
            let prev = &rows[n - 2];
            // R_0 = 1: an empty buffer seen by an arrival is a starvation
            let mut next = prev.clone();
            next[0] = 1.0;
            let mut out = vec![0.0; n_total_us - n + 1];
            step(kernel, &next, &mut out);
            rows.push(out);
        }
        Ok(Self { n_total, rows })
    }

    pub fn file_size(&self) -> u64 {
        self.n_total
    }

    /// `P_i(n)`; 1 for `i = 0`, 0 for unreachable states.
    pub fn get(&self, i: u64, n: u64) -> f64 {
        if n < 1 || i + n > self.n_total {
            return 0.0;
        }
        if i == 0 {
            return 1.0;
        }
        self.rows[n as usize - 1][i as usize]
    }

    /// Starvation probability with playback starting at `x1` packets.
    pub fn starvation_probability(&self, x1: u64) -> f64 {
        let n = self.n_total - x1 + 1;
        self.rows[n as usize - 1][x1 as usize - 1].clamp(0.0, 1.0)
    }
}

/// Probability of at least one starvation, using two `n`-slabs.
pub fn starvation_probability_recursive(kernel: &DepartureKernel, n_total: u64, x1: u64) -> Result<f64> {
    check_scenario(kernel, n_total, x1)?;
    let top = (n_total - x1 + 1) as usize;
    let width = n_total as usize;
    let mut cur = vec![0.0; width];
    let mut out = vec![0.0; width];
    for n in 2..=top {
        cur[0] = 1.0;
        let len = width - n + 1;
        step(kernel, &cur[..len + 1], &mut out[..len]);
        std::mem::swap(&mut cur, &mut out);
        cur.truncate(len.max(1));
        cur.resize(width, 0.0);
    }
    Ok(cur[x1 as usize - 1].clamp(0.0, 1.0))
}

/// Distribution of the number of starvations, resuming playback at `x1`
/// packets after every starvation.
pub fn starvation_pmf_recursive(
    kernel: &DepartureKernel,
    n_total: u64,
    x1: u64,
    j_max: u64,
) -> Result<StarvationDistribution> {
    starvation_pmf_recursive_with_resume(kernel, n_total, x1, j_max, x1)
}

/// As [`starvation_pmf_recursive`], but playback resumes once `resume`
/// packets are buffered after a starvation (or all remaining packets, if
/// fewer).
pub fn starvation_pmf_recursive_with_resume(
    kernel: &DepartureKernel,
    n_total: u64,
    x1: u64,
    j_max: u64,
    resume: u64,
) -> Result<StarvationDistribution> {
    check_scenario(kernel, n_total, x1)?;
    let max_j = n_total / x1;
    if j_max > max_j {
        return param_err(format!("j_max = {j_max} exceeds floor(N/x1) = {max_j}"));
    }
    if resume < 1 {
        return param_err("resume threshold must be at least 1");
    }
    let width = n_total as usize;
    let jn = j_max as usize + 1;
    let b = resume as usize - 1;
    let top = width - x1 as usize + 1;

    // t_b[j][n]: no-prior-starvation value at i = b, kept for every n
    let mut t_b = vec![vec![0.0; width + 1]; jn];
    // r[j][i] holds R_i(j, n) for the current n, with R_0 in slot 0
    let mut r = vec![vec![0.0; width + 1]; jn];
    let mut t = vec![vec![0.0; width + 1]; jn];
    let mut top_values = vec![0.0; jn];

    for n in 1..=top {
        let len = width - n + 1;
        for j in 0..jn {
            if n == 1 {
                t[j][..len].fill(0.0);
                if j == 0 {
                    t[j][..len].fill(1.0);
                }
            } else {
                let (prev, cur) = (&r[j], &mut t[j]);
                step(kernel, &prev[..len + 1], &mut cur[..len]);
            }
            t[j][len..].fill(0.0);
            if b < len {
                t_b[j][n] = t[j][b];
            }
        }
        if n == top {
            for (j, v) in top_values.iter_mut().enumerate() {
                *v = t[j][x1 as usize - 1];
            }
            break;
        }
        for j in 0..jn {
            r[j].copy_from_slice(&t[j]);
            r[j][0] = if n <= b {
                (j == 1) as u8 as f64
            } else if j == 0 {
                0.0
            } else {
                t_b[j - 1][n - b]
            };
        }
    }
    let method = match kernel.variant {
        KernelVariant::Mm1 => Method::Recursive,
        KernelVariant::IppOn => Method::Ipp,
    };
    Ok(StarvationDistribution::new(top_values, max_j, method))
}
