//! Shift-invariant upper-triangular matrices.
//!
//! The inter-starvation matrices are Toeplitz on a band: entry `(r, c)`
//! depends only on `c - r`, and is zero below a minimum offset or outside a
//! rectangle of admissible rows and columns. Storing the generator instead of
//! the dense matrix makes a vector product `O(N * band)` and a matrix product
//! a truncated convolution of generators, `O(N^2)`.
//!
//! Indices are 1-based to match packet numbers; slot 0 of every vector is
//! unused and always zero.

// Loops index several parallel arrays by packet number.
#![allow(clippy::needless_range_loop)]

use std::ops::RangeInclusive;

use crate::error::{param_err, Result};
use crate::numeric::KahanSum;

#[derive(Debug, Clone, PartialEq)]
pub struct BandedToeplitzMatrix {
    size: usize,
    min_offset: usize,
    /// `generator[d]` is the value on offset `d = col - row`; length `size`.
    generator: Vec<f64>,
    rows: (usize, usize),
    cols: (usize, usize),
}

impl BandedToeplitzMatrix {
    /// `generator[d]` for `d < min_offset` is ignored (treated as zero).
    /// Row and column ranges are inclusive and 1-based; an empty range
    /// gives the zero matrix.
    pub fn new(
        size: usize,
        min_offset: usize,
        mut generator: Vec<f64>,
        rows: RangeInclusive<usize>,
        cols: RangeInclusive<usize>,
    ) -> Result<Self> {
        if generator.len() < size {
            return param_err(format!(
                "generator has {} entries, matrix needs {size}",
                generator.len()
            ));
        }
        generator.truncate(size);
        for g in generator.iter_mut().take(min_offset.min(size)) {
            *g = 0.0;
        }
        let clip = |r: RangeInclusive<usize>| {
            let lo = (*r.start()).max(1);
            let hi = (*r.end()).min(size);
            (lo, hi)
        };
        Ok(Self {
            size,
            min_offset,
            generator,
            rows: clip(rows),
            cols: clip(cols),
        })
    }

    /// The matrix of event `S_l(k_l, k_{l+1})` for a path with `j` starvations
    /// in a file of `n` packets: nonzero only for `k_l >= l*x1` and
    /// `k_l + x1 <= k_{l+1} < n - (j-l-1)*x1`.
    pub fn inter_starvation(generator: &[f64], n: usize, x1: usize, j: usize, l: usize) -> Result<Self> {
        if l < 1 || l + 1 > j {
            return param_err(format!("level l = {l} must satisfy 1 <= l <= j-1 (j = {j})"));
        }
        let tail = (j - l - 1) * x1;
        let col_hi = if n > tail + 1 { n - tail - 1 } else { 0 };
        Self::new(n, x1, generator.to_vec(), l * x1..=n, 1..=col_hi)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn min_offset(&self) -> usize {
        self.min_offset
    }

    pub fn rows(&self) -> RangeInclusive<usize> {
        self.rows.0..=self.rows.1
    }

    pub fn cols(&self) -> RangeInclusive<usize> {
        self.cols.0..=self.cols.1
    }

    pub fn generator(&self) -> &[f64] {
        &self.generator
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let in_rows = row >= self.rows.0 && row <= self.rows.1;
        let in_cols = col >= self.cols.0 && col <= self.cols.1;
        if in_rows && in_cols && col >= row + self.min_offset {
            self.generator[col - row]
        } else {
            0.0
        }
    }

    /// Row vector times matrix. `v` is indexed `0..=size`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.size + 1);
        let mut acc = vec![KahanSum::new(); self.size + 1];
        for r in self.rows.0..=self.rows.1 {
            let vr = v[r];
            if vr == 0.0 {
                continue;
            }
            let c_lo = (r + self.min_offset).max(self.cols.0);
            for c in c_lo..=self.cols.1 {
                acc[c].push(vr * self.generator[c - r]);
            }
        }
        acc.iter().map(KahanSum::value).collect()
    }

    /// Matrix times column vector. `v` is indexed `0..=size`.
    pub fn right_mul(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.size + 1);
        let mut out = vec![0.0; self.size + 1];
        for r in self.rows.0..=self.rows.1 {
            let c_lo = (r + self.min_offset).max(self.cols.0);
            let mut acc = KahanSum::new();
            for c in c_lo..=self.cols.1 {
                acc.push(self.generator[c - r] * v[c]);
            }
            out[r] = acc.value();
        }
        out
    }

    fn is_empty(&self) -> bool {
        self.rows.0 > self.rows.1 || self.cols.0 > self.cols.1
    }

    /// Product of two banded Toeplitz matrices.
    ///
    /// The result is again banded Toeplitz provided no admissible path
    /// `row -> m -> col` is cut by the inner masks; otherwise an error is
    /// returned. The inter-starvation matrices of one path always satisfy
    /// this.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.size != rhs.size {
            return param_err(format!("size mismatch: {} vs {}", self.size, rhs.size));
        }
        let n = self.size;
        let min_offset = self.min_offset + rhs.min_offset;
        if self.is_empty() || rhs.is_empty() || min_offset >= n {
            return Self::new(
                n,
                min_offset,
                vec![0.0; n],
                RangeInclusive::new(1, 0),
                RangeInclusive::new(1, 0),
            );
        }
        let inner_lo = self.cols.0.max(rhs.rows.0);
        let inner_hi = self.cols.1.min(rhs.rows.1);
        let first_mid = self.rows.0 + self.min_offset;
        let last_mid = rhs.cols.1.saturating_sub(rhs.min_offset);
        if first_mid < inner_lo || last_mid > inner_hi {
            return param_err("product is not shift-invariant: inner masks cut the band");
        }
        let mut generator = vec![0.0; n];
        for (d, slot) in generator.iter_mut().enumerate().skip(min_offset) {
            let mut acc = KahanSum::new();
            for u in self.min_offset..=d - rhs.min_offset {
                acc.push(self.generator[u] * rhs.generator[d - u]);
            }
            *slot = acc.value();
        }
        Self::new(n, min_offset, generator, self.rows(), rhs.cols())
    }

    #[cfg(test)]
    pub(crate) fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..=self.size)
            .map(|r| {
                (0..=self.size)
                    .map(|c| if r == 0 || c == 0 { 0.0 } else { self.get(r, c) })
                    .collect()
            })
            .collect()
    }
}

/// Event probabilities of a starvation path in a file of `n` packets with
/// threshold `x1`, driven by a first-passage generator `g[d]`: the
/// probability that, starting playback with `x1` packets buffered, the buffer
/// first empties at the `d`-th departure.
///
/// Both the M/M/1 (Ballot) and the slotted (Takacs) solvers reduce to this.
#[derive(Debug, Clone)]
pub(crate) struct StarvationEvents {
    n: usize,
    x1: usize,
    generator: Vec<f64>,
    /// `cumulative[m]` = starvation probability of a fresh file of `m` packets.
    cumulative: Vec<f64>,
}

impl StarvationEvents {
    /// `generator` must have length `n`; entries below `x1` are ignored.
    pub(crate) fn new(n: usize, x1: usize, mut generator: Vec<f64>) -> Self {
        debug_assert_eq!(generator.len(), n);
        for g in generator.iter_mut().take(x1.min(n)) {
            *g = 0.0;
        }
        let mut cumulative = vec![0.0; n + 1];
        let mut acc = KahanSum::new();
        for m in 1..=n {
            // file of m packets can starve at departures x1..=m-1
            if m > x1 {
                acc.push(generator[m - 1]);
            }
            cumulative[m] = acc.value();
        }
        Self {
            n,
            x1,
            generator,
            cumulative,
        }
    }

    pub(crate) fn starvation_probability(&self) -> f64 {
        self.cumulative[self.n]
    }

    pub(crate) fn first_vector(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n + 1];
        v[self.x1..self.n].copy_from_slice(&self.generator[self.x1..self.n]);
        v
    }

    /// `P_U_j(k)` without the `k < j*x1` branch.
    fn no_further_starvation(&self, k: usize) -> f64 {
        if k == 0 || k >= self.n {
            0.0
        } else if k + self.x1 >= self.n {
            1.0
        } else {
            1.0 - self.cumulative[self.n - k]
        }
    }

    pub(crate) fn last_vector(&self, j: usize) -> Vec<f64> {
        (0..=self.n)
            .map(|k| {
                if k < j * self.x1 {
                    0.0
                } else {
                    self.no_further_starvation(k)
                }
            })
            .collect()
    }

    pub(crate) fn inter_matrix(&self, j: usize, l: usize) -> Result<BandedToeplitzMatrix> {
        BandedToeplitzMatrix::inter_starvation(&self.generator, self.n, self.x1, j, l)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).collect::<KahanSum>().value()
    }

    /// `P(j)` for `j = 0..=j_max`, chaining one vector through the
    /// inter-starvation matrices. The per-`j` masks only exclude paths that
    /// already have zero weight, so one chain serves every `j`.
    pub(crate) fn pmf(&self, j_max: usize) -> Vec<f64> {
        let mut pmf = Vec::with_capacity(j_max + 1);
        pmf.push(1.0 - self.starvation_probability());
        if j_max == 0 {
            return pmf;
        }
        let n = self.n;
        let step = BandedToeplitzMatrix::new(n, self.x1, self.generator.clone(), self.x1..=n, 1..=n.saturating_sub(1))
            .expect("generator length checked at construction");
        let mut v = self.first_vector();
        for j in 1..=j_max {
            if v.iter().all(|&x| x == 0.0) {
                pmf.push(0.0);
                continue;
            }
            pmf.push(Self::dot(&v, &self.last_vector(j)));
            if j < j_max {
                v = step.left_mul(&v);
            }
        }
        pmf
    }

    /// `P(j)` as `P_E (prod_l P_S_l) P_U_j^T`, with the matrix chain formed
    /// by banded products and the exact per-`j` masks.
    pub(crate) fn pmf_entry_by_products(&self, j: usize) -> Result<f64> {
        match j {
            0 => Ok(1.0 - self.starvation_probability()),
            1 => Ok(Self::dot(&self.first_vector(), &self.last_vector(1))),
            _ => {
                let mut chain = self.inter_matrix(j, 1)?;
                for l in 2..j {
                    chain = chain.mul(&self.inter_matrix(j, l)?)?;
                }
                let row = chain.left_mul(&self.first_vector());
                Ok(Self::dot(&row, &self.last_vector(j)))
            }
        }
    }
}
