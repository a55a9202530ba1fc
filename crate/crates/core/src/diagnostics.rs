//! Empirical-distribution diagnostics: per-coordinate Wasserstein-1 distances,
//! W1 convergence curves, histograms, mode occupancy and burn-in trimming.

use crate::samplers::ChainRecord;
use crate::{Error, Result};

/// Sorted, finite sample of one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMarginal {
    coord: usize,
    values: Vec<f64>,
}

impl EmpiricalMarginal {
    pub fn new(coord: usize, mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "empirical marginal must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { coord, values })
    }

    pub fn from_chain(chain: &ChainRecord, coord: usize) -> Result<Self> {
        Self::new(coord, chain.coord(coord))
    }

    pub fn coord(&self) -> usize {
        self.coord
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lower empirical quantile: the smallest value with CDF ≥ p.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.values.len();
        let rank = (p.clamp(0.0, 1.0) * n as f64).ceil() as usize;
        self.values[rank.clamp(1, n) - 1]
    }
}

/// Wasserstein-1 distance between two 1-D empirical measures, computed as the
/// L1 distance between their quantile functions.
pub fn wasserstein1(a: &EmpiricalMarginal, b: &EmpiricalMarginal) -> Result<f64> {
    wasserstein1_sorted(&a.values, &b.values)
}

/// Same as [`wasserstein1`] on already sorted slices.
pub fn wasserstein1_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("wasserstein1 input"));
    }
    let (n, m) = (a.len(), b.len());
    if n == m {
        let total: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / n as f64);
    }
    // Quantile functions are step functions with jumps at i/n and j/m.
    // Positions are tracked in units of 1/(n·m) so breakpoints compare exactly.
    let (n128, m128) = (n as u128, m as u128);
    let scale = (n128 * m128) as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos: u128 = 0;
    let mut total = 0.0;
    while i < n && j < m {
        let end_a = (i as u128 + 1) * m128;
        let end_b = (j as u128 + 1) * n128;
        let end = end_a.min(end_b);
        total += (a[i] - b[j]).abs() * ((end - pos) as f64);
        pos = end;
        if end == end_a {
            i += 1;
        }
        if end == end_b {
            j += 1;
        }
    }
    Ok(total / scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct W1Curve {
    pub checkpoints: Vec<usize>,
    pub distances: Vec<f64>,
}

/// W1 between the first `k` chain states (coordinate `coord`) and the full
/// reference, for every `k` in `checkpoints`.
pub fn w1_curve(
    chain: &ChainRecord,
    reference: &EmpiricalMarginal,
    coord: usize,
    checkpoints: &[usize],
) -> Result<W1Curve> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints", "must be strictly increasing"));
    }
    if let Some(&last) = checkpoints.last() {
        if last > chain.len() {
            return Err(Error::invalid(
                "checkpoints",
                format!("checkpoint {last} exceeds chain length {}", chain.len()),
            ));
        }
    }
    if coord >= chain.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.dim(),
            got: coord + 1,
        });
    }
    let values = chain.coord(coord);
    let mut distances = Vec::with_capacity(checkpoints.len());
    for &k in checkpoints {
        let mut prefix = values[..k].to_vec();
        prefix.sort_by(f64::total_cmp);
        distances.push(wasserstein1_sorted(&prefix, &reference.values)?);
    }
    Ok(W1Curve {
        checkpoints: checkpoints.to_vec(),
        distances,
    })
}

/// `1000 · 2^j` for every such value below `len`, followed by `len` itself.
pub fn log_checkpoints(len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1000usize), |c| c.checked_mul(2))
        .take_while(|&c| c < len)
        .collect();
    if len > 0 {
        out.push(len);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Values outside `[lo, hi)` (or non-finite); they are not binned.
    pub dropped: u64,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.counts.len())
            .map(|i| self.lo + (i as f64 + 0.5) * w)
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    if !(lo < hi) {
        return Err(Error::invalid("histogram range", format!("need lo < hi, got [{lo}, {hi})")));
    }
    if bins == 0 {
        return Err(Error::invalid("bins", "must be at least 1"));
    }
    let mut counts = vec![0u64; bins];
    let mut dropped = 0;
    let width = (hi - lo) / bins as f64;
    for &v in values {
        if !(v >= lo && v < hi) {
            dropped += 1;
            continue;
        }
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram {
        lo,
        hi,
        counts,
        dropped,
    })
}

/// Number of `mode_locations` whose `±radius` window (over bin centres) holds at
/// least `min_mass_fraction` of the histogram's total mass.
pub fn count_occupied_modes(
    counts: &[u64],
    bin_centers: &[f64],
    mode_locations: &[f64],
    radius: f64,
    min_mass_fraction: f64,
) -> usize {
    assert_eq!(counts.len(), bin_centers.len(), "one centre per bin");
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0;
    }
    mode_locations
        .iter()
        .filter(|&&loc| {
            let mass: u64 = counts
                .iter()
                .zip(bin_centers)
                .filter(|(_, &c)| (c - loc).abs() <= radius)
                .map(|(n, _)| n)
                .sum();
            mass as f64 / total as f64 >= min_mass_fraction
        })
        .count()
}

/// Drops the first `k` samples; acceptance counters cover the whole chain.
pub fn burn_in(chain: &ChainRecord, k: usize) -> Result<ChainRecord> {
    if k > chain.len() {
        return Err(Error::invalid(
            "burn_in",
            format!("cannot drop {k} of {} samples", chain.len()),
        ));
    }
    let mut out = chain.clone();
    out.drop_front(k);
    Ok(out)
}

/// Width of the central `[lo_p, hi_p]` quantile interval.
pub fn quantile_range(marginal: &EmpiricalMarginal, lo_p: f64, hi_p: f64) -> f64 {
    marginal.quantile(hi_p) - marginal.quantile(lo_p)
}
