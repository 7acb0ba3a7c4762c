//! Reproducible reductions and small regression helpers.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (cascade) summation. The split points depend only on the length,
/// so the result is independent of thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    /// Sample standard deviation of the units the stderr was built from.
    pub spread: f64,
}

impl SampleStats {
    /// Treats every value as an independent draw.
    pub fn from_iid(values: &[f64]) -> Self {
        let n = values.len();
        let m = mean(values);
        let spread = if n > 1 {
            let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
            (pairwise_sum(&sq) / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean: m, stderr: spread / (n.max(1) as f64).sqrt(), n, spread }
    }

    /// Batch-means estimate: each batch is one unit for the stderr, so
    /// correlations inside a batch (e.g. along one path) are accounted for.
    /// Falls back to i.i.d. treatment when there is a single batch.
    pub fn from_batches(batches: &[Vec<f64>]) -> Self {
        let n: usize = batches.iter().map(Vec::len).sum();
        if batches.len() < 2 {
            let all: Vec<f64> = batches.iter().flatten().copied().collect();
            return Self::from_iid(&all);
        }
        let sums: Vec<f64> = batches.iter().map(|b| pairwise_sum(b)).collect();
        let overall = pairwise_sum(&sums) / n as f64;
        let means: Vec<f64> = batches.iter().map(|b| mean(b)).collect();
        let between = Self::from_iid(&means);
        Self { mean: overall, stderr: between.stderr, n, spread: between.spread }
    }
}

/// Ordinary least-squares line y = intercept + slope·x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return domain("linear fit needs at least two (x, y) pairs of equal length");
    }
    let n = xs.len() as f64;
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("linear fit needs distinct x values");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if xs.len() > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit { slope, intercept, slope_stderr })
}

/// Slope of ln y against ln x.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return domain("log-log fit needs strictly positive data");
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

/// SplitMix64 finalizer; derives independent seeds from a master seed.
pub fn splitmix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
