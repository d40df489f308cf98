//! Order-fixed reductions and the small statistics toolkit used by the
//! Monte Carlo experiments.

use serde::Serialize;

/// Pairwise (cascade) summation in a fixed association order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
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

/// Mean with a standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Estimate divided by its standard error (0 when both vanish).
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(self.estimate)
            }
        } else {
            self.estimate / self.std_error
        }
    }
}

/// Number of batches used for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 32;

/// Mean and batch-means standard error of a (possibly autocorrelated) series.
///
/// The series is cut into `batches` contiguous blocks of equal length; the
/// standard error is the sample standard deviation of the block means over
/// `sqrt(batches)`. Leftover samples at the end are included in the mean but
/// not in the blocks. With fewer samples than batches every sample is its own
/// block.
pub fn batch_means(values: &[f64], batches: usize) -> Estimate {
    let n = values.len();
    let est = mean(values);
    let b = batches.min(n).max(1);
    if n < 2 || b < 2 {
        return Estimate { estimate: est, std_error: f64::NAN };
    }
    let len = n / b;
    let block_means: Vec<f64> = (0..b).map(|i| mean(&values[i * len..(i + 1) * len])).collect();
    let bm = mean(&block_means);
    let dev: Vec<f64> = block_means.iter().map(|m| (m - bm) * (m - bm)).collect();
    let var = pairwise_sum(&dev) / (b - 1) as f64;
    Estimate { estimate: est, std_error: (var / b as f64).sqrt() }
}

/// Mean and i.i.d. standard error.
pub fn iid_estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    let m = mean(values);
    if n < 2 {
        return Estimate { estimate: m, std_error: f64::NAN };
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    Estimate { estimate: m, std_error: (pairwise_sum(&dev) / ((n - 1) * n) as f64).sqrt() }
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    let slope = pairwise_sum(&sxy) / pairwise_sum(&sxx);
    (my - slope * mx, slope)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut r = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let mx = mean(&rx);
    let my = mean(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}
