//! Rescaled-range (R/S) analysis.
//!
//! For a block `x_1..x_n` with partial sums `Y_k`, the adjusted range is
//! `R = max_k (Y_k - k/n Y_n) - min_k (Y_k - k/n Y_n)` and `S` is the sample
//! standard deviation (divisor `n - 1`). The Hurst exponent is the slope of
//! `log2 E[R/S]` against `log2 n` across block sizes.

mod suite;

use serde::{Deserialize, Serialize};

pub use suite::{expected_rs, hurst_suite, HurstSuite, SuiteConfig};

use crate::regression::{linear_fit, LineFit};
use crate::series::{centered_ss, is_flat, mean, TimeSeries};
use crate::warning::{Warning, WarningCode};
use crate::{Error, Result};

pub const DEFAULT_MIN_WINDOW: usize = 8;

/// Mean R/S over the full non-overlapping blocks of one window size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsPoint {
    pub window: usize,
    pub mean_rs: f64,
    /// Sample standard deviation of R/S across blocks; 0 for a single block.
    pub std_rs: f64,
    /// Blocks that entered the mean.
    pub blocks: usize,
    /// Zero-variance blocks left out.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub h: f64,
    pub std_err: f64,
    pub r_squared: f64,
    pub weighted: bool,
    /// `1 / h`; absent when `h <= 0`.
    pub fractal_dimension: Option<f64>,
    pub points_used: usize,
    /// Intercept of the log2-log2 line, for drawing the fit.
    pub intercept: f64,
}

impl HurstEstimate {
    fn from_fit(fit: LineFit, weighted: bool) -> Self {
        Self {
            h: fit.slope,
            std_err: fit.std_err,
            r_squared: fit.r_squared,
            weighted,
            fractal_dimension: (fit.slope > 0.0).then(|| 1.0 / fit.slope),
            points_used: fit.points,
            intercept: fit.intercept,
        }
    }

    /// Estimates outside `(0, 1)` are kept but flagged.
    pub fn range_warning(&self) -> Option<Warning> {
        (!(self.h > 0.0 && self.h < 1.0)).then(|| {
            Warning::new(
                WarningCode::HurstOutOfRange,
                format!(
                    "fitted H = {:.4} lies outside (0, 1); the series may be non-stationary",
                    self.h
                ),
            )
        })
    }
}

/// Fractal correlation of successive increments, `2^(2H) = 2 + 2 rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractalSummary {
    pub rho: f64,
}

/// Block sizes at which R/S is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleScheme {
    /// `min, 2 min, 4 min, ... <= n/2`, plus `n/2` and `n`.
    Geometric { min_window: usize },
    /// `n, n/2, n/4, ...` (floored) down to `min_window`.
    Halving { min_window: usize },
    /// Caller-chosen sizes, each in `2..=n`.
    Explicit(Vec<usize>),
}

impl Default for ScaleScheme {
    fn default() -> Self {
        ScaleScheme::Geometric {
            min_window: DEFAULT_MIN_WINDOW,
        }
    }
}

impl ScaleScheme {
    /// Sorted, de-duplicated window sizes for a series of length `n`.
    pub fn windows(&self, n: usize) -> Result<Vec<usize>> {
        let mut w = match self {
            ScaleScheme::Geometric { min_window } | ScaleScheme::Halving { min_window } => {
                let min = *min_window;
                if min < 2 {
                    return Err(Error::validation("min_window must be at least 2"));
                }
                if n < 2 * min {
                    return Err(Error::validation(format!(
                        "series of length {n} is too short for min_window {min} (need {})",
                        2 * min
                    )));
                }
                let mut w = Vec::new();
                if matches!(self, ScaleScheme::Geometric { .. }) {
                    let mut s = min;
                    while s <= n / 2 {
                        w.push(s);
                        s *= 2;
                    }
                    w.push(n / 2);
                    w.push(n);
                } else {
                    let mut s = n;
                    while s >= min {
                        w.push(s);
                        s /= 2;
                    }
                }
                w
            }
            ScaleScheme::Explicit(sizes) => {
                if let Some(bad) = sizes.iter().find(|&&s| s < 2 || s > n) {
                    return Err(Error::validation(format!(
                        "window {bad} is outside 2..={n}"
                    )));
                }
                sizes.clone()
            }
        };
        w.sort_unstable();
        w.dedup();
        if w.is_empty() {
            return Err(Error::validation("no window sizes selected"));
        }
        Ok(w)
    }
}

/// R/S of one block. Fails on zero variance.
pub fn rs_statistic(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::validation("R/S needs at least 2 samples"));
    }
    let m = mean(x);
    let ss = centered_ss(x, m);
    if is_flat(x, ss) {
        return Err(Error::numeric("constant block: R/S is undefined"));
    }
    // Y_k - (k/n) Y_n is the partial sum of the mean-adjusted samples.
    let mut acc = 0.0;
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for v in x {
        acc += v - m;
        hi = hi.max(acc);
        lo = lo.min(acc);
    }
    let s = (ss / (n - 1) as f64).sqrt();
    Ok((hi - lo) / s)
}

/// Mean R/S for a block size; `None` when every block is flat.
fn rs_point(x: &[f64], window: usize) -> Option<RsPoint> {
    let mut vals = Vec::with_capacity(x.len() / window);
    let mut skipped = 0;
    for block in x.chunks_exact(window) {
        match rs_statistic(block) {
            Ok(v) => vals.push(v),
            Err(_) => skipped += 1,
        }
    }
    if vals.is_empty() {
        return None;
    }
    let k = vals.len();
    let mean_rs = mean(&vals);
    let std_rs = if k > 1 {
        (centered_ss(&vals, mean_rs) / (k - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(RsPoint {
        window,
        mean_rs,
        std_rs,
        blocks: k,
        skipped,
    })
}

pub(crate) fn rs_points(x: &[f64], windows: &[usize]) -> Result<Vec<RsPoint>> {
    let points: Vec<RsPoint> = windows.iter().filter_map(|&w| rs_point(x, w)).collect();
    if points.is_empty() {
        return Err(Error::numeric(
            "every block has zero variance; R/S is undefined for a constant series",
        ));
    }
    Ok(points)
}

/// R/S table over the window sizes of `scheme`.
///
/// Each window partitions the series into `floor(n / w)` consecutive blocks;
/// the tail remainder is discarded. Flat blocks are skipped and counted in
/// [`RsPoint::skipped`]; a window whose blocks are all flat is left out.
pub fn rs_table(ts: &TimeSeries, scheme: &ScaleScheme) -> Result<Vec<RsPoint>> {
    let windows = scheme.windows(ts.len())?;
    rs_points(ts.values(), &windows)
}

/// Warning for any skipped blocks in a table.
pub fn skipped_blocks_warning(points: &[RsPoint]) -> Option<Warning> {
    let skipped: usize = points.iter().map(|p| p.skipped).sum();
    (skipped > 0).then(|| {
        Warning::new(
            WarningCode::BlocksSkipped,
            format!("{skipped} zero-variance block(s) left out of the R/S table"),
        )
    })
}

/// Least-squares slope of `log2 mean_rs` on `log2 window`.
///
/// The weighted fit uses weights `1 / std_rs^2`. Points with `std_rs = 0`
/// (single blocks) receive the largest finite weight among the others, and
/// when no point has scatter the fit is unweighted.
pub fn fit_h(points: &[RsPoint], weighted: bool) -> Result<HurstEstimate> {
    if points.len() < 3 {
        return Err(Error::validation(format!(
            "a Hurst fit needs at least 3 window sizes (got {})",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.mean_rs > 0.0) || p.window < 2) {
        return Err(Error::validation(format!(
            "invalid R/S point at window {} (mean R/S {})",
            p.window, p.mean_rs
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| (p.window as f64).log2()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean_rs.log2()).collect();
    let weights = weighted.then(|| scatter_weights(points));
    let fit = linear_fit(&x, &y, weights.as_deref())?;
    Ok(HurstEstimate::from_fit(fit, weighted))
}

fn scatter_weights(points: &[RsPoint]) -> Vec<f64> {
    let raw: Vec<Option<f64>> = points
        .iter()
        .map(|p| {
            let w = 1.0 / (p.std_rs * p.std_rs);
            (p.std_rs > 0.0 && w.is_finite()).then_some(w)
        })
        .collect();
    let largest = raw.iter().flatten().copied().fold(f64::NAN, f64::max);
    if largest.is_nan() {
        return vec![1.0; points.len()];
    }
    raw.into_iter().map(|w| w.unwrap_or(largest)).collect()
}

/// Correlation of successive increments implied by `h`.
pub fn fractal_correlation(h: f64) -> Result<FractalSummary> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::validation(format!(
            "fractal correlation needs 0 < H < 1 (got {h})"
        )));
    }
    Ok(FractalSummary {
        rho: (2.0 * h - 1.0).exp2() - 1.0,
    })
}

/// Probability-space fractal dimension `1 / h`.
pub fn fractal_dimension(h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::validation(format!(
            "fractal dimension needs H > 0 (got {h})"
        )));
    }
    Ok(1.0 / h)
}
