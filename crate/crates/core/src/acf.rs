//! Sample autocorrelation.
//!
//! Both routes use the biased estimator
//! `r_k = sum_{t<n-k} (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2`
//! with the full-sample mean `m`, which keeps `|r_k| <= 1`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::series::{centered_ss, is_flat, mean, TimeSeries};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub max_lag: usize,
    /// `r_0 ..= r_max_lag`
    pub coefficients: Vec<f64>,
    /// Length of the source series.
    pub n: usize,
}

impl AcfResult {
    pub fn at(&self, lag: usize) -> Option<f64> {
        self.coefficients.get(lag).copied()
    }
}

fn centered(ts: &TimeSeries, max_lag: usize) -> Result<(Vec<f64>, f64)> {
    let x = ts.values();
    let n = x.len();
    if max_lag < 1 || max_lag >= n {
        return Err(Error::validation(format!(
            "max_lag must lie in 1..{n} for a series of length {n} (got {max_lag})"
        )));
    }
    let m = mean(x);
    let ss = centered_ss(x, m);
    if is_flat(x, ss) {
        return Err(Error::numeric(
            "autocorrelation of a constant series is undefined",
        ));
    }
    Ok((x.iter().map(|v| v - m).collect(), ss))
}

/// Autocorrelation by direct summation, `O(n * max_lag)`.
pub fn acf_direct(ts: &TimeSeries, max_lag: usize) -> Result<AcfResult> {
    let (d, _) = centered(ts, max_lag)?;
    let n = d.len();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    let coefficients = (0..=max_lag)
        .map(|k| {
            let ck: f64 = (0..n - k).map(|t| d[t] * d[t + k]).sum();
            ck / c0
        })
        .collect();
    Ok(AcfResult {
        max_lag,
        coefficients,
        n,
    })
}

/// Autocorrelation through the power spectrum of the zero-padded series.
///
/// Padding to at least `2n` removes circular wrap-around, so the result
/// equals [`acf_direct`] up to rounding.
pub fn acf_fft(ts: &TimeSeries, max_lag: usize) -> Result<AcfResult> {
    let (d, _) = centered(ts, max_lag)?;
    let n = d.len();
    let len = (2 * n).next_power_of_two();

    let mut buf: Vec<Complex<f64>> = d
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);

    let c0 = buf[0].re;
    let coefficients = (0..=max_lag).map(|k| buf[k].re / c0).collect();
    Ok(AcfResult {
        max_lag,
        coefficients,
        n,
    })
}

/// Smallest lag `k >= 1` with `r_k <= 0`.
pub fn first_zero_crossing(acf: &AcfResult) -> Option<usize> {
    acf.coefficients
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, &r)| r <= 0.0)
        .map(|(k, _)| k)
}

/// Mean of `r_lo ..= r_hi`.
pub fn band_mean(acf: &AcfResult, lo: usize, hi: usize) -> Result<f64> {
    if lo < 1 || lo > hi || hi > acf.max_lag {
        return Err(Error::validation(format!(
            "band {lo}:{hi} must satisfy 1 <= lo <= hi <= {}",
            acf.max_lag
        )));
    }
    let band = &acf.coefficients[lo..=hi];
    Ok(band.iter().sum::<f64>() / band.len() as f64)
}
