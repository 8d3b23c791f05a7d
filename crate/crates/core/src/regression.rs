use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Straight-line least-squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub std_err: f64,
    /// `1 - SSE/SSM`, clamped to `[0, 1]`.
    pub r_squared: f64,
    pub sse: f64,
    pub ssm: f64,
    pub points: usize,
}

/// Ordinary or weighted least squares of `y` on `x`.
///
/// With `weights`, residual and total sums of squares are weighted and the
/// slope standard error is `sqrt(SSE_w / (k - 2) / Sxx_w)`. With exactly two
/// points the standard error is reported as zero.
pub(crate) fn linear_fit(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let k = x.len();
    if k != y.len() || weights.is_some_and(|w| w.len() != k) {
        return Err(Error::validation("regression inputs differ in length"));
    }
    if k < 2 {
        return Err(Error::validation("regression needs at least two points"));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..k).map(w).sum();
    if !(sw > 0.0) {
        return Err(Error::validation("regression weights must be positive"));
    }
    let mx = (0..k).map(|i| w(i) * x[i]).sum::<f64>() / sw;
    let my = (0..k).map(|i| w(i) * y[i]).sum::<f64>() / sw;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut ssm = 0.0;
    for i in 0..k {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += w(i) * dx * dx;
        sxy += w(i) * dx * dy;
        ssm += w(i) * dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::validation(
            "regression abscissae are all equal (degenerate design)",
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = (0..k)
        .map(|i| {
            let r = y[i] - intercept - slope * x[i];
            w(i) * r * r
        })
        .sum();
    let std_err = if k > 2 {
        (sse / (k - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if ssm > 0.0 {
        (1.0 - sse / ssm).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        std_err,
        r_squared,
        sse,
        ssm,
        points: k,
    })
}
