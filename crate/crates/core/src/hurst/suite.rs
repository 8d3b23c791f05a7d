//! Five Hurst estimates in the style of Weron's R/S toolbox.
//!
//! - `h_simple`: slope of raw mean R/S on a halving ladder of block sizes.
//! - `h_corrected_rs`: slope of `R/S - E[R/S] + sqrt(pi w / 2)` on the dense
//!   ladder, removing the small-sample bias of the raw statistic.
//! - `h_empirical`: slope of raw mean R/S on the dense ladder.
//! - `h_theoretical`: slope of the i.i.d. expectation `E[R/S]` on the same
//!   ladder.
//! - `h_corrected_empirical`: `0.5 + h_empirical - h_theoretical`.
//!
//! The dense ladder is every divisor `w >= min` of a sample size chosen in
//! `[0.99 n, n]` to maximise the number of such divisors; the series is
//! truncated to that size so every block size tiles it exactly.

use serde::{Deserialize, Serialize};

use super::{fit_h, rs_points, RsPoint, ScaleScheme};
use crate::regression::linear_fit;
use crate::series::TimeSeries;
use crate::{Error, Result};

pub const MIN_SUITE_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Smallest block of the halving ladder behind `h_simple`.
    pub simple_min_window: usize,
    /// Smallest divisor of the dense ladder. Halved (down to 4) for short
    /// series until at least three block sizes are available.
    pub dense_min_window: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            simple_min_window: 8,
            dense_min_window: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstSuite {
    pub h_simple: f64,
    pub h_corrected_rs: f64,
    pub h_empirical: f64,
    pub h_corrected_empirical: f64,
    pub h_theoretical: f64,
    /// Leading samples used by the dense ladder.
    pub n_used: usize,
    pub dense_min_window: usize,
    /// Dense-ladder table with the matching `E[R/S]` values.
    pub dense_table: Vec<RsPoint>,
    pub expected_rs: Vec<f64>,
    pub halving_table: Vec<RsPoint>,
}

pub fn hurst_suite(ts: &TimeSeries, config: &SuiteConfig) -> Result<HurstSuite> {
    let n = ts.len();
    if n < MIN_SUITE_LEN {
        return Err(Error::validation(format!(
            "the Hurst suite needs at least {MIN_SUITE_LEN} samples (got {n})"
        )));
    }
    let x = ts.values();

    let halving_table = rs_points(
        x,
        &ScaleScheme::Halving {
            min_window: config.simple_min_window,
        }
        .windows(n)?,
    )?;
    let h_simple = fit_h(&halving_table, false)?.h;

    let (n_used, dense_min_window, windows) = dense_ladder(n, config.dense_min_window)?;
    let dense_table = rs_points(&x[..n_used], &windows)?;
    if dense_table.len() < 2 {
        return Err(Error::numeric(
            "too many zero-variance blocks to fit the dense ladder",
        ));
    }
    let log_w: Vec<f64> = dense_table
        .iter()
        .map(|p| (p.window as f64).log2())
        .collect();
    let expected: Vec<f64> = dense_table
        .iter()
        .map(|p| expected_rs(p.window))
        .collect::<Result<_>>()?;

    let slope = |y: Vec<f64>| linear_fit(&log_w, &y, None).map(|f| f.slope);
    let h_empirical = slope(dense_table.iter().map(|p| p.mean_rs.log2()).collect())?;
    let h_theoretical = slope(expected.iter().map(|e| e.log2()).collect())?;
    let corrected: Vec<f64> = dense_table
        .iter()
        .zip(&expected)
        .map(|(p, e)| p.mean_rs - e + (std::f64::consts::FRAC_PI_2 * p.window as f64).sqrt())
        .collect();
    if corrected.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::numeric(
            "bias-corrected R/S is not positive at some block size",
        ));
    }
    let h_corrected_rs = slope(corrected.iter().map(|c| c.log2()).collect())?;

    Ok(HurstSuite {
        h_simple,
        h_corrected_rs,
        h_empirical,
        h_corrected_empirical: 0.5 + h_empirical - h_theoretical,
        h_theoretical,
        n_used,
        dense_min_window,
        dense_table,
        expected_rs: expected,
        halving_table,
    })
}

fn divisors(n: usize, min: usize) -> Vec<usize> {
    (min..=n / 2).filter(|d| n.is_multiple_of(*d)).collect()
}

/// `(sample size, effective minimum, block sizes)`.
fn dense_ladder(n: usize, min_window: usize) -> Result<(usize, usize, Vec<usize>)> {
    let mut min = min_window.max(2);
    loop {
        let lo = ((0.99 * n as f64).floor() as usize).min(n - 1);
        let mut best = (lo, divisors(lo, min));
        for size in lo + 1..=n {
            let d = divisors(size, min);
            if d.len() > best.1.len() {
                best = (size, d);
            }
        }
        if best.1.len() >= 3 {
            return Ok((best.0, min, best.1));
        }
        if min <= 4 {
            return Err(Error::validation(format!(
                "cannot build three block sizes for a series of length {n}"
            )));
        }
        min = (min / 2).max(4);
    }
}

/// Expected R/S of `w` i.i.d. Gaussian samples: the Anis–Lloyd sum with
/// Peters' `(w - 1/2) / w` factor.
///
/// The gamma ratio `G((w-1)/2) / G(w/2)` is evaluated by its two-step
/// recurrence, so the exact form is used at every size (no large-`w`
/// asymptotic switch is needed to dodge overflow).
pub fn expected_rs(w: usize) -> Result<f64> {
    if w < 2 {
        return Err(Error::validation("E[R/S] needs a block of at least 2"));
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut ratio = if w.is_multiple_of(2) {
        sqrt_pi
    } else {
        2.0 / sqrt_pi
    };
    let mut k = if w.is_multiple_of(2) { 2 } else { 3 };
    while k < w {
        ratio *= (k - 1) as f64 / k as f64;
        k += 2;
    }
    let wf = w as f64;
    let sum: f64 = (1..w).map(|i| ((wf - i as f64) / i as f64).sqrt()).sum();
    Ok((wf - 0.5) / wf * ratio / sqrt_pi * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, GenKind, GenSpec};

    /// Reference gamma via Lanczos (g = 7, n = 9), independent of the
    /// recurrence used above.
    fn ln_gamma(x: f64) -> f64 {
        const C: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        let x = x - 1.0;
        let t = x + 7.5;
        let s: f64 = C[0] + (1..9).map(|i| C[i] / (x + i as f64)).sum::<f64>();
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
    }

    fn expected_rs_reference(w: usize) -> f64 {
        let wf = w as f64;
        let sum: f64 = (1..w).map(|i| ((wf - i as f64) / i as f64).sqrt()).sum();
        let ratio = (ln_gamma(0.5 * (wf - 1.0)) - ln_gamma(0.5 * wf)).exp();
        (wf - 0.5) / wf * ratio / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn expected_rs_matches_lanczos_reference() {
        for w in [
            2usize, 3, 4, 5, 8, 17, 50, 64, 100, 255, 340, 341, 1000, 4096,
        ] {
            let a = expected_rs(w).unwrap();
            let b = expected_rs_reference(w);
            assert!((a - b).abs() < 1e-10 * b, "w={w}: {a} vs {b}");
        }
        assert!((expected_rs(2).unwrap() - 0.75).abs() < 1e-15);
        assert!(expected_rs(1).is_err());
    }

    #[test]
    fn expected_rs_increasing_towards_asymptote() {
        let target = std::f64::consts::FRAC_PI_2.sqrt();
        let mut prev = 0.0;
        let mut prev_gap = f64::INFINITY;
        for w in 2..=5000 {
            let e = expected_rs(w).unwrap();
            assert!(e > prev, "not increasing at {w}");
            prev = e;
            if w % 500 == 0 {
                let gap = (e / (w as f64).sqrt() - target).abs();
                assert!(gap < prev_gap);
                prev_gap = gap;
            }
        }
        assert!(prev_gap < 0.02);
    }

    #[test]
    fn dense_ladder_for_monthly_record() {
        let (n, min, w) = dense_ladder(775, 50).unwrap();
        assert_eq!((n, min), (768, 50));
        assert_eq!(w, vec![64, 96, 128, 192, 256, 384]);
        // Short series fall back to smaller blocks.
        let (_, min, w) = dense_ladder(100, 50).unwrap();
        assert_eq!(min, 12);
        assert_eq!(w, vec![20, 25, 50]);
        let (_, min, w) = dense_ladder(32, 50).unwrap();
        assert_eq!(min, 4);
        assert_eq!(w, vec![4, 8, 16]);
    }

    #[test]
    fn theoretical_exponent_band() {
        for n in [100usize, 300, 775, 2048, 10_000, 100_000] {
            let (_, _, w) = dense_ladder(n, 50).unwrap();
            let x: Vec<f64> = w.iter().map(|&v| (v as f64).log2()).collect();
            let y: Vec<f64> = w.iter().map(|&v| expected_rs(v).unwrap().log2()).collect();
            let ht = linear_fit(&x, &y, None).unwrap().slope;
            assert!(ht > 0.5 && ht < 0.65, "n={n}: {ht}");
        }
    }

    #[test]
    fn suite_runs_and_is_consistent() {
        let s = generate(&GenSpec::new(GenKind::White, 1000, 8)).unwrap();
        let r = hurst_suite(&s, &SuiteConfig::default()).unwrap();
        assert_eq!(
            r.h_corrected_empirical,
            0.5 + r.h_empirical - r.h_theoretical
        );
        assert!(r.h_theoretical > 0.5 && r.h_theoretical < 0.65);
        for h in [r.h_simple, r.h_corrected_rs, r.h_empirical] {
            assert!(h.is_finite() && h > 0.2 && h < 0.9, "{h}");
        }
        assert_eq!(r.dense_table.len(), r.expected_rs.len());
        assert!(r.n_used <= 1000 && r.n_used >= 990);
    }

    #[test]
    fn suite_rejects_short_series() {
        let s = generate(&GenSpec::new(GenKind::White, 31, 1)).unwrap();
        assert!(matches!(
            hurst_suite(&s, &SuiteConfig::default()),
            Err(Error::Validation(_))
        ));
        let s = generate(&GenSpec::new(GenKind::White, 32, 1)).unwrap();
        assert!(hurst_suite(&s, &SuiteConfig::default()).is_ok());
    }
}
