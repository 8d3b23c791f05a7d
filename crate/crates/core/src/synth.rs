//! Seeded synthetic series with known memory and chaos properties.
//!
//! Random draws come from `ChaCha8Rng::seed_from_u64(seed)`; Gaussian
//! variates are `rand_distr::StandardNormal` (ziggurat) on that stream. The
//! generator and the draw order are fixed, so a `(kind, n, seed)` triple
//! always produces the same bits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::series::TimeSeries;
use crate::{Error, Result};

/// Longest fractional Gaussian noise the exact method will produce.
pub const FGN_MAX_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenKind {
    /// i.i.d. standard Gaussian.
    White,
    /// Cumulative sum of `White` with the same seed.
    Walk,
    /// Fractional Gaussian noise with unit variance.
    Fgn { hurst: f64 },
    /// `x_t = phi x_{t-1} + e_t`, started from the stationary law.
    Ar1 { phi: f64 },
    /// `x_{t+1} = r x_t (1 - x_t)`; sample 0 is `x0`. The seed is unused.
    Logistic { r: f64, x0: f64 },
    /// `sin(2 pi t / period)`; the seed is unused.
    Sine { period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub kind: GenKind,
    pub n: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, seed: u64) -> Self {
        Self { kind, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::validation("generated series need n >= 2"));
        }
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} must be finite")))
            }
        };
        match self.kind {
            GenKind::White | GenKind::Walk => Ok(()),
            GenKind::Fgn { hurst } => {
                finite("hurst", hurst)?;
                if !(hurst > 0.0 && hurst < 1.0) {
                    return Err(Error::validation("fgn needs 0 < hurst < 1"));
                }
                if self.n > FGN_MAX_LEN {
                    return Err(Error::validation(format!(
                        "exact fgn is limited to n <= {FGN_MAX_LEN}; generate shorter chunks"
                    )));
                }
                Ok(())
            }
            GenKind::Ar1 { phi } => {
                finite("phi", phi)?;
                if phi.abs() >= 1.0 {
                    return Err(Error::validation("ar1 needs -1 < phi < 1"));
                }
                Ok(())
            }
            GenKind::Logistic { r, x0 } => {
                finite("r", r)?;
                finite("x0", x0)?;
                if !(r > 0.0 && r <= 4.0) {
                    return Err(Error::validation("logistic needs 0 < r <= 4"));
                }
                if !(x0 > 0.0 && x0 < 1.0) {
                    return Err(Error::validation("logistic needs 0 < x0 < 1"));
                }
                Ok(())
            }
            GenKind::Sine { period } => {
                finite("period", period)?;
                if period <= 0.0 {
                    return Err(Error::validation("sine needs period > 0"));
                }
                Ok(())
            }
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let n = spec.n;
    let values = match spec.kind {
        GenKind::White => gaussian(n, spec.seed),
        GenKind::Walk => {
            let mut acc = 0.0;
            gaussian(n, spec.seed)
                .into_iter()
                .map(|e| {
                    acc += e;
                    acc
                })
                .collect()
        }
        GenKind::Fgn { hurst } => fgn(&gaussian(n, spec.seed), hurst),
        GenKind::Ar1 { phi } => {
            let e = gaussian(n, spec.seed);
            let mut x = Vec::with_capacity(n);
            x.push(e[0] / (1.0 - phi * phi).sqrt());
            for t in 1..n {
                x.push(phi * x[t - 1] + e[t]);
            }
            x
        }
        GenKind::Logistic { r, x0 } => {
            let mut x = Vec::with_capacity(n);
            x.push(x0);
            for t in 1..n {
                let p = x[t - 1];
                x.push(r * p * (1.0 - p));
            }
            x
        }
        GenKind::Sine { period } => (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / period).sin())
            .collect(),
    };
    Ok(TimeSeries::new(values)?.with_label(label(spec)))
}

fn label(spec: &GenSpec) -> String {
    let kind = match spec.kind {
        GenKind::White => "white".to_string(),
        GenKind::Walk => "walk".to_string(),
        GenKind::Fgn { hurst } => format!("fgn hurst={hurst}"),
        GenKind::Ar1 { phi } => format!("ar1 phi={phi}"),
        GenKind::Logistic { r, x0 } => format!("logistic r={r} x0={x0}"),
        GenKind::Sine { period } => format!("sine period={period}"),
    };
    format!("{kind} n={} seed={}", spec.n, spec.seed)
}

pub(crate) fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Exact fGn from i.i.d. innovations `z`.
///
/// Durbin–Levinson recursion on the Toeplitz autocovariance: sample `t` is
/// its best linear prediction from the past plus `sqrt(v_t) z_t`. The map
/// `z -> x` is the lower Cholesky factor of the covariance matrix, built in
/// `O(n^2)` time and `O(n)` memory.
fn fgn(z: &[f64], hurst: f64) -> Vec<f64> {
    let n = z.len();
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(k, hurst)).collect();
    let mut x = Vec::with_capacity(n);
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut prev: Vec<f64> = Vec::with_capacity(n);
    let mut v = gamma[0];
    x.push(v.sqrt() * z[0]);
    for t in 1..n {
        // phi_{t,t}
        let num = gamma[t] - (0..t - 1).map(|j| phi[j] * gamma[t - 1 - j]).sum::<f64>();
        let reflection = num / v;
        prev.clear();
        prev.extend_from_slice(&phi);
        for j in 0..t - 1 {
            phi[j] = prev[j] - reflection * prev[t - 2 - j];
        }
        phi.push(reflection);
        v *= 1.0 - reflection * reflection;

        // phi[j] weights x_{t-1-j}
        let pred: f64 = (0..t).map(|j| phi[j] * x[t - 1 - j]).sum();
        x.push(pred + v.sqrt() * z[t]);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(kind: GenKind, n: usize, seed: u64) -> Vec<f64> {
        generate(&GenSpec::new(kind, n, seed))
            .unwrap()
            .into_values()
    }

    #[test]
    fn deterministic_per_seed() {
        for kind in [
            GenKind::White,
            GenKind::Walk,
            GenKind::Fgn { hurst: 0.7 },
            GenKind::Ar1 { phi: -0.3 },
        ] {
            let a = values(kind, 300, 5);
            let b = values(kind, 300, 5);
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert_ne!(a, values(kind, 300, 6));
        }
    }

    #[test]
    fn logistic_first_iterates() {
        let x = values(GenKind::Logistic { r: 4.0, x0: 0.2 }, 4, 0);
        assert_eq!(x[0], 0.2);
        assert!((x[1] - 0.64).abs() < 1e-15);
        assert!((x[2] - 0.9216).abs() < 1e-15);
        assert!((x[3] - 0.28901376).abs() < 1e-14);
    }

    #[test]
    fn logistic_stays_in_unit_interval() {
        for (r, x0) in [(4.0, 0.2), (3.7, 0.9), (2.5, 0.01), (0.5, 0.5)] {
            let x = values(GenKind::Logistic { r, x0 }, 2000, 0);
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn sine_period() {
        let x = values(GenKind::Sine { period: 4.0 }, 5, 0);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 1.0).abs() < 1e-15);
        assert!((x[3] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn walk_differences_recover_white() {
        let w = values(GenKind::Walk, 1000, 9);
        let e = values(GenKind::White, 1000, 9);
        assert_eq!(w[0].to_bits(), e[0].to_bits());
        for t in 1..w.len() {
            // Equal up to the rounding of each partial sum.
            let tol = 4.0 * f64::EPSILON * w[t].abs().max(w[t - 1].abs()).max(1.0);
            assert!((w[t] - w[t - 1] - e[t]).abs() <= tol);
        }
    }

    #[test]
    fn fgn_half_is_white_noise() {
        for k in 1..20 {
            assert_eq!(fgn_autocovariance(k, 0.5), 0.0);
        }
        assert_eq!(fgn_autocovariance(0, 0.5), 1.0);
        let f = values(GenKind::Fgn { hurst: 0.5 }, 500, 3);
        let w = values(GenKind::White, 500, 3);
        assert_eq!(f, w);
    }

    /// Dense Cholesky of the Toeplitz covariance, the textbook exact method.
    fn cholesky_fgn(z: &[f64], hurst: f64) -> Vec<f64> {
        let n = z.len();
        let cov = |i: usize, j: usize| fgn_autocovariance(i.abs_diff(j), hurst);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
                l[i * n + j] = if i == j {
                    (cov(i, i) - s).sqrt()
                } else {
                    (cov(i, j) - s) / l[j * n + j]
                };
            }
        }
        (0..n)
            .map(|i| (0..=i).map(|k| l[i * n + k] * z[k]).sum())
            .collect()
    }

    #[test]
    fn durbin_levinson_matches_dense_cholesky() {
        for hurst in [0.2, 0.35, 0.7, 0.9] {
            let z = gaussian(96, 17);
            let fast = fgn(&z, hurst);
            let dense = cholesky_fgn(&z, hurst);
            for (a, b) in fast.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-9, "H={hurst}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fgn_autocovariance_matches_theory() {
        // Known-mean (zero) estimator is unbiased for every lag.
        let (n, seeds, hurst) = (2048, 20, 0.8);
        for lag in 0..=5 {
            let est: Vec<f64> = (0..seeds)
                .map(|s| {
                    let x = values(GenKind::Fgn { hurst }, n, 100 + s);
                    (0..n - lag).map(|t| x[t] * x[t + lag]).sum::<f64>() / (n - lag) as f64
                })
                .collect();
            let m = est.iter().sum::<f64>() / seeds as f64;
            let var = est.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (seeds - 1) as f64;
            let se = (var / seeds as f64).sqrt();
            let target = fgn_autocovariance(lag, hurst);
            assert!(
                (m - target).abs() <= 5.0 * se,
                "lag {lag}: {m} vs {target} (se {se})"
            );
        }
    }

    #[test]
    fn ar1_lag_one_autocorrelation() {
        let x = values(GenKind::Ar1 { phi: 0.5 }, 10_000, 21);
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let c0: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
        let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        assert!((c1 / c0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            GenSpec::new(GenKind::White, 1, 0),
            GenSpec::new(GenKind::Fgn { hurst: 1.0 }, 10, 0),
            GenSpec::new(GenKind::Fgn { hurst: 0.5 }, FGN_MAX_LEN + 1, 0),
            GenSpec::new(GenKind::Ar1 { phi: 1.0 }, 10, 0),
            GenSpec::new(GenKind::Ar1 { phi: f64::NAN }, 10, 0),
            GenSpec::new(GenKind::Logistic { r: 4.5, x0: 0.2 }, 10, 0),
            GenSpec::new(GenKind::Logistic { r: 4.0, x0: 1.0 }, 10, 0),
            GenSpec::new(GenKind::Sine { period: 0.0 }, 10, 0),
        ];
        for spec in bad {
            assert!(
                matches!(generate(&spec), Err(Error::Validation(_))),
                "{spec:?}"
            );
        }
    }
}
