//! Permutation test for the correlation of two aligned series.
//!
//! One series (`p`) stays fixed while the other (`j`) is shuffled
//! `n_perm` times. The sorted permuted correlations give the critical values:
//! with 10 000 draws the lower 5% value is the 500th and the upper one the
//! 9 500th (1-based). Other counts use positions `ceil(0.05 n)` and
//! `floor(0.95 n)`.
//!
//! Permutation `k` is drawn from `ChaCha8Rng::seed_from_u64(seed)` switched
//! to stream `k`, shuffled with Fisher–Yates, so the output does not depend
//! on how the permutations are scheduled.
//!
//! Plain permutation assumes exchangeable samples. Serially correlated
//! series make the null distribution too narrow.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::series::{centered_ss, is_flat, mean};
use crate::warning::{Warning, WarningCode};
use crate::{Error, Execution, Result};

pub const DEFAULT_N_PERM: usize = 10_000;
pub const MIN_N_PERM: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Lower,
    Upper,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Reject,
    FailToReject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub min: f64,
    pub p01: f64,
    pub p05: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
    pub p99: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub r_obs: f64,
    pub n: usize,
    pub n_perm: usize,
    pub r_sorted_summary: QuantileSummary,
    /// 1-based position `ceil(0.05 n_perm)` of the sorted distribution.
    pub r_crit_lower: f64,
    /// 1-based position `floor(0.95 n_perm)`.
    pub r_crit_upper: f64,
    /// Positions `ceil(0.025 n_perm)` and `floor(0.975 n_perm)`, used for
    /// the two-sided decision.
    pub r_crit_two_sided: (f64, f64),
    pub p_lower: f64,
    pub p_upper: f64,
    pub p_two_sided: f64,
    pub seed: u64,
    pub tail: Tail,
    pub decision_5pct: Decision,
    /// Sorted permuted correlations.
    #[serde(skip)]
    pub distribution: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermConfig {
    pub n_perm: usize,
    pub seed: u64,
    pub tail: Tail,
    pub exec: Execution,
}

impl PermConfig {
    pub fn new(seed: u64, tail: Tail) -> Self {
        Self {
            n_perm: DEFAULT_N_PERM,
            seed,
            tail,
            exec: Execution::default(),
        }
    }
}

/// Centered copy of `x` and its sum of squares, rejecting flat input.
fn centered(x: &[f64], name: &str) -> Result<(Vec<f64>, f64)> {
    let m = mean(x);
    let ss = centered_ss(x, m);
    if is_flat(x, ss) {
        return Err(Error::numeric(format!(
            "{name} is constant; its correlation is undefined"
        )));
    }
    Ok((x.iter().map(|v| v - m).collect(), ss))
}

fn check_pair(p: &[f64], j: &[f64]) -> Result<()> {
    if p.len() != j.len() {
        return Err(Error::validation(format!(
            "series lengths differ ({} vs {})",
            p.len(),
            j.len()
        )));
    }
    if p.len() < 3 {
        return Err(Error::validation("correlation needs at least 3 pairs"));
    }
    if p.iter().chain(j).any(|v| !v.is_finite()) {
        return Err(Error::validation("series contain non-finite values"));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sample Pearson correlation.
pub fn pearson(p: &[f64], j: &[f64]) -> Result<f64> {
    check_pair(p, j)?;
    let (cp, sp) = centered(p, "first series")?;
    let (cj, sj) = centered(j, "second series")?;
    Ok((dot(&cp, &cj) / (sp * sj).sqrt()).clamp(-1.0, 1.0))
}

/// Elementwise magnitude `sqrt(u^2 + v^2)` of two wind components.
pub fn resultant(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::validation(format!(
            "wind components differ in length ({} vs {})",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter().zip(v).map(|(a, b)| a.hypot(*b)).collect())
}

fn lag1(x: &[f64]) -> f64 {
    let m = mean(x);
    let ss = centered_ss(x, m);
    if is_flat(x, ss) {
        return 0.0;
    }
    x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / ss
}

/// Flags pairs whose lag-1 autocorrelations both exceed `2 / sqrt(n)`, where
/// shuffling understates the spread of the null distribution.
pub fn serial_correlation_warning(p: &[f64], j: &[f64]) -> Option<Warning> {
    let n = p.len().min(j.len());
    if n < 3 {
        return None;
    }
    let bound = 2.0 / (n as f64).sqrt();
    let (rp, rj) = (lag1(p), lag1(j));
    (rp.abs() > bound && rj.abs() > bound).then(|| {
        Warning::new(
            WarningCode::SerialCorrelation,
            format!(
                "both series are serially correlated (lag-1 r = {rp:.3}, {rj:.3}); \
                 permutation critical values are too narrow"
            ),
        )
    })
}

fn permutation_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// 1-based order-statistic positions of the lower and upper critical values.
pub fn critical_positions(n_perm: usize, tail_fraction: f64) -> (usize, usize) {
    // integer arithmetic in parts per thousand keeps 500 / 9500 exact
    let per_mille = (tail_fraction * 1000.0).round() as usize;
    let lower = (per_mille * n_perm).div_ceil(1000).max(1);
    let upper = ((1000 - per_mille) * n_perm / 1000).max(1);
    (lower, upper)
}

pub fn perm_test(p: &[f64], j: &[f64], config: &PermConfig) -> Result<PermutationResult> {
    check_pair(p, j)?;
    if config.n_perm < MIN_N_PERM {
        return Err(Error::validation(format!(
            "at least {MIN_N_PERM} permutations are required (got {})",
            config.n_perm
        )));
    }
    let (cp, sp) = centered(p, "first series")?;
    let (cj, sj) = centered(j, "second series")?;
    let norm = (sp * sj).sqrt();
    let r_obs = (dot(&cp, &cj) / norm).clamp(-1.0, 1.0);

    let draw = |k: usize| {
        let mut rng = permutation_rng(config.seed, k);
        let mut shuffled = cj.clone();
        shuffled.shuffle(&mut rng);
        (dot(&cp, &shuffled) / norm).clamp(-1.0, 1.0)
    };
    let mut dist: Vec<f64> = match config.exec {
        Execution::Sequential => (0..config.n_perm).map(draw).collect(),
        Execution::Parallel => (0..config.n_perm).into_par_iter().map(draw).collect(),
    };
    // stable: ties keep generation order
    dist.sort_by(f64::total_cmp);

    let n_perm = config.n_perm;
    let at = |pos: usize| dist[pos - 1];
    let (lo, hi) = critical_positions(n_perm, 0.05);
    let (lo2, hi2) = critical_positions(n_perm, 0.025);
    let r_crit_lower = at(lo);
    let r_crit_upper = at(hi);
    let r_crit_two_sided = (at(lo2), at(hi2));

    let frac = |count: usize| (count + 1) as f64 / (n_perm + 1) as f64;
    let p_lower = frac(dist.iter().filter(|&&r| r <= r_obs).count());
    let p_upper = frac(dist.iter().filter(|&&r| r >= r_obs).count());
    let p_two_sided = frac(dist.iter().filter(|&&r| r.abs() >= r_obs.abs()).count());

    let reject = match config.tail {
        Tail::Lower => r_obs < r_crit_lower,
        Tail::Upper => r_obs > r_crit_upper,
        Tail::Two => r_obs < r_crit_two_sided.0 || r_obs > r_crit_two_sided.1,
    };
    let nearest_rank = |q: f64| at(((q * n_perm as f64).ceil() as usize).clamp(1, n_perm));
    let r_sorted_summary = QuantileSummary {
        min: dist[0],
        p01: nearest_rank(0.01),
        p05: nearest_rank(0.05),
        p25: nearest_rank(0.25),
        p50: nearest_rank(0.50),
        p75: nearest_rank(0.75),
        p95: nearest_rank(0.95),
        p99: nearest_rank(0.99),
        max: dist[n_perm - 1],
    };

    Ok(PermutationResult {
        r_obs,
        n: p.len(),
        n_perm,
        r_sorted_summary,
        r_crit_lower,
        r_crit_upper,
        r_crit_two_sided,
        p_lower,
        p_upper,
        p_two_sided,
        seed: config.seed,
        tail: config.tail,
        decision_5pct: if reject {
            Decision::Reject
        } else {
            Decision::FailToReject
        },
        distribution: dist,
    })
}
