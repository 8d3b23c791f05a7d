//! Delay embedding and the Kantz estimate of the largest Lyapunov exponent.
//!
//! For each reference point `i` the neighbours `U_i` are the embedded
//! vectors within max-norm distance `eps` of vector `i`, outside the Theiler
//! window. The stretching curve is
//!
//! ```text
//! S(dt) = mean_i ln( mean_{j in U_i} |x_{i+(m-1)d+dt} - x_{j+(m-1)d+dt}| )
//! ```
//!
//! using the scalar future observation, as in TISEAN's `lyap_k`. The slope of
//! `S` over its initial linear stretch estimates the largest exponent.
//!
//! The input is standardized first, so `eps` is in units of the sample
//! standard deviation.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::regression::linear_fit;
use crate::series::{standardized_values, TimeSeries};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    /// Embedding dimension.
    pub m: usize,
    /// Delay in samples.
    pub d: usize,
    /// Neighbours closer in time than this (inclusive) are excluded.
    pub theiler: usize,
    /// Neighbourhood radius in standardized units.
    pub eps: f64,
    pub n_ref: usize,
    /// Number of follow-up steps, `S(0) ..= S(steps - 1)`.
    pub steps: usize,
    /// References with fewer neighbours are discarded.
    pub k_min: usize,
    /// `None` spaces references evenly; `Some(seed)` draws them at random
    /// without replacement.
    pub seed: Option<u64>,
}

impl Default for EmbeddingParams {
    /// Defaults for monthly climate indices.
    fn default() -> Self {
        Self {
            m: 2,
            d: 1,
            theiler: 12,
            eps: 0.3,
            n_ref: 200,
            steps: 12,
            k_min: 4,
            seed: None,
        }
    }
}

impl EmbeddingParams {
    fn span(&self) -> usize {
        (self.m - 1) * self.d
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m < 1 || self.d < 1 {
            return Err(Error::validation("embedding needs m >= 1 and d >= 1"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::validation("eps must be positive"));
        }
        if self.n_ref < 1 || self.k_min < 1 {
            return Err(Error::validation("n_ref and k_min must be at least 1"));
        }
        if self.steps < 2 {
            return Err(Error::validation("at least 2 follow-up steps are needed"));
        }
        if self.span() + self.steps >= n {
            return Err(Error::validation(format!(
                "series of length {n} is too short for (m-1)*d + steps = {}",
                self.span() + self.steps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCurve {
    /// `S(0) ..= S(steps - 1)`; `None` where no reference contributed.
    pub s_values: Vec<Option<f64>>,
    /// References averaged into each step. Non-increasing: a reference that
    /// has no non-zero pair at some step leaves the average for the
    /// remaining steps.
    pub ref_counts: Vec<usize>,
    pub params: EmbeddingParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovFit {
    /// Slope of `S` per unit of time.
    pub lambda1: f64,
    pub fit_range: (usize, usize),
    pub r_squared: f64,
    pub dt: f64,
}

impl LyapunovFit {
    /// Positive slope with a good linear fit (`r^2 >= 0.8`).
    pub fn chaos_consistent(&self) -> bool {
        self.lambda1 > 0.0 && self.r_squared >= 0.8
    }
}

/// State vectors `(x_i, x_{i+d}, ..., x_{i+(m-1)d})`.
pub fn embed(x: &[f64], m: usize, d: usize) -> Result<Vec<Vec<f64>>> {
    if m < 1 || d < 1 {
        return Err(Error::validation("embedding needs m >= 1 and d >= 1"));
    }
    let span = (m - 1) * d;
    if x.len() <= span {
        return Err(Error::validation(format!(
            "series of length {} is too short to embed with m={m}, d={d}",
            x.len()
        )));
    }
    Ok((0..x.len() - span)
        .map(|i| (0..m).map(|k| x[i + k * d]).collect())
        .collect())
}

/// Per-reference outcome.
enum RefOutcome {
    TooFewNeighbours(usize),
    /// ln mean distance per step, cut at the first step with only zero distances.
    Accepted(Vec<f64>),
}

pub fn lyap_k(ts: &TimeSeries, params: &EmbeddingParams) -> Result<DivergenceCurve> {
    lyap_k_with(ts, params, Execution::default())
}

pub fn lyap_k_with(
    ts: &TimeSeries,
    params: &EmbeddingParams,
    exec: Execution,
) -> Result<DivergenceCurve> {
    let n = ts.len();
    params.validate(n)?;
    let x = standardized_values(ts.values())?;
    let span = params.span();
    // Positions whose embedded vector and all follow-up samples exist.
    let valid = n - span - params.steps + 1;
    let refs = reference_indices(valid, params);

    let one = |&i: &usize| reference_outcome(&x, i, valid, params);
    let outcomes: Vec<RefOutcome> = match exec {
        Execution::Sequential => refs.iter().map(one).collect(),
        Execution::Parallel => refs.par_iter().map(one).collect(),
    };

    let mut sums = vec![0.0; params.steps];
    let mut ref_counts = vec![0usize; params.steps];
    let mut max_found = 0;
    let mut accepted = 0;
    for outcome in &outcomes {
        match outcome {
            RefOutcome::TooFewNeighbours(k) => max_found = max_found.max(*k),
            RefOutcome::Accepted(logs) => {
                accepted += 1;
                for (step, v) in logs.iter().enumerate() {
                    sums[step] += v;
                    ref_counts[step] += 1;
                }
            }
        }
    }
    if accepted == 0 {
        return Err(Error::EpsTooSmall {
            k_min: params.k_min,
            max_found,
        });
    }
    let s_values = sums
        .iter()
        .zip(&ref_counts)
        .map(|(s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    Ok(DivergenceCurve {
        s_values,
        ref_counts,
        params: *params,
    })
}

fn reference_indices(valid: usize, params: &EmbeddingParams) -> Vec<usize> {
    if params.n_ref >= valid {
        return (0..valid).collect();
    }
    match params.seed {
        None => (0..params.n_ref)
            .map(|k| k * valid / params.n_ref)
            .collect(),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = sample(&mut rng, valid, params.n_ref).into_vec();
            idx.sort_unstable();
            idx
        }
    }
}

fn reference_outcome(x: &[f64], i: usize, valid: usize, params: &EmbeddingParams) -> RefOutcome {
    let (m, d, span) = (params.m, params.d, params.span());
    let neighbours: Vec<usize> = (0..valid)
        .filter(|&j| j.abs_diff(i) > params.theiler)
        .filter(|&j| (0..m).all(|k| (x[i + k * d] - x[j + k * d]).abs() < params.eps))
        .collect();
    if neighbours.len() < params.k_min {
        return RefOutcome::TooFewNeighbours(neighbours.len());
    }
    let mut logs = Vec::with_capacity(params.steps);
    for step in 0..params.steps {
        let a = x[i + span + step];
        let (sum, count) = neighbours
            .iter()
            .map(|&j| (a - x[j + span + step]).abs())
            .filter(|&dist| dist > 0.0)
            .fold((0.0, 0usize), |(s, c), dist| (s + dist, c + 1));
        if count == 0 {
            break;
        }
        logs.push((sum / count as f64).ln());
    }
    RefOutcome::Accepted(logs)
}

/// Least-squares slope of `S(dt)` over `start..=end`, divided by `dt`.
pub fn lyap_fit(curve: &DivergenceCurve, start: usize, end: usize, dt: f64) -> Result<LyapunovFit> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation("dt must be positive"));
    }
    if start >= end || end >= curve.s_values.len() {
        return Err(Error::validation(format!(
            "fit range {start}:{end} must satisfy start < end < {}",
            curve.s_values.len()
        )));
    }
    if end - start + 1 < 3 {
        return Err(Error::validation("a Lyapunov fit needs at least 3 points"));
    }
    let mut xs = Vec::with_capacity(end - start + 1);
    let mut ys = Vec::with_capacity(end - start + 1);
    for step in start..=end {
        let s = curve.s_values[step].ok_or_else(|| {
            Error::validation(format!("no reference point contributes at step {step}"))
        })?;
        xs.push(step as f64);
        ys.push(s);
    }
    let fit = linear_fit(&xs, &ys, None)?;
    Ok(LyapunovFit {
        lambda1: fit.slope / dt,
        fit_range: (start, end),
        r_squared: fit.r_squared,
        dt,
    })
}
