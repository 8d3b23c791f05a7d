//! Time-series container and descriptive statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Calendar month, used to anchor monthly series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    /// 1..=12
    pub month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::validation(format!("month {month} is not in 1..=12")));
        }
        Ok(Self { year, month })
    }

    /// Months since year 0, January.
    pub fn ordinal(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(12);
        let month = ordinal.rem_euclid(12) + 1;
        Self {
            year: year as i32,
            month: month as u8,
        }
    }

    pub fn add_months(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: YearMonth) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| Error::validation(format!("`{s}` is not a YYYY-MM date")))?;
        if y.len() != 4 || m.len() != 2 {
            return Err(Error::validation(format!("`{s}` is not a YYYY-MM date")));
        }
        let year = y
            .parse()
            .map_err(|_| Error::validation(format!("bad year in `{s}`")))?;
        let month = m
            .parse()
            .map_err(|_| Error::validation(format!("bad month in `{s}`")))?;
        Self::new(year, month)
    }
}

/// Ordered finite samples, optionally anchored to a calendar month.
///
/// Construction guarantees at least one sample, all finite, and a positive
/// sampling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    start: Option<YearMonth>,
    step_months: u32,
    label: String,
}

#[allow(clippy::len_without_is_empty)]
impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("time series is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "sample {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self {
            values,
            start: None,
            step_months: 1,
            label: String::new(),
        })
    }

    pub fn with_start(mut self, start: YearMonth) -> Self {
        self.start = Some(start);
        self
    }

    pub fn with_step_months(mut self, step: u32) -> Result<Self> {
        if step == 0 {
            return Err(Error::validation("step_months must be positive"));
        }
        self.step_months = step;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn start(&self) -> Option<YearMonth> {
        self.start
    }

    pub fn step_months(&self) -> u32 {
        self.step_months
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Calendar month of sample `i`, when the series is anchored.
    pub fn date_of(&self, i: usize) -> Option<YearMonth> {
        self.start
            .map(|s| s.add_months(i as i64 * i64::from(self.step_months)))
    }

    pub fn end(&self) -> Option<YearMonth> {
        self.date_of(self.len() - 1)
    }

    /// `len` samples starting at `from`, with the calendar anchor moved along.
    pub fn slice(&self, from: usize, len: usize) -> Result<Self> {
        let end = from
            .checked_add(len)
            .filter(|&e| e <= self.len())
            .ok_or_else(|| {
                Error::validation(format!(
                    "slice {from}+{len} exceeds series length {}",
                    self.len()
                ))
            })?;
        let mut out = self.map_values(self.values[from..end].to_vec())?;
        out.start = self.date_of(from);
        Ok(out)
    }

    /// Same metadata, new values.
    pub(crate) fn map_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut out = TimeSeries::new(values)?;
        out.start = self.start;
        out.step_months = self.step_months;
        out.label = self.label.clone();
        Ok(out)
    }
}

/// Restricts two series to their common support.
///
/// Anchored series with equal steps are aligned on the calendar; otherwise
/// the lengths must already agree.
pub fn align_pair(a: &TimeSeries, b: &TimeSeries) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = align(a, b)?;
    Ok((a.into_values(), b.into_values()))
}

/// [`align_pair`] keeping labels and calendar anchors.
pub fn align(a: &TimeSeries, b: &TimeSeries) -> Result<(TimeSeries, TimeSeries)> {
    match (a.start(), b.start()) {
        (Some(sa), Some(sb)) if a.step_months() == b.step_months() => {
            let step = i64::from(a.step_months());
            let offset = sa.months_until(sb);
            if offset % step != 0 {
                return Err(Error::validation(
                    "series are sampled on different month phases",
                ));
            }
            let offset = offset / step;
            // index of sample 0 of `b` inside `a`
            let a_from = offset.max(0) as usize;
            let b_from = (-offset).max(0) as usize;
            let len = a
                .len()
                .saturating_sub(a_from)
                .min(b.len().saturating_sub(b_from));
            if len == 0 {
                return Err(Error::validation("series do not overlap in time"));
            }
            Ok((a.slice(a_from, len)?, b.slice(b_from, len)?))
        }
        _ if a.len() == b.len() => Ok((a.clone(), b.clone())),
        _ => Err(Error::validation(format!(
            "series lengths differ ({} vs {}) and cannot be aligned by date",
            a.len(),
            b.len()
        ))),
    }
}

/// Descriptive statistics of a series.
///
/// `std_dev` and `variance` use the `n - 1` divisor. `mean_abs_dev` is the
/// mean absolute deviation about the mean. `cv_percent` is `None` when the
/// mean is zero or the spread is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub mode_first: f64,
    pub mode_second: Option<f64>,
    pub std_dev: f64,
    pub mean_abs_dev: f64,
    pub variance: f64,
    pub cv_percent: Option<f64>,
    pub mode_resolution: f64,
}

pub const DEFAULT_MODE_RESOLUTION: f64 = 0.1;

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sum of squared deviations from the mean.
pub(crate) fn centered_ss(x: &[f64], m: f64) -> f64 {
    x.iter().map(|v| (v - m) * (v - m)).sum()
}

/// True when the spread of `x` is zero up to rounding of its mean.
pub(crate) fn is_flat(x: &[f64], ss: f64) -> bool {
    if x.windows(2).all(|w| w[0] == w[1]) {
        return true;
    }
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 8.0 * f64::EPSILON * scale;
    ss <= x.len() as f64 * tol * tol
}

pub fn median(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::validation("median of an empty sample"));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Ok(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

/// First and second modes after rounding to the nearest multiple of
/// `resolution`. Bins are ranked by descending count, then ascending value.
pub fn modes(x: &[f64], resolution: f64) -> Result<(f64, Option<f64>)> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::validation("mode resolution must be positive"));
    }
    if x.is_empty() {
        return Err(Error::validation("mode of an empty sample"));
    }
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for v in x {
        *counts.entry((v / resolution).round() as i64).or_default() += 1;
    }
    let mut ranked: Vec<(i64, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    // For decimal resolutions such as 0.1, dividing by the reciprocal
    // yields the nearest double to the decimal value (0.3, not 0.30000000000000004).
    let inv = 1.0 / resolution;
    let to_value = |bin: i64| {
        if (inv - inv.round()).abs() < 1e-9 {
            bin as f64 / inv.round()
        } else {
            bin as f64 * resolution
        }
    };
    Ok((to_value(ranked[0].0), ranked.get(1).map(|r| to_value(r.0))))
}

/// Descriptive statistics with modes on a `mode_resolution` grid.
pub fn summarize(ts: &TimeSeries, mode_resolution: f64) -> Result<SummaryStats> {
    let x = ts.values();
    let n = x.len();
    if n < 2 {
        return Err(Error::validation(
            "summary statistics need at least 2 samples",
        ));
    }
    let m = mean(x);
    let ss = centered_ss(x, m);
    let variance = if is_flat(x, ss) {
        0.0
    } else {
        ss / (n - 1) as f64
    };
    let std_dev = variance.sqrt();
    let mean_abs_dev = x.iter().map(|v| (v - m).abs()).sum::<f64>() / n as f64;
    let (mode_first, mode_second) = modes(x, mode_resolution)?;
    let cv_percent = (m != 0.0 && std_dev > 0.0).then(|| 100.0 * std_dev / m.abs());
    Ok(SummaryStats {
        n,
        mean: m,
        median: median(x)?,
        mode_first,
        mode_second,
        std_dev,
        mean_abs_dev,
        variance,
        cv_percent,
        mode_resolution,
    })
}

/// Rescales to zero mean and unit sample standard deviation.
pub fn standardize(ts: &TimeSeries) -> Result<TimeSeries> {
    ts.map_values(standardized_values(ts.values())?)
}

pub(crate) fn standardized_values(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::validation(
            "standardization needs at least 2 samples",
        ));
    }
    let m = mean(x);
    let ss = centered_ss(x, m);
    if is_flat(x, ss) {
        return Err(Error::numeric("cannot standardize a constant series"));
    }
    let sd = (ss / (x.len() - 1) as f64).sqrt();
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new(vec![f64::INFINITY]).is_err());
        assert!(ts(&[1.0]).with_step_months(0).is_err());
    }

    #[test]
    fn calendar_mapping() {
        let s = ts(&[0.0; 20]).with_start(YearMonth::new(2014, 1).unwrap());
        assert_eq!(s.end(), Some(YearMonth::new(2015, 8).unwrap()));
        let q = ts(&[0.0; 5])
            .with_start(YearMonth::new(2000, 11).unwrap())
            .with_step_months(3)
            .unwrap();
        assert_eq!(q.date_of(1).unwrap().to_string(), "2001-02");
        assert_eq!("1951-03".parse::<YearMonth>().unwrap().month, 3);
        assert!("1951-13".parse::<YearMonth>().is_err());
        assert!("51-01".parse::<YearMonth>().is_err());
    }

    #[test]
    fn one_to_four() {
        let s = summarize(&ts(&[1.0, 2.0, 3.0, 4.0]), 0.1).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean_abs_dev, 1.0);
        assert_eq!(s.mode_first, 1.0);
        assert_eq!(s.mode_second, Some(2.0));
    }

    #[test]
    fn constant_series_flags_cv() {
        let s = summarize(&ts(&[5.0; 4]), 0.1).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.std_dev, 0.0);
        assert_eq!(s.cv_percent, None);
        assert_eq!(s.mode_second, None);
        let s = summarize(&ts(&[0.1; 3]), 0.1).unwrap();
        assert_eq!(s.std_dev, 0.0);
    }

    #[test]
    fn zero_mean_has_no_cv() {
        let s = summarize(&ts(&[-1.0, 1.0]), 0.1).unwrap();
        assert_eq!(s.cv_percent, None);
        let s = summarize(&ts(&[1.0, 3.0]), 0.1).unwrap();
        assert!((s.cv_percent.unwrap() - 100.0 * 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            summarize(&ts(&[1.0]), 0.1),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn modes_tie_break_by_value() {
        let (a, b) = modes(&[0.2, 0.2, -0.1, -0.1, 0.5], 0.1).unwrap();
        assert_eq!(a, -0.1);
        assert_eq!(b, Some(0.2));
        let (a, b) = modes(&[0.21, 0.19, 0.3, -0.14, -0.06, 0.2], 0.1).unwrap();
        assert_eq!(a, 0.2);
        assert_eq!(b, Some(-0.1));
        assert!(modes(&[1.0], 0.0).is_err());
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
    }

    #[test]
    fn standardize_examples() {
        let s = standardize(&ts(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(s.values(), &[-1.0, 0.0, 1.0]);
        let s = standardize(&ts(&[2.0, 4.0])).unwrap();
        let expect = [(2.0 - 3.0) / 2f64.sqrt(), (4.0 - 3.0) / 2f64.sqrt()];
        for (a, b) in s.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(
            standardize(&ts(&[7.0; 3])),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn standardize_keeps_metadata() {
        let s = ts(&[1.0, 2.0, 4.0])
            .with_start(YearMonth::new(1951, 1).unwrap())
            .with_label("soi");
        let z = standardize(&s).unwrap();
        assert_eq!(z.start(), s.start());
        assert_eq!(z.label(), "soi");
        assert_eq!(z.len(), 3);
    }

    #[test]
    fn align_by_calendar() {
        let a = ts(&[1.0, 2.0, 3.0, 4.0]).with_start(YearMonth::new(2000, 1).unwrap());
        let b = ts(&[10.0, 20.0, 30.0, 40.0]).with_start(YearMonth::new(2000, 3).unwrap());
        let (x, y) = align_pair(&a, &b).unwrap();
        assert_eq!(x, vec![3.0, 4.0]);
        assert_eq!(y, vec![10.0, 20.0]);
        let (y2, x2) = align_pair(&b, &a).unwrap();
        assert_eq!((x2, y2), (x, y));
        assert!(align_pair(&ts(&[1.0, 2.0]), &ts(&[1.0])).is_err());

        let (sa, sb) = align(&a, &b).unwrap();
        let march = YearMonth::new(2000, 3).unwrap();
        assert_eq!((sa.start(), sb.start()), (Some(march), Some(march)));
        assert_eq!(sa.end(), YearMonth::new(2000, 4).ok());
    }

    #[test]
    fn slice_moves_the_anchor() {
        let a = ts(&[1.0, 2.0, 3.0, 4.0])
            .with_start(YearMonth::new(1999, 11).unwrap())
            .with_label("x");
        let s = a.slice(2, 2).unwrap();
        assert_eq!(s.values(), &[3.0, 4.0]);
        assert_eq!(s.start(), YearMonth::new(2000, 1).ok());
        assert_eq!(s.label(), "x");
        assert!(a.slice(3, 2).is_err());
        assert!(a.slice(1, 0).is_err());
    }

    proptest! {
        #[test]
        fn affine_maps_transform_predictably(
            x in prop::collection::vec(-100.0f64..100.0, 2..60),
            a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
            b in -50.0f64..50.0,
        ) {
            let base = summarize(&ts(&x), 0.1).unwrap();
            prop_assume!(base.std_dev > 1e-6);
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let t = summarize(&ts(&y), 0.1).unwrap();
            let tol = 1e-9 * (1.0 + base.mean.abs() * a.abs() + b.abs());
            prop_assert!((t.mean - (a * base.mean + b)).abs() < tol);
            prop_assert!((t.std_dev - a.abs() * base.std_dev).abs() < 1e-9 * (1.0 + t.std_dev));
            prop_assert!((t.variance - a * a * base.variance).abs() < 1e-9 * (1.0 + t.variance));
        }

        #[test]
        fn stats_invariants(x in prop::collection::vec(-10.0f64..10.0, 2..80)) {
            let s = summarize(&ts(&x), 0.1).unwrap();
            prop_assert!((s.variance - s.std_dev * s.std_dev).abs() <= 1e-12 * s.variance.max(1e-300));
            prop_assert!(s.mean_abs_dev <= s.std_dev + 1e-12);
        }

        #[test]
        fn grid_data_modes_are_exact_frequency_modes(
            bins in prop::collection::vec(-20i64..20, 2..60),
        ) {
            let x: Vec<f64> = bins.iter().map(|&b| b as f64 / 10.0).collect();
            let (first, _) = modes(&x, 0.1).unwrap();
            let mut counts = BTreeMap::new();
            for b in &bins { *counts.entry(*b).or_insert(0usize) += 1; }
            let best = counts.values().copied().max().unwrap();
            let expect = counts.iter().find(|(_, &c)| c == best).map(|(&b, _)| b as f64 / 10.0).unwrap();
            prop_assert_eq!(first, expect);
        }

        #[test]
        fn standardize_is_idempotent(x in prop::collection::vec(-1e3f64..1e3, 3..50)) {
            let Ok(z) = standardize(&ts(&x)) else { return Ok(()); };
            let m = mean(z.values());
            let sd = (centered_ss(z.values(), m) / (z.len() - 1) as f64).sqrt();
            prop_assert!(m.abs() < 1e-12);
            prop_assert!((sd - 1.0).abs() < 1e-12);
            let zz = standardize(&z).unwrap();
            for (a, b) in z.values().iter().zip(zz.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn median_matches_sorted_middle(x in prop::collection::vec(-5.0f64..5.0, 1..40)) {
            let mut s = x.clone();
            s.sort_by(f64::total_cmp);
            let n = s.len();
            let expect = if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 };
            prop_assert_eq!(median(&x).unwrap(), expect);
        }
    }
}
