//! Long-range memory and chaos diagnostics for climate-index time series.
//!
//! The crate covers the whole analysis chain for a monthly index such as the
//! Southern Oscillation Index:
//!
//! - [`series`]: the [`TimeSeries`] container and descriptive statistics.
//! - [`ingest`]: parsing of climate-center monthly tables, `YYYY-MM,value`
//!   pairs and single-column files.
//! - [`acf`]: autocorrelation by direct summation and by FFT.
//! - [`hurst`]: rescaled-range (R/S) analysis, log-log Hurst fits, the
//!   five-variant estimator suite, fractal dimension and fractal correlation.
//! - [`chaos`]: delay embedding and the Kantz largest-Lyapunov-exponent curve.
//! - [`permtest`]: seeded permutation test of the correlation of two series.
//! - [`synth`]: seeded generators used as oracles for every estimator.
//!
//! Every analysis is a pure function of its inputs. Seeded procedures derive
//! one random substream per work item, so parallel and sequential execution
//! agree bit for bit.

// `!(x > 0.0)` is used to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acf;
pub mod chaos;
mod error;
pub mod hurst;
pub mod ingest;
pub mod permtest;
mod regression;
pub mod series;
pub mod synth;
mod warning;

pub use error::{Error, Result};
pub use regression::LineFit;
pub use series::{SummaryStats, TimeSeries, YearMonth};
pub use warning::{Warning, WarningCode};

/// How independent work items (permutations, reference points) are scheduled.
///
/// Both variants produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}
