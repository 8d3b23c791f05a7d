use std::fmt;

use serde::{Deserialize, Serialize};

/// Stable machine-readable warning identifiers.
///
/// The serialized names are part of the structured output format and must not
/// change without bumping the output schema version.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningCode {
    /// Ingestion stopped at the first interior gap.
    SeriesTruncated,
    /// Missing values at the start of the record were dropped.
    LeadingMissingDropped,
    /// Missing values at the end of the record were dropped.
    TrailingMissingDropped,
    /// Zero-variance blocks were left out of an R/S table.
    BlocksSkipped,
    /// A fitted Hurst exponent fell outside (0, 1).
    HurstOutOfRange,
    /// Permutation inference assumes exchangeability, which serial
    /// correlation violates.
    SerialCorrelation,
}

impl WarningCode {
    pub fn as_str(self) -> &'static str {
        match self {
            WarningCode::SeriesTruncated => "series_truncated",
            WarningCode::LeadingMissingDropped => "leading_missing_dropped",
            WarningCode::TrailingMissingDropped => "trailing_missing_dropped",
            WarningCode::BlocksSkipped => "blocks_skipped",
            WarningCode::HurstOutOfRange => "hurst_out_of_range",
            WarningCode::SerialCorrelation => "serial_correlation",
        }
    }
}

impl fmt::Display for WarningCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

impl Warning {
    pub fn new(code: WarningCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct() {
        let codes = [
            WarningCode::SeriesTruncated,
            WarningCode::LeadingMissingDropped,
            WarningCode::TrailingMissingDropped,
            WarningCode::BlocksSkipped,
            WarningCode::HurstOutOfRange,
            WarningCode::SerialCorrelation,
        ];
        let mut names: Vec<_> = codes.iter().map(|c| c.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), codes.len());
    }
}
