use std::path::Path;

use longmem::ingest::{self, Format, GapPolicy, IngestOptions};
use longmem::{TimeSeries, Warning};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{GapArg, InputFormat, ParseArgs};
use crate::error::{CliError, CliResult};

/// Provenance of one input file as echoed in the output envelope.
#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
    pub format: Format,
    /// Samples after missing-value handling and range selection.
    pub rows: usize,
    pub start: Option<String>,
    pub end: Option<String>,
}

pub struct Loaded {
    pub series: TimeSeries,
    pub info: InputInfo,
    pub warnings: Vec<Warning>,
}

pub fn load(path: &Path, args: &ParseArgs) -> CliResult<Loaded> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::Core(longmem::Error::Validation(format!(
            "{} is not UTF-8 text",
            path.display()
        )))
    })?;

    let path_str = path.display().to_string();
    let format = match args.input_format {
        Some(InputFormat::CpcTable) => Format::CpcTable,
        Some(InputFormat::CsvPair) => Format::CsvPair,
        Some(InputFormat::Column) => Format::Column,
        None => ingest::detect_format(Some(&path_str), &text),
    };
    let mut opts = IngestOptions::new(format);
    opts.missing_sentinel = args.missing;
    opts.on_gap = match args.on_gap {
        GapArg::Error => GapPolicy::Error,
        GapArg::Truncate => GapPolicy::TruncateAtFirstGap,
    };
    opts.section = args.section;
    if let Some(r) = &args.range {
        opts.range = Some(r.parse()?);
    }

    let parsed = ingest::parse(&text, &opts).map_err(|e| in_file(path, e))?;
    let series = parsed.series;
    let series = if series.label().is_empty() {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        series.with_label(name)
    } else {
        series
    };
    let info = InputInfo {
        path: path_str,
        sha256,
        format,
        rows: series.len(),
        start: series.start().map(|d| d.to_string()),
        end: series.end().map(|d| d.to_string()),
    };
    Ok(Loaded {
        series,
        info,
        warnings: parsed.warnings,
    })
}

/// Prefixes parse and validation messages with the file name.
fn in_file(path: &Path, e: longmem::Error) -> CliError {
    let p = path.display();
    CliError::Core(match e {
        longmem::Error::Parse { line, message } => longmem::Error::Parse {
            line,
            message: format!("{p}: {message}"),
        },
        longmem::Error::Validation(m) => longmem::Error::Validation(format!("{p}: {m}")),
        other => other,
    })
}
