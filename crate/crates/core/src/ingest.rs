//! Text formats for monthly series.
//!
//! Three layouts are understood:
//!
//! - `cpc_table`: one row per year, `year v1 ... v12`, whitespace separated,
//!   as published by the NOAA Climate Prediction Center. Lines that do not
//!   start with a year (titles, `YEAR JAN FEB ...` headers) separate tables;
//!   a file may hold several tables, selected with
//!   [`IngestOptions::section`].
//! - `csv_pair`: `YYYY-MM,value` per line.
//! - `column`: one value per line, no calendar.
//!
//! In every format blank lines and `#` comments are ignored and values equal
//! to the missing sentinel (default `-999.9`) are treated as absent. Absent
//! values at either end are dropped; interior gaps are handled per
//! [`GapPolicy`].

use serde::{Deserialize, Serialize};

use crate::series::{TimeSeries, YearMonth};
use crate::warning::{Warning, WarningCode};
use crate::{Error, Result};

pub const DEFAULT_MISSING_SENTINEL: f64 = -999.9;
const SENTINEL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    CpcTable,
    CsvPair,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPolicy {
    #[default]
    Error,
    TruncateAtFirstGap,
}

/// Inclusive calendar range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    start: YearMonth,
    end: YearMonth,
}

impl MonthRange {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self> {
        if start > end {
            return Err(Error::validation(format!(
                "range start {start} is after range end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn end(&self) -> YearMonth {
        self.end
    }

    pub fn contains(&self, ym: YearMonth) -> bool {
        self.start <= ym && ym <= self.end
    }
}

impl std::str::FromStr for MonthRange {
    type Err = Error;

    /// `YYYY-MM:YYYY-MM`
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::validation(format!("`{s}` is not a YYYY-MM:YYYY-MM range")))?;
        Self::new(a.parse()?, b.parse()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub format: Format,
    pub missing_sentinel: f64,
    pub range: Option<MonthRange>,
    pub on_gap: GapPolicy,
    /// Which table of a multi-table `cpc_table` file to read (0-based).
    /// Required when the file holds more than one table.
    pub section: Option<usize>,
}

impl IngestOptions {
    pub fn new(format: Format) -> Self {
        Self {
            format,
            missing_sentinel: DEFAULT_MISSING_SENTINEL,
            range: None,
            on_gap: GapPolicy::Error,
            section: None,
        }
    }
}

/// A parsed series together with anything the parser had to drop.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: TimeSeries,
    pub warnings: Vec<Warning>,
}

/// One sample slot before gap resolution. `date` is `None` for the column format.
struct Slot {
    date: Option<YearMonth>,
    value: Option<f64>,
}

pub fn parse(text: &str, opts: &IngestOptions) -> Result<Ingested> {
    if text.trim().is_empty() {
        return Err(Error::validation("input is empty"));
    }
    let mut slots = match opts.format {
        Format::CpcTable => cpc_slots(text, opts)?,
        Format::CsvPair => csv_slots(text, opts)?,
        Format::Column => column_slots(text, opts)?,
    };
    if let Some(range) = opts.range {
        if opts.format == Format::Column {
            return Err(Error::validation(
                "a date range needs a dated format (cpc_table or csv_pair)",
            ));
        }
        slots.retain(|s| s.date.is_some_and(|d| range.contains(d)));
    }
    resolve_gaps(slots, opts.on_gap)
}

fn is_missing(v: f64, sentinel: f64) -> bool {
    (v - sentinel).abs() < SENTINEL_TOLERANCE
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("`{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("`{tok}` is not finite")));
    }
    Ok(v)
}

fn cpc_slots(text: &str, opts: &IngestOptions) -> Result<Vec<Slot>> {
    // Split into tables: runs of year rows separated by non-year lines.
    let mut sections: Vec<Vec<(usize, &str)>> = Vec::new();
    let mut in_table = false;
    for (line, l) in data_lines(text) {
        let first = l.split_whitespace().next().unwrap_or("");
        let is_row = first.len() == 4 && first.bytes().all(|b| b.is_ascii_digit());
        if is_row {
            if !in_table {
                sections.push(Vec::new());
                in_table = true;
            }
            sections.last_mut().unwrap().push((line, l));
        } else {
            in_table = false;
        }
    }
    let rows = match (sections.len(), opts.section) {
        (0, _) => return Err(Error::validation("no `year v1 .. v12` rows found")),
        (_, Some(k)) => sections.get(k).ok_or_else(|| {
            Error::validation(format!(
                "table {k} requested but the file holds {} table(s)",
                sections.len()
            ))
        })?,
        (1, None) => &sections[0],
        (k, None) => {
            return Err(Error::validation(format!(
                "the file holds {k} tables; choose one with a section index"
            )))
        }
    };

    let mut slots = Vec::with_capacity(rows.len() * 12);
    let mut prev_year: Option<i32> = None;
    for &(line, l) in rows {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 13 {
            return Err(Error::parse(
                line,
                format!(
                    "expected a year and 12 monthly values, found {} fields",
                    toks.len()
                ),
            ));
        }
        let year: i32 = toks[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad year `{}`", toks[0])))?;
        if let Some(p) = prev_year {
            if year != p + 1 {
                return Err(Error::parse(
                    line,
                    format!("year {year} does not follow {p}"),
                ));
            }
        }
        prev_year = Some(year);
        for (m, tok) in toks[1..].iter().enumerate() {
            let v = parse_value(tok, line)?;
            slots.push(Slot {
                date: Some(YearMonth::new(year, m as u8 + 1)?),
                value: (!is_missing(v, opts.missing_sentinel)).then_some(v),
            });
        }
    }
    Ok(slots)
}

fn csv_slots(text: &str, opts: &IngestOptions) -> Result<Vec<Slot>> {
    let mut slots: Vec<Slot> = Vec::new();
    let mut prev: Option<YearMonth> = None;
    for (line, l) in data_lines(text) {
        let (d, v) = l
            .split_once(',')
            .ok_or_else(|| Error::parse(line, "expected `YYYY-MM,value`"))?;
        let date: YearMonth = d
            .trim()
            .parse()
            .map_err(|e: Error| Error::parse(line, e.to_string()))?;
        let v = parse_value(v.trim(), line)?;
        if let Some(p) = prev {
            if date <= p {
                return Err(Error::parse(
                    line,
                    format!("date {date} is not after the previous row ({p})"),
                ));
            }
            // Months absent from the file are gaps.
            for k in 1..p.months_until(date) {
                slots.push(Slot {
                    date: Some(p.add_months(k)),
                    value: None,
                });
            }
        }
        prev = Some(date);
        slots.push(Slot {
            date: Some(date),
            value: (!is_missing(v, opts.missing_sentinel)).then_some(v),
        });
    }
    if slots.is_empty() {
        return Err(Error::validation("no `YYYY-MM,value` rows found"));
    }
    Ok(slots)
}

fn column_slots(text: &str, opts: &IngestOptions) -> Result<Vec<Slot>> {
    data_lines(text)
        .map(|(line, l)| {
            let v = parse_value(l, line)?;
            Ok(Slot {
                date: None,
                value: (!is_missing(v, opts.missing_sentinel)).then_some(v),
            })
        })
        .collect()
}

fn resolve_gaps(slots: Vec<Slot>, policy: GapPolicy) -> Result<Ingested> {
    let mut warnings = Vec::new();
    let first = slots.iter().position(|s| s.value.is_some());
    let last = slots.iter().rposition(|s| s.value.is_some());
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::validation("no samples left after range selection"));
    };
    if first > 0 {
        warnings.push(Warning::new(
            WarningCode::LeadingMissingDropped,
            format!("{first} leading missing value(s) dropped"),
        ));
    }
    if last + 1 < slots.len() {
        warnings.push(Warning::new(
            WarningCode::TrailingMissingDropped,
            format!(
                "{} trailing missing value(s) dropped",
                slots.len() - last - 1
            ),
        ));
    }
    let kept = &slots[first..=last];
    let mut values = Vec::with_capacity(kept.len());
    for (i, s) in kept.iter().enumerate() {
        match s.value {
            Some(v) => values.push(v),
            None => {
                let at = match s.date {
                    Some(d) => d.to_string(),
                    None => format!("sample {}", first + i + 1),
                };
                match policy {
                    GapPolicy::Error => {
                        return Err(Error::validation(format!("missing value at {at}")))
                    }
                    GapPolicy::TruncateAtFirstGap => {
                        warnings.push(Warning::new(
                            WarningCode::SeriesTruncated,
                            format!(
                                "series truncated at the first gap ({at}); {} sample(s) kept",
                                values.len()
                            ),
                        ));
                        break;
                    }
                }
            }
        }
    }
    let mut series = TimeSeries::new(values)?;
    if let Some(d) = kept[0].date {
        series = series.with_start(d);
    }
    Ok(Ingested { series, warnings })
}

/// Writes the `column` format. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn to_column_string(ts: &TimeSeries) -> String {
    let mut out = String::new();
    if !ts.label().is_empty() {
        out.push_str("# ");
        out.push_str(&ts.label().replace('\n', " "));
        out.push('\n');
    }
    for v in ts.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

/// Guesses the format of `text`: `.csv` paths are `csv_pair`; otherwise a
/// first data line with 13 fields is a `cpc_table` and anything else a `column`.
pub fn detect_format(path_hint: Option<&str>, text: &str) -> Format {
    if path_hint.is_some_and(|p| p.to_ascii_lowercase().ends_with(".csv")) {
        return Format::CsvPair;
    }
    let year_row = data_lines(text).find(|(_, l)| {
        let first = l.split_whitespace().next().unwrap_or("");
        first.len() == 4 && first.bytes().all(|b| b.is_ascii_digit())
    });
    match year_row {
        Some((_, l)) if l.split_whitespace().count() == 13 => Format::CpcTable,
        _ if data_lines(text).any(|(_, l)| l.contains(',')) => Format::CsvPair,
        _ => Format::Column,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts(format: Format) -> IngestOptions {
        IngestOptions::new(format)
    }

    const TWO_YEARS: &str = "\
YEAR  JAN  FEB  MAR  APR  MAY  JUN  JUL  AUG  SEP  OCT  NOV  DEC
2014  0.1  0.2  0.3  0.4  0.5  0.6  0.7  0.8  0.9  1.0  1.1  1.2
2015 -0.1 -0.2 -0.3 -0.4 -0.5 -0.6 -0.7 -0.8 -999.9 -999.9 -999.9 -999.9
";

    #[test]
    fn cpc_table_with_trailing_missing() {
        let got = parse(TWO_YEARS, &opts(Format::CpcTable)).unwrap();
        let s = &got.series;
        assert_eq!(s.len(), 20);
        assert_eq!(s.start(), Some(YearMonth::new(2014, 1).unwrap()));
        assert_eq!(s.end(), Some(YearMonth::new(2015, 8).unwrap()));
        assert_eq!(s.values()[12], -0.1);
        assert_eq!(got.warnings.len(), 1);
        assert_eq!(got.warnings[0].code, WarningCode::TrailingMissingDropped);
    }

    #[test]
    fn cpc_range_selection() {
        let mut o = opts(Format::CpcTable);
        o.range = Some("2014-11:2015-02".parse().unwrap());
        let s = parse(TWO_YEARS, &o).unwrap().series;
        assert_eq!(s.values(), &[1.1, 1.2, -0.1, -0.2]);
        assert_eq!(s.start().unwrap().to_string(), "2014-11");

        o.range = Some("2015-10:2015-12".parse().unwrap());
        assert!(matches!(parse(TWO_YEARS, &o), Err(Error::Validation(_))));
    }

    #[test]
    fn cpc_multiple_tables_need_a_section() {
        let text = format!("ANOMALY\n{TWO_YEARS}\nSTANDARDIZED DATA\n{TWO_YEARS}");
        assert!(matches!(
            parse(&text, &opts(Format::CpcTable)),
            Err(Error::Validation(_))
        ));
        let mut o = opts(Format::CpcTable);
        o.section = Some(1);
        assert_eq!(parse(&text, &o).unwrap().series.len(), 20);
        o.section = Some(2);
        assert!(parse(&text, &o).is_err());
    }

    #[test]
    fn cpc_malformed_row_reports_line() {
        let text = "2014 0.1 0.2\n";
        assert_eq!(
            parse(text, &opts(Format::CpcTable)).unwrap_err(),
            Error::Parse {
                line: 1,
                message: "expected a year and 12 monthly values, found 3 fields".into()
            }
        );
        let text = "2014 0 0 0 0 0 0 0 0 0 0 0 0\n2016 0 0 0 0 0 0 0 0 0 0 0 x\n";
        assert!(matches!(
            parse(text, &opts(Format::CpcTable)),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn cpc_interior_gap() {
        let text = "2014 1 2 3 -999.9 5 6 7 8 9 10 11 12\n";
        assert!(matches!(
            parse(text, &opts(Format::CpcTable)),
            Err(Error::Validation(m)) if m.contains("2014-04")
        ));
        let mut o = opts(Format::CpcTable);
        o.on_gap = GapPolicy::TruncateAtFirstGap;
        let got = parse(text, &o).unwrap();
        assert_eq!(got.series.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(got.warnings[0].code, WarningCode::SeriesTruncated);
    }

    #[test]
    fn sentinel_tolerance() {
        let text = "1\n-999.90000001\n3\n";
        assert!(parse(text, &opts(Format::Column)).is_err());
        let mut o = opts(Format::Column);
        o.missing_sentinel = -99.0;
        assert_eq!(parse(text, &o).unwrap().series.len(), 3);
    }

    #[test]
    fn column_file() {
        let got = parse("1\n2\n3", &opts(Format::Column)).unwrap();
        assert_eq!(got.series.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(got.series.start(), None);
        let got = parse("# comment\n\n1.5\n  -2e-3 \n", &opts(Format::Column)).unwrap();
        assert_eq!(got.series.values(), &[1.5, -0.002]);
        assert!(matches!(
            parse("1\nabc\n", &opts(Format::Column)),
            Err(Error::Parse { line: 2, .. })
        ));
        let mut o = opts(Format::Column);
        o.range = Some("2000-01:2000-02".parse().unwrap());
        assert!(parse("1\n2\n", &o).is_err());
    }

    #[test]
    fn empty_text() {
        assert!(matches!(
            parse("", &opts(Format::Column)),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse("# only a comment\n", &opts(Format::Column)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn csv_pairs_and_gaps() {
        let got = parse("1951-01,1.5\n1951-02,0.7\n", &opts(Format::CsvPair)).unwrap();
        assert_eq!(got.series.values(), &[1.5, 0.7]);
        assert_eq!(got.series.start().unwrap().to_string(), "1951-01");

        let err = parse("1951-01,1.5\n1951-03,0.2\n", &opts(Format::CsvPair)).unwrap_err();
        assert!(
            matches!(&err, Error::Validation(m) if m.contains("1951-02")),
            "{err}"
        );

        assert!(matches!(
            parse("1951-02,1\n1951-01,2\n", &opts(Format::CsvPair)),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("1951-01;1\n", &opts(Format::CsvPair)),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn range_parsing() {
        assert!("2015-01:2014-01".parse::<MonthRange>().is_err());
        let r: MonthRange = "1951-01:2015-08".parse().unwrap();
        assert_eq!(r.start().months_until(r.end()) + 1, 776);
    }

    #[test]
    fn format_detection() {
        assert_eq!(detect_format(Some("x.CSV"), "1"), Format::CsvPair);
        assert_eq!(detect_format(None, TWO_YEARS), Format::CpcTable);
        assert_eq!(detect_format(None, "1951-01,2\n"), Format::CsvPair);
        assert_eq!(detect_format(None, "1\n2\n"), Format::Column);
    }

    proptest! {
        #[test]
        fn column_round_trip_is_bit_exact(v in prop::collection::vec(-1e6f64..1e6, 1..50)) {
            let ts = TimeSeries::new(v.clone()).unwrap().with_label("x");
            let back = parse(&to_column_string(&ts), &opts(Format::Column)).unwrap().series;
            prop_assert_eq!(back.values().len(), v.len());
            for (a, b) in back.values().iter().zip(&v) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn range_selection_commutes_with_parsing(
            vals in prop::collection::vec(-3.0f64..3.0, 24..48),
            a in 0usize..12, len in 1usize..12,
        ) {
            let start = YearMonth::new(1990, 1).unwrap();
            let csv: String = vals.iter().enumerate()
                .map(|(i, v)| format!("{},{}\n", start.add_months(i as i64), v))
                .collect();
            let mut o = opts(Format::CsvPair);
            o.range = Some(MonthRange::new(start.add_months(a as i64), start.add_months((a + len - 1) as i64)).unwrap());
            let ranged = parse(&csv, &o).unwrap().series;
            let full = parse(&csv, &opts(Format::CsvPair)).unwrap().series;
            prop_assert_eq!(ranged.values(), &full.values()[a..a + len]);
            prop_assert_eq!(ranged.start(), full.date_of(a));
        }
    }
}
