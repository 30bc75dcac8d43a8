//! CSV ingestion.
//!
//! Two layouts are accepted:
//!
//! * `who_daily`: the WHO daily report table with columns `Date_reported`,
//!   `Country_code`, `Country`, `New_cases`, `Cumulative_cases`, `New_deaths`,
//!   `Cumulative_deaths`. Extra columns are ignored. The selector `WORLD`
//!   sums every country per date.
//! * `generic_xy`: any table with a numeric x column and a numeric y column.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::ValueEnum;
use nlsig::TimeSeries;
use serde::Serialize;

use crate::error::{CliError, Result};

pub const WORLD: &str = "WORLD";

const DATE_COL: &str = "Date_reported";
const CODE_COL: &str = "Country_code";
const INFECTIONS_COL: &str = "Cumulative_cases";
const DEATHS_COL: &str = "Cumulative_deaths";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Format {
    WhoDaily,
    GenericXy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Infections,
    Deaths,
}

impl SeriesKind {
    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Infections => "infections",
            SeriesKind::Deaths => "deaths",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum Selector {
    WhoDaily { country: String, series: SeriesKind },
    GenericXy { x_col: String, y_col: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub input: PathBuf,
    pub selector: Selector,
    /// Day 0 for `who_daily`. Defaults to the first date with a positive
    /// cumulative value; earlier rows are dropped either way.
    pub origin: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: TimeSeries,
    pub label: String,
    /// Calendar date of `x = 0` for date-indexed input.
    pub origin: Option<NaiveDate>,
    pub warnings: Vec<String>,
    /// Raw bytes of the input file, kept for the report digest.
    pub bytes: Vec<u8>,
}

pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    Ok(bytes)
}

pub fn ingest(cfg: &IngestConfig) -> Result<Ingested> {
    let bytes = read_input(&cfg.input)?;
    let (series, label, origin, warnings) = match &cfg.selector {
        Selector::WhoDaily { country, series } => who_daily(&bytes, country, *series, cfg.origin)?,
        Selector::GenericXy { x_col, y_col } => {
            let (ts, warnings) = generic_xy(&bytes, x_col, y_col)?;
            (ts, y_col.clone(), None, warnings)
        }
    };
    Ok(Ingested { series, label, origin, warnings, bytes })
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| CliError::MissingColumn(name.to_string()))
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn number(record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let raw = record.get(idx).unwrap_or("").trim();
    let v: f64 = raw.parse().map_err(|_| CliError::BadRow {
        line: line_of(record),
        reason: format!("`{raw}` in column `{name}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(CliError::BadRow {
            line: line_of(record),
            reason: format!("non-finite value in `{name}`"),
        });
    }
    Ok(v)
}

fn decreasing_warnings(x: &[f64], r: &[f64], label: &str) -> Vec<String> {
    x.windows(2)
        .zip(r.windows(2))
        .filter(|(_, rw)| rw[1] < rw[0])
        .map(|(xw, rw)| {
            format!("{label}: cumulative value decreases at x = {} ({} -> {})", xw[1], rw[0], rw[1])
        })
        .collect()
}

fn who_daily(
    bytes: &[u8],
    country: &str,
    kind: SeriesKind,
    origin: Option<NaiveDate>,
) -> Result<(TimeSeries, String, Option<NaiveDate>, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let date_idx = column(&headers, DATE_COL)?;
    let code_idx = column(&headers, CODE_COL)?;
    let value_name = match kind {
        SeriesKind::Infections => INFECTIONS_COL,
        SeriesKind::Deaths => DEATHS_COL,
    };
    let value_idx = column(&headers, value_name)?;
    let world = country.eq_ignore_ascii_case(WORLD);

    let mut totals: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    let mut last_date: HashMap<String, NaiveDate> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let code = record.get(code_idx).unwrap_or("");
        if !world && code != country {
            continue;
        }
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| CliError::BadRow {
            line: line_of(&record),
            reason: format!("`{raw_date}` is not a YYYY-MM-DD date"),
        })?;
        if let Some(prev) = last_date.insert(code.to_string(), date) {
            if date <= prev {
                return Err(CliError::NonMonotoneDates { key: code.to_string(), date: raw_date.to_string() });
            }
        }
        *totals.entry(date).or_insert(0.0) += number(&record, value_idx, value_name)?;
    }
    if totals.is_empty() {
        return Err(CliError::EmptySelection(format!("country code `{country}`")));
    }

    let origin = match origin {
        Some(d) => d,
        None => {
            *totals
                .iter()
                .find(|(_, v)| **v > 0.0)
                .ok_or_else(|| CliError::EmptySelection(format!("positive {value_name} for `{country}`")))?
                .0
        }
    };
    let (x, r): (Vec<f64>, Vec<f64>) =
        totals.range(origin..).map(|(d, v)| ((*d - origin).num_days() as f64, *v)).unzip();
    if x.is_empty() {
        return Err(CliError::EmptySelection(format!("dates on or after {origin}")));
    }
    let label = format!("{}/{}", country.to_ascii_uppercase(), kind.name());
    let warnings = decreasing_warnings(&x, &r, &label);
    let ts = TimeSeries::new(x, r).map_err(CliError::Series)?;
    Ok((ts, label, Some(origin), warnings))
}

fn generic_xy(bytes: &[u8], x_col: &str, y_col: &str) -> Result<(TimeSeries, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let xi = column(&headers, x_col)?;
    let yi = column(&headers, y_col)?;
    let mut x = Vec::new();
    let mut r = Vec::new();
    for record in reader.records() {
        let record = record?;
        let xv = number(&record, xi, x_col)?;
        if let Some(&prev) = x.last() {
            if xv <= prev {
                return Err(CliError::BadRow {
                    line: line_of(&record),
                    reason: format!("`{x_col}` must be strictly increasing"),
                });
            }
        }
        x.push(xv);
        r.push(number(&record, yi, y_col)?);
    }
    if x.is_empty() {
        return Err(CliError::EmptySelection(format!("data rows in columns `{x_col}`, `{y_col}`")));
    }
    let warnings = decreasing_warnings(&x, &r, y_col);
    Ok((TimeSeries::new(x, r).map_err(CliError::Series)?, warnings))
}

/// Writes `ts` in the `generic_xy` layout. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_generic_csv(path: &Path, ts: &TimeSeries, x_col: &str, y_col: &str) -> Result<()> {
    let io = |source| CliError::Write { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([x_col, y_col])?;
    for (x, r) in ts.x().iter().zip(ts.r()) {
        w.write_record([x.to_string(), r.to_string()])?;
    }
    w.flush().map_err(io)?;
    Ok(())
}
