//! CSV price-series ingestion.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hurst::{PricePath, SPACING_TOLERANCE};

/// What to do when timestamps are not uniformly spaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingPolicy {
    Reject,
    /// Last observation carried forward onto the modal-spacing grid.
    ResampleLocf,
}

/// How the date column becomes a time coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeAxis {
    /// Numbers as given; dates and datetimes in days.
    Timestamp,
    /// Row order after sorting, one unit per observation (trading-day clock).
    Observation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_column: String,
    pub price_column: String,
    pub log_transform: bool,
    pub spacing: SpacingPolicy,
    pub time_axis: TimeAxis,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            date_column: "date".into(),
            price_column: "close".into(),
            log_transform: true,
            spacing: SpacingPolicy::Reject,
            time_axis: TimeAxis::Timestamp,
        }
    }
}

pub fn load_price_csv(path: &Path, schema: &CsvSchema) -> Result<PricePath> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_price_csv(file, path, schema)
}

#[derive(Clone, Copy, PartialEq)]
enum StampKind {
    Number,
    Date,
    DateTime,
}

fn parse_stamp(raw: &str, kind: Option<StampKind>) -> Option<(f64, StampKind)> {
    let raw = raw.trim();
    let try_number = || {
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|v| (v, StampKind::Number))
    };
    let try_date = || {
        NaiveDate::parse_from_str(raw, "%Y-%m-%d").ok().map(|d| {
            (
                d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp() as f64 / 86_400.0,
                StampKind::Date,
            )
        })
    };
    let try_datetime = || {
        ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
            .map(|d| {
                (
                    d.and_utc().timestamp() as f64 / 86_400.0,
                    StampKind::DateTime,
                )
            })
    };
    match kind {
        Some(StampKind::Number) => try_number(),
        Some(StampKind::Date) => try_date(),
        Some(StampKind::DateTime) => try_datetime(),
        None => try_number().or_else(try_date).or_else(try_datetime),
    }
}

/// Most frequent spacing, grouping values within the spacing tolerance.
fn modal_spacing(steps: &[f64]) -> f64 {
    let mut sorted = steps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut best, mut best_len) = (sorted[0], 0usize);
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[start] > SPACING_TOLERANCE * sorted[start].abs()
        {
            if i - start > best_len {
                best_len = i - start;
                best = sorted[start];
            }
            start = i;
        }
    }
    best
}

/// Parses an RFC-4180 CSV with a header row into a [`PricePath`].
///
/// Rows are sorted by time. `source` names the input in error messages.
pub fn parse_price_csv<R: Read>(reader: R, source: &Path, schema: &CsvSchema) -> Result<PricePath> {
    let parse_err = |line: u64, reason: String| Error::Parse {
        path: PathBuf::from(source),
        line,
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
    };
    let date_idx = column(&schema.date_column)?;
    let price_idx = column(&schema.price_column)?;

    let mut rows: Vec<(f64, f64, u64)> = Vec::new();
    let mut kind = None;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let stamp_raw = record
            .get(date_idx)
            .ok_or_else(|| parse_err(line, format!("missing `{}` field", schema.date_column)))?;
        let (t, k) = parse_stamp(stamp_raw, kind)
            .ok_or_else(|| parse_err(line, format!("unparseable timestamp `{stamp_raw}`")))?;
        kind = Some(k);
        let price_raw = record
            .get(price_idx)
            .ok_or_else(|| parse_err(line, format!("missing `{}` field", schema.price_column)))?;
        let price: f64 = price_raw
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(line, format!("unparseable price `{price_raw}`")))?;
        let value = if schema.log_transform {
            if !(price > 0.0) {
                return Err(parse_err(
                    line,
                    format!("price {price} must be positive for log transform"),
                ));
            }
            price.ln()
        } else {
            price
        };
        rows.push((t, value, line));
    }
    if rows.len() < 2 {
        return Err(parse_err(
            rows.last().map_or(1, |r| r.2),
            format!("need at least 2 data rows, found {}", rows.len()),
        ));
    }

    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(parse_err(
            w[1].2,
            format!("duplicate timestamp (also on line {})", w[0].2),
        ));
    }
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();

    match schema.time_axis {
        TimeAxis::Observation => PricePath::uniform(values, 1.0),
        TimeAxis::Timestamp => {
            let times: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
            let dt = modal_spacing(&steps);
            let uniform = steps
                .iter()
                .all(|s| (s - dt).abs() <= SPACING_TOLERANCE * dt);
            if uniform {
                // Rebuild the grid from t0 so accumulated round-off in the
                // stamps cannot trip the spacing check.
                let t0 = times[0];
                let grid = (0..times.len()).map(|i| t0 + i as f64 * dt).collect();
                PricePath::new(grid, values)
            } else {
                match schema.spacing {
                    SpacingPolicy::ResampleLocf => PricePath::resample_locf(&times, &values, dt),
                    SpacingPolicy::Reject => {
                        let (i, s) = steps
                            .iter()
                            .enumerate()
                            .find(|(_, s)| (*s - dt).abs() > SPACING_TOLERANCE * dt)
                            .expect("non-uniform step present");
                        Err(Error::Domain(format!(
                            "{}: non-uniform spacing at line {}: step {s} vs modal {dt}; \
                             resample or use the observation time axis",
                            source.display(),
                            rows[i + 1].2
                        )))
                    }
                }
            }
        }
    }
}
