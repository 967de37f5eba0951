//! CSV ingestion and threshold resolution.
//!
//! Input files are headered CSV with configurable timestamp/value columns.
//! Empty fields and `NA` mark missing values, which are kept as gaps (they
//! still consume an index, so downstream pairing drops pairs spanning them);
//! nothing is ever imputed. Lines starting with `#` are treated as comments,
//! which lets outputs embed their configuration and still round-trip.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::ExceedanceSeries;
use crate::stats::quantile_linear;
use crate::{Error, Result};

/// Column names for ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub time: String,
    pub value: String,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            time: "t".into(),
            value: "value".into(),
        }
    }
}

/// A raw input series: strictly increasing timestamps, values with gaps.
#[derive(Debug, Clone)]
pub struct RawSeries {
    pub timestamps: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub source: String,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field == "NA"
}

/// Reads a time/value CSV. Rows keep their order; timestamps must strictly
/// increase, malformed rows are reported with their 1-based line number.
pub fn ingest_csv(path: &Path, columns: &ColumnSpec) -> Result<RawSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv {
            line: 0,
            msg: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let find = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv {
            line: 1,
            msg: format!("column '{name}' not found in header {headers:?}"),
        })
    };
    let time_idx = find(&columns.time)?;
    let value_idx = find(&columns.value)?;

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(0);
        let time_field = record.get(time_idx).ok_or(Error::Csv {
            line,
            msg: "missing timestamp field".into(),
        })?;
        let t: f64 = time_field.parse().map_err(|_| Error::Csv {
            line,
            msg: format!("unparseable timestamp '{time_field}'"),
        })?;
        if let Some(&last) = timestamps.last() {
            if t <= last {
                return Err(Error::Csv {
                    line,
                    msg: format!("timestamps must strictly increase ({t} after {last})"),
                });
            }
        }
        let value_field = record.get(value_idx).ok_or(Error::Csv {
            line,
            msg: "missing value field".into(),
        })?;
        let value = if is_missing(value_field) {
            None
        } else {
            Some(value_field.parse::<f64>().map_err(|_| Error::Csv {
                line,
                msg: format!("unparseable value '{value_field}'"),
            })?)
        };
        timestamps.push(t);
        values.push(value);
    }
    if values.iter().all(|v| v.is_none()) {
        return Err(Error::InvalidInput(format!(
            "{}: no usable values (empty or all missing)",
            path.display()
        )));
    }
    Ok(RawSeries {
        timestamps,
        values,
        source: path.display().to_string(),
    })
}

/// How to resolve the exceedance threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSpec {
    /// Use the value as-is.
    Absolute(f64),
    /// Quantile level in (0, 1) of the non-missing values.
    Percentile(f64),
}

/// Resolved threshold with provenance, embedded in outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdMeta {
    pub spec: ThresholdSpec,
    pub threshold: f64,
    /// Quantile convention used for percentile thresholds.
    pub quantile_convention: String,
    pub n_observations: usize,
    pub n_missing: usize,
    pub n_exceedances: usize,
    /// Set when the threshold sits at or above every observed value.
    pub warning: Option<String>,
}

/// Thresholds a raw series into exceedances `X_j = max(Y_j - u, 0)`.
///
/// Missing rows are dropped from the series but keep advancing the original
/// index carried by [`ExceedanceSeries`].
pub fn to_exceedances(
    raw: &RawSeries,
    spec: ThresholdSpec,
) -> Result<(ExceedanceSeries, ThresholdMeta)> {
    let observed: Vec<f64> = raw.values.iter().filter_map(|v| *v).collect();
    if observed.is_empty() {
        return Err(Error::InvalidInput("no non-missing values".into()));
    }
    let threshold = match spec {
        ThresholdSpec::Absolute(u) => u,
        ThresholdSpec::Percentile(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParam(format!(
                    "percentile must be in (0, 1), got {p}"
                )));
            }
            quantile_linear(&observed, p)?
        }
    };

    let mut times = Vec::with_capacity(observed.len());
    let mut values = Vec::with_capacity(observed.len());
    let mut indices = Vec::with_capacity(observed.len());
    for (i, (t, v)) in raw.timestamps.iter().zip(&raw.values).enumerate() {
        if let Some(y) = v {
            times.push(*t);
            values.push((y - threshold).max(0.0));
            indices.push(i);
        }
    }
    let series = ExceedanceSeries::with_indices(times, values, indices, threshold)?;
    let n_exceedances = series.n_positive();
    let warning = (n_exceedances == 0).then(|| {
        format!("threshold {threshold} is at or above all {} observed values", observed.len())
    });
    Ok((
        series,
        ThresholdMeta {
            spec,
            threshold,
            quantile_convention: "linear interpolation between order statistics (type 7)".into(),
            n_observations: observed.len(),
            n_missing: raw.n_missing(),
            n_exceedances,
            warning,
        },
    ))
}
