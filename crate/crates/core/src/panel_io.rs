//! CSV ingestion of time-series panels and CSV/JSON persistence of results.
//!
//! Every CSV artifact may start with `# key=value` comment lines carrying the
//! run configuration; readers skip them. Numbers are written with 12
//! significant digits, dates as ISO-8601 (`YYYY-MM-DD`), gaps as empty CSV
//! fields or JSON `null`.

use std::fs;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde_json::{json, Map, Value};

use crate::compare::Comparison;
use crate::error::{Error, Result};
use crate::granger::GrangerResult;
use crate::indicator::IndicatorSeries;
use crate::panel::TimeSeriesPanel;
use crate::rmt::TwTable;

pub const ISO_DATE: &str = "%Y-%m-%d";

/// Ordered `key=value` pairs embedded in every output file.
pub type Meta = [(String, String)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    #[default]
    DropRow,
    Error,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop_row" => Ok(Self::DropRow),
            "error" => Ok(Self::Error),
            other => Err(Error::Usage(format!(
                "unknown missing policy `{other}` (expected drop_row or error)"
            ))),
        }
    }
}

/// Which columns to load and how to treat gaps. `None` fields mean "first
/// column" and "all remaining columns" respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSchema {
    pub time_column: Option<String>,
    pub value_columns: Option<Vec<String>>,
    pub date_format: String,
    pub missing_policy: MissingPolicy,
}

impl Default for PanelSchema {
    fn default() -> Self {
        Self {
            time_column: None,
            value_columns: None,
            date_format: ISO_DATE.to_string(),
            missing_policy: MissingPolicy::DropRow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    /// 1-based data row numbers (header excluded) that were dropped.
    pub dropped_rows: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LoadedPanel {
    pub panel: TimeSeriesPanel<f64>,
    pub report: LoadReport,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "NaN" | "nan" | "null")
}

pub fn read_panel(path: impl AsRef<Path>, schema: &PanelSchema) -> Result<LoadedPanel> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_panel(file, schema)
}

/// Parses a panel from any CSV source.
pub fn parse_panel<R: Read>(source: R, schema: &PanelSchema) -> Result<LoadedPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: String::new(),
            message: "empty header".into(),
        });
    }
    let locate = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    };
    let time_idx = match &schema.time_column {
        Some(name) => locate(name)?,
        None => 0,
    };
    let value_idx: Vec<usize> = match &schema.value_columns {
        Some(names) => names.iter().map(|n| locate(n)).collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != time_idx).collect(),
    };
    if value_idx.contains(&time_idx) {
        return Err(Error::Usage(format!(
            "time column `{}` cannot also be a value column",
            headers[time_idx]
        )));
    }

    let mut timestamps: Vec<NaiveDate> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); value_idx.len()];
    let mut report = LoadReport {
        rows_read: 0,
        rows_dropped: 0,
        dropped_rows: Vec::new(),
    };

    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        report.rows_read += 1;
        let cell = |idx: usize| record.get(idx).unwrap_or("");

        let ts_cell = cell(time_idx);
        let ts =
            NaiveDate::parse_from_str(ts_cell, &schema.date_format).map_err(|e| Error::Parse {
                row,
                column: headers[time_idx].clone(),
                message: format!("`{ts_cell}`: {e}"),
            })?;

        let mut values = Vec::with_capacity(value_idx.len());
        let mut missing = None;
        for &idx in &value_idx {
            let raw = cell(idx);
            if is_missing(raw) {
                missing.get_or_insert(idx);
                continue;
            }
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row,
                column: headers[idx].clone(),
                message: format!("`{raw}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[idx].clone(),
                    message: format!("`{raw}` is not finite"),
                });
            }
            values.push(v);
        }
        if let Some(idx) = missing {
            match schema.missing_policy {
                MissingPolicy::DropRow => {
                    report.rows_dropped += 1;
                    report.dropped_rows.push(row);
                    continue;
                }
                MissingPolicy::Error => {
                    return Err(Error::Parse {
                        row,
                        column: headers[idx].clone(),
                        message: "missing value".into(),
                    })
                }
            }
        }

        if let Some(&prev) = timestamps.last() {
            if ts == prev {
                return Err(Error::Duplicate { row });
            }
            if ts < prev {
                return Err(Error::Order { row });
            }
        }
        timestamps.push(ts);
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
    }

    let names = value_idx.iter().map(|&i| headers[i].clone()).collect();
    let panel = TimeSeriesPanel::new(timestamps, names, columns)?;
    Ok(LoadedPanel { panel, report })
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Usage(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Shortest decimal text of `v` rounded to 12 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig12(v);
    if r == 0.0 {
        return "0".into();
    }
    let mag = r.abs();
    if (1e-4..1e15).contains(&mag) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn json_number(v: f64) -> Value {
    if v.is_finite() {
        json!(round_sig12(v))
    } else {
        Value::Null
    }
}

fn json_opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, json_number)
}

fn csv_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, format_number)
}

fn meta_json(meta: &Meta) -> Value {
    Value::Object(
        meta.iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect(),
    )
}

fn csv_document(meta: &Meta, header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Consistency(format!("csv buffer: {e}")))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// Anything that can be persisted as CSV or JSON.
pub trait Artifact {
    fn to_csv(&self, meta: &Meta) -> Result<String>;
    fn to_json(&self, meta: &Meta) -> Result<Value>;
}

/// Renders an artifact in the requested format.
pub fn render_results<A: Artifact + ?Sized>(
    artifact: &A,
    format: OutputFormat,
    meta: &Meta,
) -> Result<String> {
    match format {
        OutputFormat::Csv => artifact.to_csv(meta),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(&artifact.to_json(meta)?)?;
            text.push('\n');
            Ok(text)
        }
    }
}

pub fn write_results<A: Artifact + ?Sized>(
    artifact: &A,
    path: impl AsRef<Path>,
    format: OutputFormat,
    meta: &Meta,
) -> Result<()> {
    let path = path.as_ref();
    let text = render_results(artifact, format, meta)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

const SIGMA_PREFIX: &str = "sigma_lambda_";

impl Artifact for IndicatorSeries<f64> {
    fn to_csv(&self, meta: &Meta) -> Result<String> {
        let mut full_meta = vec![("effect".to_string(), self.effect.clone())];
        full_meta.extend(meta.iter().filter(|(k, _)| k != "effect").cloned());
        let mut header = vec!["timestamp".to_string()];
        header.extend(self.causes.iter().map(|c| format!("{SIGMA_PREFIX}{c}")));
        let rows: Vec<Vec<String>> = self
            .timestamps
            .iter()
            .zip(&self.sigma_lambda)
            .map(|(ts, row)| {
                let mut r = vec![ts.format(ISO_DATE).to_string()];
                r.extend(row.iter().map(|v| csv_opt(*v)));
                r
            })
            .collect();
        csv_document(&full_meta, &header, &rows)
    }

    fn to_json(&self, meta: &Meta) -> Result<Value> {
        let rows: Vec<Value> = self
            .timestamps
            .iter()
            .zip(&self.sigma_lambda)
            .map(|(ts, row)| {
                let mut obj = Map::new();
                obj.insert("timestamp".into(), json!(ts.format(ISO_DATE).to_string()));
                for (cause, v) in self.causes.iter().zip(row) {
                    obj.insert(format!("{SIGMA_PREFIX}{cause}"), json_opt(*v));
                }
                Value::Object(obj)
            })
            .collect();
        Ok(json!({
            "config": meta_json(meta),
            "effect": self.effect,
            "causes": self.causes,
            "rows": rows,
        }))
    }
}

fn parse_date(text: &str, row: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text, ISO_DATE).map_err(|e| Error::Parse {
        row,
        column: "timestamp".into(),
        message: format!("`{text}`: {e}"),
    })
}

/// Reads an indicator series written by [`write_results`] (CSV or JSON).
pub fn read_indicator(path: impl AsRef<Path>) -> Result<IndicatorSeries<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_indicator(&text)
}

pub fn parse_indicator(text: &str) -> Result<IndicatorSeries<f64>> {
    if text.trim_start().starts_with('{') {
        parse_indicator_json(text)
    } else {
        parse_indicator_csv(text)
    }
}

fn parse_indicator_csv(text: &str) -> Result<IndicatorSeries<f64>> {
    let effect = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.trim_start_matches('#').trim().strip_prefix("effect="))
        .unwrap_or_default()
        .to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let causes: Vec<String> = headers
        .iter()
        .skip(1)
        .map(|h| h.strip_prefix(SIGMA_PREFIX).unwrap_or(h).to_string())
        .collect();
    let mut timestamps = Vec::new();
    let mut sigma_lambda = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        timestamps.push(parse_date(record.get(0).unwrap_or(""), i + 1)?);
        let row = (1..headers.len())
            .map(|j| {
                let cell = record.get(j).unwrap_or("");
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                        row: i + 1,
                        column: headers[j].clone(),
                        message: format!("`{cell}` is not a number"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        sigma_lambda.push(row);
    }
    Ok(IndicatorSeries {
        effect,
        causes,
        timestamps,
        sigma_lambda,
    })
}

fn parse_indicator_json(text: &str) -> Result<IndicatorSeries<f64>> {
    let doc: Value = serde_json::from_str(text)?;
    let bad = |msg: &str| Error::Parse {
        row: 0,
        column: String::new(),
        message: msg.to_string(),
    };
    let effect = doc["effect"]
        .as_str()
        .ok_or_else(|| bad("missing effect"))?
        .to_string();
    let causes: Vec<String> = doc["causes"]
        .as_array()
        .ok_or_else(|| bad("missing causes"))?
        .iter()
        .map(|c| {
            c.as_str()
                .map(str::to_string)
                .ok_or_else(|| bad("cause not a string"))
        })
        .collect::<Result<_>>()?;
    let mut timestamps = Vec::new();
    let mut sigma_lambda = Vec::new();
    for (i, row) in doc["rows"]
        .as_array()
        .ok_or_else(|| bad("missing rows"))?
        .iter()
        .enumerate()
    {
        let ts = row["timestamp"]
            .as_str()
            .ok_or_else(|| bad("missing timestamp"))?;
        timestamps.push(parse_date(ts, i + 1)?);
        sigma_lambda.push(
            causes
                .iter()
                .map(|c| row[format!("{SIGMA_PREFIX}{c}")].as_f64())
                .collect(),
        );
    }
    Ok(IndicatorSeries {
        effect,
        causes,
        timestamps,
        sigma_lambda,
    })
}

impl Artifact for [GrangerResult<f64>] {
    fn to_csv(&self, meta: &Meta) -> Result<String> {
        let mut full_meta = meta.to_vec();
        for r in self {
            if let Err(e) = &r.outcome {
                full_meta.push((
                    "error".into(),
                    format!("{} lag {} {}: {e}", r.cause, r.lag_order, r.variant),
                ));
            }
        }
        let header: Vec<String> = [
            "cause",
            "lag_order",
            "variant",
            "f_stat",
            "p_value",
            "log_inv_p",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let rows: Vec<Vec<String>> = self
            .iter()
            .map(|r| {
                let (f, p, l) = match &r.outcome {
                    Ok(s) => (
                        format_number(s.f_statistic),
                        format_number(s.p_value),
                        format_number(s.log_inv_p),
                    ),
                    Err(_) => Default::default(),
                };
                vec![
                    r.cause.clone(),
                    r.lag_order.to_string(),
                    r.variant.to_string(),
                    f,
                    p,
                    l,
                ]
            })
            .collect();
        csv_document(&full_meta, &header, &rows)
    }

    fn to_json(&self, meta: &Meta) -> Result<Value> {
        let rows: Vec<Value> = self
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                obj.insert("cause".into(), json!(r.cause));
                obj.insert("lag_order".into(), json!(r.lag_order));
                obj.insert("variant".into(), json!(r.variant.label()));
                match &r.outcome {
                    Ok(s) => {
                        obj.insert("f_stat".into(), json_number(s.f_statistic));
                        obj.insert("p_value".into(), json_number(s.p_value));
                        obj.insert("log_inv_p".into(), json_number(s.log_inv_p));
                    }
                    Err(e) => {
                        obj.insert("f_stat".into(), Value::Null);
                        obj.insert("p_value".into(), Value::Null);
                        obj.insert("log_inv_p".into(), Value::Null);
                        obj.insert("error".into(), json!(e));
                    }
                }
                Value::Object(obj)
            })
            .collect();
        let effect = self.first().map(|r| r.effect.clone()).unwrap_or_default();
        Ok(json!({ "config": meta_json(meta), "effect": effect, "rows": rows }))
    }
}

impl Artifact for TwTable<f64> {
    fn to_csv(&self, meta: &Meta) -> Result<String> {
        let header = vec!["s".to_string(), "q".to_string(), "F1".to_string()];
        let rows: Vec<Vec<String>> = (0..self.len())
            .map(|i| {
                vec![
                    format_number(self.grid[i]),
                    format_number(self.q[i]),
                    format_number(self.f1[i]),
                ]
            })
            .collect();
        csv_document(meta, &header, &rows)
    }

    fn to_json(&self, meta: &Meta) -> Result<Value> {
        let rows: Vec<Value> = (0..self.len())
            .map(|i| {
                json!({
                    "s": json_number(self.grid[i]),
                    "q": json_number(self.q[i]),
                    "F1": json_number(self.f1[i]),
                })
            })
            .collect();
        Ok(json!({ "config": meta_json(meta), "rows": rows }))
    }
}

impl Artifact for Comparison<f64> {
    fn to_csv(&self, meta: &Meta) -> Result<String> {
        let mut full_meta = meta.to_vec();
        for (lag, rho) in self.lags.iter().zip(&self.spearman) {
            full_meta.push((format!("spearman_lag{lag}"), csv_opt(*rho)));
        }
        let mut header = vec!["cause".to_string()];
        header.extend(
            self.lags
                .iter()
                .map(|l| format!("mean_sigma_lambda_lag{l}")),
        );
        header.extend(self.lags.iter().map(|l| format!("log_inv_p_lag{l}")));
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![r.cause.clone()];
                row.extend(r.mean_sigma_lambda.iter().map(|v| csv_opt(*v)));
                row.extend(r.log_inv_p.iter().map(|v| csv_opt(*v)));
                row
            })
            .collect();
        csv_document(&full_meta, &header, &rows)
    }

    fn to_json(&self, meta: &Meta) -> Result<Value> {
        let spearman: Map<String, Value> = self
            .lags
            .iter()
            .zip(&self.spearman)
            .map(|(l, v)| (format!("lag{l}"), json_opt(*v)))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                obj.insert("cause".into(), json!(r.cause));
                for (l, v) in self.lags.iter().zip(&r.mean_sigma_lambda) {
                    obj.insert(format!("mean_sigma_lambda_lag{l}"), json_opt(*v));
                }
                for (l, v) in self.lags.iter().zip(&r.log_inv_p) {
                    obj.insert(format!("log_inv_p_lag{l}"), json_opt(*v));
                }
                Value::Object(obj)
            })
            .collect();
        Ok(json!({
            "config": meta_json(meta),
            "effect": self.effect,
            "variant": self.variant.label(),
            "spearman": spearman,
            "rows": rows,
        }))
    }
}

impl Artifact for TimeSeriesPanel<f64> {
    fn to_csv(&self, meta: &Meta) -> Result<String> {
        let mut header = vec!["timestamp".to_string()];
        header.extend(self.names().iter().cloned());
        let rows: Vec<Vec<String>> = (0..self.len())
            .map(|t| {
                let mut row = vec![self.timestamps()[t].format(ISO_DATE).to_string()];
                row.extend(self.columns().iter().map(|c| format_number(c[t])));
                row
            })
            .collect();
        csv_document(meta, &header, &rows)
    }

    fn to_json(&self, meta: &Meta) -> Result<Value> {
        let rows: Vec<Value> = (0..self.len())
            .map(|t| {
                let mut obj = Map::new();
                obj.insert(
                    "timestamp".into(),
                    json!(self.timestamps()[t].format(ISO_DATE).to_string()),
                );
                for (name, col) in self.names().iter().zip(self.columns()) {
                    obj.insert(name.clone(), json_number(col[t]));
                }
                Value::Object(obj)
            })
            .collect();
        Ok(json!({ "config": meta_json(meta), "columns": self.names(), "rows": rows }))
    }
}
