//! JSON and CSV serialization of quadrature results and tables.
//!
//! Floating-point values are written with 17 significant digits so every
//! binary64 value survives a text round trip. Non-finite values and absent
//! ratios become `null` in JSON and an empty field in CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serializer;
use serde_json::value::RawValue;

use crate::quadrature::{ConvergenceRow, QuadratureResult};

pub const CONVERGENCE_CSV_HEADER: &str = "level,A_n,partial,error_ratio";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

/// Formats `v` with 17 significant digits, e.g. `5.0000000000000000e-1`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV field for a float: 17 significant digits, empty when non-finite.
pub fn csv_field(v: f64) -> String {
    if v.is_finite() {
        fmt17(v)
    } else {
        String::new()
    }
}

pub(crate) fn sig17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        let raw = RawValue::from_string(fmt17(*v)).map_err(serde::ser::Error::custom)?;
        s.serialize_some(&raw)
    } else {
        s.serialize_none()
    }
}

pub(crate) fn sig17_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => sig17(v, s),
        None => s.serialize_none(),
    }
}

/// Convergence table as CSV with header `level,A_n,partial,error_ratio`.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CONVERGENCE_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let ratio = row.error_ratio.map(csv_field).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.n,
            csv_field(row.a_n),
            csv_field(row.partial),
            ratio
        );
    }
    out
}

/// Renders a result document. JSON carries the summary and the per-level
/// trace; CSV carries the per-level trace only.
pub fn emit_report(result: &QuadratureResult, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(result).expect("result serializes");
            s.push('\n');
            s
        }
        Format::Csv => convergence_csv(&result.per_level),
    }
}

/// Parses a JSON report produced by [`emit_report`].
pub fn parse_report(text: &str) -> Result<QuadratureResult, serde_json::Error> {
    serde_json::from_str(text)
}
