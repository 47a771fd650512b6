// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! File writers. Floats are rounded to 12 significant digits so that
//! identical runs produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::diagnostics::{write_diagnostics_csv, DiagnosticsRow};
use crate::error::Result;
use crate::numfmt::{fmt_number, round_sig};

use super::config::OutputFormat;

/// Rounds every number in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&round_json(serde_json::to_value(value)?))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

#[derive(Serialize)]
struct DiagnosticsDocument<'a> {
    schema: &'static str,
    rows: &'a [DiagnosticsRow],
}

/// Writes `diagnostics.csv` or `diagnostics.json` in `dir`.
pub fn write_diagnostics(dir: &Path, rows: &[DiagnosticsRow], format: OutputFormat) -> Result<PathBuf> {
    match format {
        OutputFormat::Csv => {
            let path = dir.join("diagnostics.csv");
            ensure_parent(&path)?;
            write_diagnostics_csv(fs::File::create(&path)?, rows)?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join("diagnostics.json");
            write_json(
                &path,
                &DiagnosticsDocument {
                    schema: "diagnostics-v1",
                    rows,
                },
            )?;
            Ok(path)
        }
    }
}

/// Writes a numeric table with the given header as CSV or JSON records.
pub fn write_table(dir: &Path, stem: &str, header: &[&str], rows: &[Vec<f64>], format: OutputFormat) -> Result<PathBuf> {
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            ensure_parent(&path)?;
            let mut w = csv::Writer::from_writer(fs::File::create(&path)?);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r.iter().map(|x| fmt_number(*x)))?;
            }
            w.flush()?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            let records: Vec<serde_json::Map<String, Value>> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, x)| (h.to_string(), serde_json::json!(x)))
                        .collect()
                })
                .collect();
            write_json(&path, &serde_json::json!({ "schema": format!("{stem}-v1"), "rows": records }))?;
            Ok(path)
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_applied_recursively() {
        let v = serde_json::json!({"a": [0.1234567890123456, 1], "b": {"c": -1.2345678901234567}});
        let r = round_json(v);
        assert_eq!(r["a"][0].as_f64().unwrap(), 0.123456789012);
        assert_eq!(r["a"][1].as_u64().unwrap(), 1);
        assert_eq!(r["b"]["c"].as_f64().unwrap(), -1.23456789012);
    }

    #[test]
    fn table_formats() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec![1e-6, 0.5], vec![2e-6, 0.25]];
        let p = write_table(dir.path(), "coherence", &["delay_s", "sensor_p1"], &rows, OutputFormat::Csv).unwrap();
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(text, "delay_s,sensor_p1\n1e-6,0.5\n2e-6,0.25\n");
        let p = write_table(dir.path(), "coherence", &["delay_s", "sensor_p1"], &rows, OutputFormat::Json).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(v["rows"][1]["sensor_p1"].as_f64().unwrap(), 0.25);
    }
}
