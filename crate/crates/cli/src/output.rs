//! Rounded, deterministic output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use costspace::format::{round_sig, sig};
use serde::Serialize;
use serde_json::Value;

pub const JSON_DIGITS: usize = 12;
pub const CSV_DIGITS: usize = 9;

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN), JSON_DIGITS);
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Opens `path`, or standard output when absent.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let v = round_value(serde_json::to_value(value)?);
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, &v)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// CSV with a header row and float cells at fixed precision.
pub fn write_csv(path: Option<&Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| sig(x, CSV_DIGITS)))?;
    }
    w.flush()?;
    Ok(())
}
