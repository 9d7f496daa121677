//! CSV input with a `score,label` header.

use std::io::Read;

use crate::error::{Error, Result};
use crate::model::ScoredDataset;

/// Parsed CSV rows kept verbatim next to the dataset they encode.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub headers: csv::StringRecord,
    pub records: Vec<csv::StringRecord>,
    pub dataset: ScoredDataset,
}

fn line_of(r: &csv::StringRecord) -> u64 {
    r.position().map_or(0, |p| p.line())
}

/// Reads a CSV with `score` and `label` columns (other columns are kept).
pub fn read_table<R: Read>(input: R) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv { line: 1, message: e.to_string() })?
        .clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| Error::Csv {
            line: 1,
            message: format!("missing column {name:?} (header must contain score,label)"),
        })
    };
    let (si, li) = (col("score")?, col("label")?);
    let mut records = Vec::new();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = line_of(&rec);
        let s = &rec[si];
        let score: f64 = s.parse().map_err(|_| Error::Csv { line, message: format!("score {s:?} is not a number") })?;
        if !score.is_finite() {
            return Err(Error::Csv { line, message: format!("score {s:?} is not finite") });
        }
        let label = match &rec[li] {
            "0" => 0u8,
            "1" => 1u8,
            other => return Err(Error::Csv { line, message: format!("label must be 0 or 1, got {other:?}") }),
        };
        scores.push(score);
        labels.push(label);
        records.push(rec);
    }
    let dataset = ScoredDataset::new(scores, labels)?;
    Ok(CsvTable { headers, records, dataset })
}

pub fn read_dataset<R: Read>(input: R) -> Result<ScoredDataset> {
    read_table(input).map(|t| t.dataset)
}
