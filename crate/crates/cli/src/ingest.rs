//! CSV ingestion: one observation per row, an optional header row.

use std::path::Path;

use malpha::SampleBatch;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// A parsed input file together with the SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub batch: SampleBatch,
    pub sha256: String,
    pub header: Option<Vec<String>>,
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Ingested, CliError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| CliError::Unreadable {
        path: display.clone(),
        reason: e.to_string(),
    })?;
    ingest_bytes(&bytes, &display)
}

/// Same as [`ingest_csv`] on an in-memory buffer; `name` is used in messages.
pub fn ingest_bytes(bytes: &[u8], name: &str) -> Result<Ingested, CliError> {
    let sha256 = hex::encode(Sha256::digest(bytes));
    let text = std::str::from_utf8(bytes).map_err(|e| CliError::Unreadable {
        path: name.to_string(),
        reason: format!("not UTF-8: {e}"),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Unreadable {
            path: name.to_string(),
            reason: e.to_string(),
        })?;
        let row = idx + 1;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 && record.iter().all(|c| parse_cell(c).is_none()) {
            header = Some(record.iter().map(str::to_string).collect());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::Ragged {
                row,
                expected,
                got: record.len(),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(j, c)| {
                parse_cell(c).ok_or_else(|| CliError::NonNumeric {
                    row,
                    column: j + 1,
                    cell: c.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CliError::Empty(name.to_string()));
    }
    let batch = SampleBatch::from_rows(&rows)?;
    Ok(Ingested {
        batch,
        sha256,
        header,
    })
}
