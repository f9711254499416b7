//! Price CSV reading and writing.
//!
//! Input is UTF-8 with a header naming at least `id,date,close,adjfactor,retfactor`
//! (any order, extra columns ignored). Dates are ISO `YYYY-MM-DD`.

use std::io::{Read, Write};

use chrono::NaiveDate;
use crate::error::{Error, Result};

/// One instrument-date observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceRecord {
    pub instrument_id: String,
    pub date: NaiveDate,
    /// Unadjusted close.
    pub close: f64,
    /// Cumulative adjustment factor.
    pub adj_factor: f64,
    /// Total return factor.
    pub ret_factor: f64,
}

impl PriceRecord {
    pub fn adjusted_price(&self) -> permtest_core::Result<f64> {
        permtest_core::adjust_price(self.close, self.adj_factor, self.ret_factor)
    }
}

/// A row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedPrices {
    pub records: Vec<PriceRecord>,
    pub rejects: Vec<Reject>,
}

const COLUMNS: [&str; 5] = ["id", "date", "close", "adjfactor", "retfactor"];

fn parse_positive(field: &str, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| format!("{name} {field:?} is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} {field:?} is not positive"))
    }
}

/// Reads every row; unparsable rows land in `rejects` with their line.
pub fn parse_prices<R: Read>(input: R) -> Result<ParsedPrices> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::format(Some(1), e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(Error::format(None, "empty file"));
    }
    let names: Vec<String> = headers
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').trim().to_ascii_lowercase())
        .collect();
    let mut idx = [0usize; 5];
    for (slot, col) in idx.iter_mut().zip(COLUMNS) {
        *slot = names
            .iter()
            .position(|n| n == col)
            .ok_or_else(|| Error::format(Some(1), format!("header lacks column `{col}`")))?;
    }

    let mut out = ParsedPrices::default();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line());
            Error::format(line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let get = |i: usize| row.get(idx[i]).unwrap_or("");
        let parsed = (|| {
            let id = get(0).trim();
            if id.is_empty() {
                return Err("empty id".to_string());
            }
            let date = NaiveDate::parse_from_str(get(1).trim(), "%Y-%m-%d")
                .map_err(|_| format!("date {:?} is not YYYY-MM-DD", get(1)))?;
            Ok(PriceRecord {
                instrument_id: id.to_string(),
                date,
                close: parse_positive(get(2), "close")?,
                adj_factor: parse_positive(get(3), "adjfactor")?,
                ret_factor: parse_positive(get(4), "retfactor")?,
            })
        })();
        match parsed {
            Ok(r) => out.records.push(r),
            Err(reason) => out.rejects.push(Reject { line, reason }),
        }
    }
    if out.records.is_empty() && out.rejects.is_empty() {
        return Err(Error::format(None, "no data rows"));
    }
    Ok(out)
}

/// Writes records in the input schema.
pub fn write_prices<W: Write>(out: W, records: &[PriceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::format(None, e.to_string());
    w.write_record(COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.instrument_id.clone(),
            r.date.format("%Y-%m-%d").to_string(),
            r.close.to_string(),
            r.adj_factor.to_string(),
            r.ret_factor.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}

/// Writes `line,reason` rows.
pub fn write_rejects<W: Write>(out: W, rejects: &[Reject]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::format(None, e.to_string());
    w.write_record(["line", "reason"]).map_err(csv_err)?;
    for r in rejects {
        w.write_record([r.line.to_string(), r.reason.clone()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}
