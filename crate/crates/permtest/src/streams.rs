//! Return series and the firm- and year-separated experiment streams built
//! from a cleaned panel.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use permtest_core::stream::{SegmentProvenance, SequenceProvenance};
use permtest_core::{binarise_median, log_returns, BinarySequence, ExperimentStream, StreamKind};

use crate::error::{CoreContext, Result};
use crate::panel::{AuditEntry, DropReason, Frequency, Instrument, Panel};

/// Log returns of one instrument, each dated by the later of its two prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub instrument_id: String,
    pub frequency: Frequency,
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

impl ReturnSeries {
    /// Returns falling in calendar year `year`.
    pub fn year_slice(&self, year: i32) -> &[f64] {
        let start = self.dates.partition_point(|d| d.year() < year);
        let end = self.dates.partition_point(|d| d.year() <= year);
        &self.returns[start..end]
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        let mut last = None;
        self.dates.iter().filter_map(move |d| {
            let y = d.year();
            (last != Some(y)).then(|| {
                last = Some(y);
                y
            })
        })
    }
}

/// Adjusted prices of an instrument in date order.
pub fn adjusted_prices(instrument: &Instrument) -> Result<Vec<f64>> {
    instrument
        .records
        .iter()
        .map(|r| r.adjusted_price().context("adjusting price"))
        .collect()
}

pub fn return_series(instrument: &Instrument, frequency: Frequency) -> Result<ReturnSeries> {
    let prices = adjusted_prices(instrument)?;
    let returns = log_returns(&prices).context("computing log returns")?;
    Ok(ReturnSeries {
        instrument_id: instrument.id.clone(),
        frequency,
        dates: instrument.records[1..].iter().map(|r| r.date).collect(),
        returns,
    })
}

pub fn return_panel(panel: &Panel) -> Result<Vec<ReturnSeries>> {
    panel
        .instruments
        .iter()
        .map(|i| return_series(i, panel.frequency))
        .collect()
}

/// A stream plus the segments and years left out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltStream {
    pub stream: ExperimentStream,
    pub audit: Vec<AuditEntry>,
}

fn period_span(series: &ReturnSeries) -> String {
    let fmt = match series.frequency {
        Frequency::Monthly => "%Y-%m",
        Frequency::Daily => "%Y-%m-%d",
    };
    format!(
        "{}..{}",
        series.dates[0].format(fmt),
        series.dates[series.dates.len() - 1].format(fmt)
    )
}

/// Firm stream: each instrument's full history cut at its own median.
/// Year stream: each instrument-year cut at its own median, joined
/// firm-major in ascending id with segment bounds at the joins.
pub fn build_stream(series: &[ReturnSeries], kind: StreamKind) -> Result<BuiltStream> {
    match kind {
        StreamKind::FirmSeparated => firm_stream(series),
        StreamKind::YearSeparated => year_stream(series),
    }
}

fn firm_stream(series: &[ReturnSeries]) -> Result<BuiltStream> {
    let mut sorted: Vec<&ReturnSeries> = series.iter().collect();
    sorted.sort_by(|a, b| a.instrument_id.cmp(&b.instrument_id));
    let mut sequences = Vec::with_capacity(sorted.len());
    let mut provenance = Vec::with_capacity(sorted.len());
    let mut audit = Vec::new();
    for s in sorted {
        if s.returns.len() < 2 {
            audit.push(AuditEntry {
                id: s.instrument_id.clone(),
                reason: DropReason::ShortSegment,
                detail: format!("{} return(s)", s.returns.len()),
            });
            continue;
        }
        let b = binarise_median(&s.returns).context("binarising firm series")?;
        provenance.push(SequenceProvenance {
            label: s.instrument_id.clone(),
            period: period_span(s),
            segments: vec![SegmentProvenance {
                instrument: s.instrument_id.clone(),
                len: b.bits.len(),
                median: b.median,
                degenerate: b.degenerate,
            }],
            synthetic: None,
        });
        sequences.push(BinarySequence::new(b.bits, &s.instrument_id).context("building firm sequence")?);
    }
    Ok(BuiltStream {
        stream: ExperimentStream {
            kind: StreamKind::FirmSeparated,
            sequences,
            provenance,
        },
        audit,
    })
}

fn year_stream(series: &[ReturnSeries]) -> Result<BuiltStream> {
    let mut sorted: Vec<&ReturnSeries> = series.iter().collect();
    sorted.sort_by(|a, b| a.instrument_id.cmp(&b.instrument_id));

    struct YearAcc {
        bits: Vec<u8>,
        bounds: Vec<usize>,
        segments: Vec<SegmentProvenance>,
        skipped: usize,
    }
    let mut years: BTreeMap<i32, YearAcc> = BTreeMap::new();
    let mut audit = Vec::new();
    for s in sorted {
        for year in s.years() {
            let acc = years.entry(year).or_insert_with(|| YearAcc {
                bits: Vec::new(),
                bounds: Vec::new(),
                segments: Vec::new(),
                skipped: 0,
            });
            let slice = s.year_slice(year);
            if slice.len() < 2 {
                acc.skipped += 1;
                audit.push(AuditEntry {
                    id: format!("{}:{year}", s.instrument_id),
                    reason: DropReason::ShortSegment,
                    detail: format!("{} return(s) in {year}", slice.len()),
                });
                continue;
            }
            let b = binarise_median(slice).context("binarising year segment")?;
            if !acc.bits.is_empty() {
                acc.bounds.push(acc.bits.len());
            }
            acc.bits.extend_from_slice(&b.bits);
            acc.segments.push(SegmentProvenance {
                instrument: s.instrument_id.clone(),
                len: b.bits.len(),
                median: b.median,
                degenerate: b.degenerate,
            });
        }
    }

    let mut sequences = Vec::with_capacity(years.len());
    let mut provenance = Vec::with_capacity(years.len());
    for (year, acc) in years {
        let label = year.to_string();
        if acc.bits.is_empty() {
            audit.push(AuditEntry {
                id: label,
                reason: DropReason::EmptyYear,
                detail: format!("all {} segment(s) too short", acc.skipped),
            });
            continue;
        }
        sequences.push(
            BinarySequence::with_segments(acc.bits, &label, acc.bounds)
                .context("building year sequence")?,
        );
        provenance.push(SequenceProvenance {
            label: label.clone(),
            period: label,
            segments: acc.segments,
            synthetic: None,
        });
    }
    Ok(BuiltStream {
        stream: ExperimentStream {
            kind: StreamKind::YearSeparated,
            sequences,
            provenance,
        },
        audit,
    })
}
