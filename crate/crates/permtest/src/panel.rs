//! Cleaning of a price panel: instruments with missing periods or less than a
//! year of observations are dropped, never imputed.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prices::PriceRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    #[default]
    Monthly,
    Daily,
}

impl Frequency {
    /// Observations making up a year.
    pub fn min_observations(self) -> usize {
        match self {
            Frequency::Monthly => 12,
            Frequency::Daily => 252,
        }
    }
}

/// Span over which missing periods count as gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GapScope {
    /// From each instrument's first to its last observation.
    #[default]
    InstrumentLife,
    /// The whole span covered by the file.
    Dataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Two records fall in the same period.
    Duplicate,
    /// A period between first and last observation has no record.
    Gap,
    /// Fewer observations than a year's worth.
    Short,
    /// A year segment too short to binarise.
    ShortSegment,
    /// A year with no usable segment.
    EmptyYear,
    /// No spread to estimate a density from.
    ZeroSpread,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Duplicate => "duplicate",
            DropReason::Gap => "gap",
            DropReason::Short => "short",
            DropReason::ShortSegment => "short_segment",
            DropReason::EmptyYear => "empty_year",
            DropReason::ZeroSpread => "zero_spread",
        }
    }
}

/// One dropped instrument or segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub id: String,
    pub reason: DropReason,
    pub detail: String,
}

/// Surviving instruments, each sorted by date, in ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub frequency: Frequency,
    pub instruments: Vec<Instrument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub id: String,
    pub records: Vec<PriceRecord>,
}

impl Panel {
    pub fn records(&self) -> impl Iterator<Item = &PriceRecord> {
        self.instruments.iter().flat_map(|i| i.records.iter())
    }

    pub fn len(&self) -> usize {
        self.instruments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instruments.is_empty()
    }
}

/// Maps dates onto consecutive integers at the panel frequency.
pub(crate) enum PeriodIndex {
    Monthly,
    /// Trading days: the sorted union of all dates in the input.
    Daily(BTreeMap<NaiveDate, usize>),
}

impl PeriodIndex {
    pub(crate) fn new<'a>(frequency: Frequency, dates: impl Iterator<Item = &'a NaiveDate>) -> Self {
        match frequency {
            Frequency::Monthly => PeriodIndex::Monthly,
            Frequency::Daily => {
                let days: BTreeSet<NaiveDate> = dates.copied().collect();
                PeriodIndex::Daily(days.into_iter().enumerate().map(|(i, d)| (d, i)).collect())
            }
        }
    }

    pub(crate) fn index(&self, date: NaiveDate) -> i64 {
        match self {
            PeriodIndex::Monthly => date.year() as i64 * 12 + date.month0() as i64,
            PeriodIndex::Daily(map) => map[&date] as i64,
        }
    }
}

fn period_label(frequency: Frequency, date: NaiveDate) -> String {
    match frequency {
        Frequency::Monthly => date.format("%Y-%m").to_string(),
        Frequency::Daily => date.format("%Y-%m-%d").to_string(),
    }
}

/// Groups records by instrument and drops any instrument with a duplicate
/// period, a gap, or fewer than a year of observations.
pub fn clean_panel(
    records: &[PriceRecord],
    frequency: Frequency,
    scope: GapScope,
) -> (Panel, Vec<AuditEntry>) {
    let periods = PeriodIndex::new(frequency, records.iter().map(|r| &r.date));
    let mut grouped: BTreeMap<&str, Vec<&PriceRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.instrument_id.as_str()).or_default().push(r);
    }
    let global_span = records
        .iter()
        .map(|r| periods.index(r.date))
        .fold(None, |acc: Option<(i64, i64)>, p| match acc {
            None => Some((p, p)),
            Some((lo, hi)) => Some((lo.min(p), hi.max(p))),
        });

    let mut instruments = Vec::new();
    let mut audit = Vec::new();
    for (id, mut recs) in grouped {
        recs.sort_by_key(|r| r.date);
        let idx: Vec<i64> = recs.iter().map(|r| periods.index(r.date)).collect();

        if let Some(w) = idx.windows(2).position(|w| w[0] == w[1]) {
            audit.push(AuditEntry {
                id: id.to_string(),
                reason: DropReason::Duplicate,
                detail: format!("two records in {}", period_label(frequency, recs[w].date)),
            });
            continue;
        }
        let (lo, hi) = match scope {
            GapScope::InstrumentLife => (idx[0], idx[idx.len() - 1]),
            GapScope::Dataset => global_span.expect("non-empty"),
        };
        let expected = (hi - lo + 1) as usize;
        if idx.len() != expected {
            let detail = match idx.windows(2).find(|w| w[1] - w[0] > 1) {
                Some(w) => {
                    let at = recs[idx.iter().position(|&p| p == w[0]).unwrap()].date;
                    format!("{} missing period(s) after {}", w[1] - w[0] - 1, period_label(frequency, at))
                }
                None => format!("{} of {expected} periods present", idx.len()),
            };
            audit.push(AuditEntry {
                id: id.to_string(),
                reason: DropReason::Gap,
                detail,
            });
            continue;
        }
        if recs.len() < frequency.min_observations() {
            audit.push(AuditEntry {
                id: id.to_string(),
                reason: DropReason::Short,
                detail: format!("{} observations", recs.len()),
            });
            continue;
        }
        instruments.push(Instrument {
            id: id.to_string(),
            records: recs.into_iter().cloned().collect(),
        });
    }
    (
        Panel {
            frequency,
            instruments,
        },
        audit,
    )
}

/// Writes `id,reason,detail` rows.
pub fn write_audit<W: Write>(out: W, audit: &[AuditEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::format(None, e.to_string());
    w.write_record(["id", "reason", "detail"]).map_err(csv_err)?;
    for a in audit {
        w.write_record([a.id.as_str(), a.reason.as_str(), a.detail.as_str()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}
