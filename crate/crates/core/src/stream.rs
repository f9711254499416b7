//! Experiment streams: the set of sequences one report is computed over.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::returns::binarise_median;
use crate::rng::{logistic_bits_from, pcg64_bits, LogisticMap, Pcg64};
use crate::sequence::BinarySequence;

/// Which way the data were split into sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StreamKind {
    /// One sequence per instrument over its full history.
    FirmSeparated,
    /// One sequence per calendar year, instruments joined firm-major.
    YearSeparated,
}

impl StreamKind {
    /// Short name used in paths and labels.
    pub fn short_name(self) -> &'static str {
        match self {
            StreamKind::FirmSeparated => "firm",
            StreamKind::YearSeparated => "year",
        }
    }
}

/// One binarised piece of a sequence and the median it was cut at.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegmentProvenance {
    /// Instrument the piece came from.
    pub instrument: String,
    /// Number of bits.
    pub len: usize,
    /// Binarisation threshold.
    pub median: f64,
    /// Ties at the median unbalanced the piece.
    pub degenerate: bool,
}

/// Generator settings behind a synthetic sequence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticProvenance {
    /// Generator name.
    pub generator: String,
    /// Master seed of the whole stream.
    pub master_seed: u64,
    /// PCG stream index used for this sequence.
    pub stream: u64,
    /// Logistic-map starting value, when that generator was used.
    pub logistic_seed: Option<f64>,
}

/// Where a sequence came from.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SequenceProvenance {
    /// Sequence label (instrument id, year, or synthetic index).
    pub label: String,
    /// Period covered, e.g. `2001-02..2019-12` or `2008`.
    pub period: String,
    /// Binarised pieces in order.
    pub segments: Vec<SegmentProvenance>,
    /// Set for generated sequences.
    pub synthetic: Option<SyntheticProvenance>,
}

/// The sequences of one experiment with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentStream {
    /// Split kind.
    pub kind: StreamKind,
    /// Sequences in canonical order.
    pub sequences: Vec<BinarySequence>,
    /// `provenance[i]` describes `sequences[i]`.
    pub provenance: Vec<SequenceProvenance>,
}

impl ExperimentStream {
    /// Number of sequences.
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    /// True when the stream holds no sequences.
    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }
}

/// Source of synthetic bits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Generator {
    /// PCG XSL-RR 128/64.
    Pcg64,
    /// Logistic map with the given number of discarded steps.
    Logistic {
        /// Steps discarded before the first output bit.
        burn_in: usize,
    },
}

/// Default logistic-map burn-in.
pub const DEFAULT_BURN_IN: usize = 100;

/// How generator output becomes bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SyntheticBinarisation {
    /// Real-valued draws (uniform floats, or logistic orbit values) cut at
    /// their own median, exactly as return series are.
    #[default]
    Median,
    /// The generator's native bits: PCG words MSB-first, or logistic
    /// `x > 0.5`.
    Raw,
}

/// Shape of a synthetic dataset: one entry per sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSpec {
    /// Which empirical stream the set is modelled on.
    pub kind: StreamKind,
    /// Length of each sequence.
    pub lengths: Vec<usize>,
    /// Bit extraction.
    pub binarisation: SyntheticBinarisation,
}

impl SyntheticSpec {
    /// `count` sequences of equal length, median-binarised.
    pub fn constant(kind: StreamKind, count: usize, len: usize) -> Self {
        Self {
            kind,
            lengths: vec![len; count],
            binarisation: SyntheticBinarisation::Median,
        }
    }

    /// Same lengths with another bit extraction.
    pub fn with_binarisation(mut self, binarisation: SyntheticBinarisation) -> Self {
        self.binarisation = binarisation;
        self
    }
}

fn median_cut(values: &[f64], label: &str) -> Result<(BinarySequence, SegmentProvenance)> {
    let b = binarise_median(values)?;
    let segment = SegmentProvenance {
        instrument: label.into(),
        len: b.bits.len(),
        median: b.median,
        degenerate: b.degenerate,
    };
    Ok((BinarySequence::new(b.bits, label)?, segment))
}

/// Shortest synthetic sequence accepted.
pub const MIN_SYNTHETIC_LEN: usize = 8;

/// Generates one sequence per entry of `spec`.
///
/// Sequence `j` draws from PCG stream `j` of `master_seed` (increment
/// `2j + 1`); with the logistic generator that stream supplies the starting
/// value and any re-seeds.
pub fn shape_synthetic(
    spec: &SyntheticSpec,
    generator: Generator,
    master_seed: u64,
) -> Result<ExperimentStream> {
    if spec.lengths.is_empty() {
        return Err(Error::Empty);
    }
    if spec.lengths.iter().any(|&l| l < MIN_SYNTHETIC_LEN) {
        return Err(Error::Domain("synthetic sequences need at least 8 bits"));
    }
    let mut sequences = Vec::with_capacity(spec.lengths.len());
    let mut provenance = Vec::with_capacity(spec.lengths.len());
    for (j, &len) in spec.lengths.iter().enumerate() {
        let label = format!("{}-{j}", spec.kind.short_name());
        let mut rng = Pcg64::new(master_seed as u128, j as u128);
        let mut segments = Vec::new();
        let (seq, name, logistic_seed) = match generator {
            Generator::Pcg64 => {
                let seq = match spec.binarisation {
                    SyntheticBinarisation::Raw => pcg64_bits(&mut rng, len, &label)?,
                    SyntheticBinarisation::Median => {
                        let values: Vec<f64> = (0..len).map(|_| rng.next_f64()).collect();
                        let (seq, segment) = median_cut(&values, &label)?;
                        segments.push(segment);
                        seq
                    }
                };
                (seq, "pcg64", None)
            }
            Generator::Logistic { burn_in } => {
                let (x0, mut map) = loop {
                    let x = rng.next_f64();
                    if let Ok(map) = LogisticMap::new(x, rng) {
                        break (x, map);
                    }
                };
                let seq = match spec.binarisation {
                    SyntheticBinarisation::Raw => {
                        logistic_bits_from(&mut map, len, burn_in, &label)?
                    }
                    SyntheticBinarisation::Median => {
                        for _ in 0..burn_in {
                            map.step();
                        }
                        let values: Vec<f64> = (0..len).map(|_| map.step()).collect();
                        let (seq, segment) = median_cut(&values, &label)?;
                        segments.push(segment);
                        seq
                    }
                };
                (seq, "logistic", Some(x0))
            }
        };
        sequences.push(seq);
        provenance.push(SequenceProvenance {
            label,
            period: String::new(),
            segments,
            synthetic: Some(SyntheticProvenance {
                generator: name.into(),
                master_seed,
                stream: j as u64,
                logistic_seed,
            }),
        });
    }
    Ok(ExperimentStream {
        kind: spec.kind,
        sequences,
        provenance,
    })
}

/// Column sums of a year sequence reshaped into rows of `months_per_row`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSums {
    /// One sum per column.
    pub sums: Vec<u64>,
    /// Rows that went into the sums.
    pub rows: usize,
    /// Indices of segments left out because their length is not a multiple
    /// of `months_per_row`.
    pub excluded_segments: Vec<usize>,
}

/// Reshapes the complete segments of a firm-major year sequence into rows
/// and sums each column.
pub fn monthly_column_sums(seq: &BinarySequence, months_per_row: usize) -> Result<ColumnSums> {
    if months_per_row == 0 {
        return Err(Error::Domain("months_per_row must be positive"));
    }
    let mut sums = vec![0u64; months_per_row];
    let mut rows = 0;
    let mut excluded_segments = Vec::new();
    for (i, seg) in seq.segments().enumerate() {
        if seg.len() % months_per_row != 0 {
            excluded_segments.push(i);
            continue;
        }
        for row in seg.chunks_exact(months_per_row) {
            for (s, &b) in sums.iter_mut().zip(row) {
                *s += b as u64;
            }
            rows += 1;
        }
    }
    if rows == 0 {
        return Err(Error::Domain("no complete segment to reshape"));
    }
    Ok(ColumnSums {
        sums,
        rows,
        excluded_segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_counts_and_lengths() {
        let spec = SyntheticSpec::constant(StreamKind::FirmSeparated, 25, 227);
        let s = shape_synthetic(&spec, Generator::Pcg64, 11).unwrap();
        assert_eq!(s.len(), 25);
        assert!(s.sequences.iter().all(|q| q.len() == 227));
        assert_eq!(s.provenance[3].synthetic.as_ref().unwrap().stream, 3);

        let years = SyntheticSpec {
            kind: StreamKind::YearSeparated,
            lengths: (0..19).map(|i| 100 + i).collect(),
            binarisation: SyntheticBinarisation::Raw,
        };
        let y = shape_synthetic(&years, Generator::Logistic { burn_in: 10 }, 11).unwrap();
        assert_eq!(y.len(), 19);
        assert_eq!(y.sequences[18].len(), 118);
    }

    #[test]
    fn synthetic_is_reproducible() {
        for mode in [SyntheticBinarisation::Median, SyntheticBinarisation::Raw] {
            let spec =
                SyntheticSpec::constant(StreamKind::FirmSeparated, 10, 64).with_binarisation(mode);
            for g in [Generator::Pcg64, Generator::Logistic { burn_in: 100 }] {
                let a = shape_synthetic(&spec, g, 99).unwrap();
                let b = shape_synthetic(&spec, g, 99).unwrap();
                assert_eq!(a, b);
                assert_ne!(a, shape_synthetic(&spec, g, 100).unwrap());
            }
        }
    }

    #[test]
    fn median_mode_balances_and_raw_mode_matches_adapter() {
        let spec = SyntheticSpec::constant(StreamKind::FirmSeparated, 5, 227);
        let s = shape_synthetic(&spec, Generator::Pcg64, 3).unwrap();
        for q in &s.sequences {
            assert_eq!(q.ones(), 113);
        }
        assert_eq!(s.provenance[0].segments.len(), 1);

        let raw = spec.with_binarisation(SyntheticBinarisation::Raw);
        let r = shape_synthetic(&raw, Generator::Pcg64, 3).unwrap();
        let direct = pcg64_bits(&mut Pcg64::new(3, 2), 227, "x").unwrap();
        assert_eq!(r.sequences[2].bits(), direct.bits());
    }

    #[test]
    fn synthetic_rejects_short_lengths() {
        let spec = SyntheticSpec::constant(StreamKind::FirmSeparated, 2, 7);
        assert!(shape_synthetic(&spec, Generator::Pcg64, 0).is_err());
    }

    #[test]
    fn column_sums_alternating_firms() {
        let mut bits = Vec::new();
        bits.extend((0..12).map(|i| (i % 2 == 0) as u8));
        bits.extend((0..12).map(|i| (i % 2 == 1) as u8));
        let s = BinarySequence::with_segments(bits, "2001", vec![12]).unwrap();
        let c = monthly_column_sums(&s, 12).unwrap();
        assert_eq!(c.sums, vec![1; 12]);
        assert_eq!(c.rows, 2);
    }

    #[test]
    fn column_sums_skip_incomplete_segments() {
        let mut bits = vec![1u8; 11];
        bits.extend([1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0]);
        let s = BinarySequence::with_segments(bits, "2001", vec![11]).unwrap();
        let c = monthly_column_sums(&s, 12).unwrap();
        assert_eq!(c.excluded_segments, vec![0]);
        assert_eq!(c.sums.iter().sum::<u64>(), 6);

        let short = BinarySequence::new(vec![1; 5], "x").unwrap();
        assert!(monthly_column_sums(&short, 12).is_err());
    }
}
