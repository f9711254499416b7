//! Overlapping-permutations randomness testing for binary sequences.
//!
//! The crate is `no_std` and only needs `alloc`. It carries the numerical
//! parts of the toolkit: overlapping pattern counts and the ψ² family of
//! statistics, χ² tail probabilities at arbitrary degrees of freedom, median
//! binarisation of return series, a bit-exact PCG XSL-RR 128/64 generator,
//! stream aggregation with contributor trimming, recurrence matrices and
//! kernel density curves. File formats, date handling and the CLI live in
//! the `permtest` crate.
#![no_std]
#![deny(missing_docs)]
// NaN must fail positivity checks, so negated comparisons are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chi2;
mod error;
pub mod kde;
pub mod recurrence;
pub mod report;
pub mod returns;
pub mod rng;
mod sequence;
pub mod serial;
pub mod stream;

pub use chi2::{assess, chi2_critical, chi2_sf, ChiSquareAssessment};
pub use error::{Error, Result};
pub use report::{summarize_stream, trim_top_contributors, StreamReport, SummaryOptions, TrimMode};
pub use returns::{adjust_price, binarise_median, log_returns, Binarised};
pub use rng::{logistic_bits, pcg64_bits, LogisticMap, Pcg64};
pub use sequence::BinarySequence;
pub use serial::{
    count_overlapping_patterns, psi_profile, psi_square, BoundaryMode, PatternCounts, PsiProfile,
    MAX_NU,
};
pub use stream::{ExperimentStream, StreamKind};
