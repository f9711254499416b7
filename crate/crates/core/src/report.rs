//! Aggregation of per-sequence profiles into stream-level statistics.
//!
//! The combined χ² of a stream sums ∇²ψ²_ν over all sequences and is judged
//! at `|A| · ξ_ν` degrees of freedom. The trim ladder re-judges that sum
//! after dropping the largest contributors, shrinking the degrees of freedom
//! to match.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::chi2::{assess, chi2_critical, ChiSquareAssessment};
use crate::error::{Error, Result};
use crate::serial::{second_difference_dof, PsiProfile};
use crate::stream::StreamKind;

/// How contributors are chosen for trimming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TrimMode {
    /// Each ν column drops its own largest values.
    #[default]
    PerNu,
    /// The same sequences are dropped from every column, ranked by
    /// `Σ_ν ∇²ψ²_ν / ξ_ν`.
    WholeSequence,
}

/// Knobs for [`summarize_stream`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryOptions {
    /// Significance level.
    pub alpha: f64,
    /// Fractions of top contributors to drop, each in `[0, 1)`.
    pub trim_fractions: Vec<f64>,
    /// Trimming unit.
    pub trim_mode: TrimMode,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            trim_fractions: vec![0.01, 0.02, 0.03, 0.04, 0.05],
            trim_mode: TrimMode::PerNu,
        }
    }
}

/// Mean, population standard deviation and maximum of one column.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColumnSummary {
    /// Window size.
    pub nu: usize,
    /// Arithmetic mean.
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    /// Largest value.
    pub max: f64,
    /// Index of the first sequence attaining the maximum.
    pub argmax: usize,
}

/// Second-difference summary for one ν.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct D2Summary {
    /// Mean, SD and maximum of ∇²ψ²_ν.
    pub column: ColumnSummary,
    /// ξ_ν.
    pub xi: u64,
    /// The mean judged at ξ_ν degrees of freedom.
    pub mean_assessment: ChiSquareAssessment,
    /// Combined χ² over all sequences at `|A| · ξ_ν` degrees of freedom.
    pub combined: ChiSquareAssessment,
    /// Critical value for a single sequence at ξ_ν.
    pub sequence_critical: f64,
    /// Share of sequences whose ∇²ψ²_ν exceeds `sequence_critical`.
    pub significant_fraction: f64,
}

/// Outcome of dropping the largest contributors from one column.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrimResult {
    /// Requested fraction.
    pub fraction: f64,
    /// Indices of the dropped sequences, largest first.
    pub removed: Vec<usize>,
    /// Sum and degrees of freedom over the survivors.
    pub assessment: ChiSquareAssessment,
}

/// One row of the trim ladder: every ν at one fraction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrimRung {
    /// Fraction of sequences dropped.
    pub fraction: f64,
    /// One entry per ν, starting at ν = 3.
    pub entries: Vec<TrimResult>,
}

/// Stream-level statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreamReport {
    /// Split kind.
    pub kind: StreamKind,
    /// Sequence labels in stream order.
    pub labels: Vec<String>,
    /// Largest ν.
    pub max_nu: usize,
    /// Significance level.
    pub alpha: f64,
    /// Trimming unit used for the ladder.
    pub trim_mode: TrimMode,
    /// ψ²_ν summaries for ν = 1..=max_nu.
    pub psi_summary: Vec<ColumnSummary>,
    /// ∇²ψ²_ν summaries for ν = 3..=max_nu.
    pub d2_summary: Vec<D2Summary>,
    /// `per_sequence_psi[i][ν − 1]`.
    pub per_sequence_psi: Vec<Vec<f64>>,
    /// `per_sequence_d2[i][ν − 3]`.
    pub per_sequence_d2: Vec<Vec<f64>>,
    /// Trim ladder, one rung per fraction.
    pub trim_ladder: Vec<TrimRung>,
}

impl StreamReport {
    /// Number of sequences.
    pub fn n_sequences(&self) -> usize {
        self.labels.len()
    }

    /// Combined χ² per ν, starting at ν = 3.
    pub fn combined(&self) -> impl Iterator<Item = &ChiSquareAssessment> {
        self.d2_summary.iter().map(|d| &d.combined)
    }
}

fn summarize_column(nu: usize, values: &[f64]) -> ColumnSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let (argmax, max) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    ColumnSummary {
        nu,
        mean,
        sd: libm::sqrt(var),
        max,
        argmax,
    }
}

/// Number of sequences a trim fraction removes: `⌊p · n⌋`.
pub fn trim_count(fraction: f64, n: usize) -> usize {
    // guards against 0.29 * 100 = 28.999999999999996
    libm::floor(fraction * n as f64 + 1e-9) as usize
}

/// Indices ordered by descending value, ties by ascending index.
fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

fn assess_survivors(
    values: &[f64],
    removed: Vec<usize>,
    fraction: f64,
    xi: u64,
    alpha: f64,
) -> Result<TrimResult> {
    let mut drop = vec![false; values.len()];
    for &i in &removed {
        drop[i] = true;
    }
    let survivors = values.len() - removed.len();
    if survivors == 0 {
        return Err(Error::Domain("trimming removed every sequence"));
    }
    let sum: f64 = values
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(v, _)| v)
        .sum();
    Ok(TrimResult {
        fraction,
        removed,
        assessment: assess(sum, survivors as u64 * xi, alpha)?,
    })
}

fn check_fraction(fraction: f64) -> Result<()> {
    if (0.0..1.0).contains(&fraction) {
        Ok(())
    } else {
        Err(Error::Domain("trim fraction must lie in [0, 1)"))
    }
}

/// Drops the `⌊p·|A|⌋` largest values (ties to the lower index) and judges
/// the sum of the rest at `(|A| − ⌊p·|A|⌋) · ξ` degrees of freedom.
pub fn trim_top_contributors(
    values: &[f64],
    fraction: f64,
    xi: u64,
    alpha: f64,
) -> Result<TrimResult> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    check_fraction(fraction)?;
    let k = trim_count(fraction, values.len());
    let removed = rank_descending(values).into_iter().take(k).collect();
    assess_survivors(values, removed, fraction, xi, alpha)
}

/// Aggregates the profiles of one stream.
pub fn summarize_stream(
    kind: StreamKind,
    labels: &[String],
    profiles: &[PsiProfile],
    options: &SummaryOptions,
) -> Result<StreamReport> {
    let first = profiles.first().ok_or(Error::Empty)?;
    let max_nu = first.max_nu();
    if profiles.iter().any(|p| p.max_nu() != max_nu) {
        return Err(Error::Domain("profiles disagree on max_nu"));
    }
    if labels.len() != profiles.len() {
        return Err(Error::Domain("one label per profile required"));
    }
    for &f in &options.trim_fractions {
        check_fraction(f)?;
    }
    let alpha = options.alpha;
    let n = profiles.len();

    let per_sequence_psi: Vec<Vec<f64>> = profiles.iter().map(|p| p.psi.clone()).collect();
    let per_sequence_d2: Vec<Vec<f64>> = profiles.iter().map(|p| p.d2.clone()).collect();
    let column = |rows: &[Vec<f64>], j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };

    let psi_summary = (1..=max_nu)
        .map(|nu| summarize_column(nu, &column(&per_sequence_psi, nu - 1)))
        .collect();

    let d2_columns: Vec<Vec<f64>> = (3..=max_nu)
        .map(|nu| column(&per_sequence_d2, nu - 3))
        .collect();

    let mut d2_summary = Vec::with_capacity(d2_columns.len());
    for (j, values) in d2_columns.iter().enumerate() {
        let nu = j + 3;
        let xi = second_difference_dof(nu);
        let summary = summarize_column(nu, values);
        let sequence_critical = chi2_critical(alpha, xi)?;
        let hits = values.iter().filter(|&&v| v > sequence_critical).count();
        let total: f64 = values.iter().sum();
        d2_summary.push(D2Summary {
            mean_assessment: assess(summary.mean, xi, alpha)?,
            column: summary,
            xi,
            combined: assess(total, n as u64 * xi, alpha)?,
            sequence_critical,
            significant_fraction: hits as f64 / n as f64,
        });
    }

    let whole_ranking = match options.trim_mode {
        TrimMode::PerNu => None,
        TrimMode::WholeSequence => {
            let scores: Vec<f64> = per_sequence_d2
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(j, v)| v / second_difference_dof(j + 3) as f64)
                        .sum()
                })
                .collect();
            Some(rank_descending(&scores))
        }
    };

    let mut trim_ladder = Vec::with_capacity(options.trim_fractions.len());
    for &fraction in &options.trim_fractions {
        let mut entries = Vec::with_capacity(d2_columns.len());
        for (j, values) in d2_columns.iter().enumerate() {
            let xi = second_difference_dof(j + 3);
            let entry = match &whole_ranking {
                None => trim_top_contributors(values, fraction, xi, alpha)?,
                Some(order) => {
                    let k = trim_count(fraction, n);
                    let removed = order.iter().copied().take(k).collect();
                    assess_survivors(values, removed, fraction, xi, alpha)?
                }
            };
            entries.push(entry);
        }
        trim_ladder.push(TrimRung { fraction, entries });
    }

    Ok(StreamReport {
        kind,
        labels: labels.to_vec(),
        max_nu,
        alpha,
        trim_mode: options.trim_mode,
        psi_summary,
        d2_summary,
        per_sequence_psi,
        per_sequence_d2,
        trim_ladder,
    })
}
