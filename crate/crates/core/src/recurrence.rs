//! Unthresholded recurrence matrices `R[n][m] = |v_n − v_m|`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// What the trajectory measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AxisLabel {
    /// Adjusted prices.
    Prices,
    /// Log returns.
    Returns,
}

/// Square matrix of pairwise absolute differences, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceMatrix {
    size: usize,
    values: Vec<f64>,
    /// Trajectory kind.
    pub axis: AxisLabel,
}

impl RecurrenceMatrix {
    /// Side length.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry at row `n`, column `m`.
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.values[n * self.size + m]
    }

    /// Rows as slices.
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.size)
    }

    /// Largest entry.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Entries scaled to `0..=255` with the maximum at 255, row-major.
    pub fn gray_levels(&self) -> Vec<u8> {
        let max = self.max();
        if max == 0.0 {
            return alloc::vec![0; self.values.len()];
        }
        self.values
            .iter()
            .map(|v| libm::round(v / max * 255.0) as u8)
            .collect()
    }
}

/// Distance matrix of a scalar trajectory.
pub fn recurrence_matrix(series: &[f64], axis: AxisLabel) -> Result<RecurrenceMatrix> {
    if series.len() < 2 {
        return Err(Error::Domain("recurrence matrix needs at least two points"));
    }
    let size = series.len();
    let mut values = Vec::with_capacity(size * size);
    for &a in series {
        values.extend(series.iter().map(|&b| libm::fabs(a - b)));
    }
    Ok(RecurrenceMatrix { size, values, axis })
}
