//! Gaussian kernel density estimates with Silverman's rule-of-thumb
//! bandwidth `h = 0.9 · min(sd, IQR / 1.34) · n^(−1/5)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 512;

fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

fn sample_sd(samples: &[f64]) -> f64 {
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum();
    libm::sqrt(ss / (samples.len() - 1) as f64)
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Silverman bandwidth. When the IQR is zero the standard deviation alone is
/// used.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Domain("bandwidth needs at least two samples"));
    }
    let sd = sample_sd(samples);
    if !(sd > 0.0) {
        return Err(Error::Domain("samples have zero spread"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * libm::pow(samples.len() as f64, -0.2))
}

/// Rescales by `scale` and centres on the mean: `(x − mean) / scale`.
pub fn centre_and_scale(samples: &[f64], scale: f64) -> Vec<f64> {
    let m = mean(samples);
    samples.iter().map(|x| (x - m) / scale).collect()
}

/// `points` evenly spaced values over `mean ± 4·sd`.
pub fn default_grid(samples: &[f64], points: usize) -> Result<Vec<f64>> {
    if samples.len() < 2 || points < 2 {
        return Err(Error::Domain("grid needs two samples and two points"));
    }
    let m = mean(samples);
    let sd = sample_sd(samples);
    let (lo, hi) = (m - 4.0 * sd, m + 4.0 * sd);
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

/// Density at each grid point for a fixed bandwidth.
pub fn gaussian_kde(samples: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (samples.len() as f64 * bandwidth * libm::sqrt(2.0 * core::f64::consts::PI));
    grid.iter()
        .map(|&g| {
            norm * samples
                .iter()
                .map(|&x| {
                    let z = (g - x) / bandwidth;
                    libm::exp(-0.5 * z * z)
                })
                .sum::<f64>()
        })
        .collect()
}

/// Centres and rescales `samples` by `scale`, then evaluates a Silverman
/// KDE on `grid` (which lives in the rescaled coordinates).
pub fn kde_curve(samples: &[f64], scale: f64, grid: &[f64]) -> Result<Vec<f64>> {
    if !(scale > 0.0) {
        return Err(Error::Domain("scale must be positive"));
    }
    let scaled = centre_and_scale(samples, scale);
    let h = silverman_bandwidth(&scaled)?;
    Ok(gaussian_kde(&scaled, h, grid))
}
