//! Overlapping pattern counts and the ψ² statistic with its first and second
//! differences.
//!
//! Windows are non-circular and slide with stride one. A pattern is indexed by
//! its binary value with the earliest bit as the most significant one.
//! Expected frequency per pattern is `λ = (N − ν + 1) / 2^ν`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sequence::BinarySequence;

/// Largest supported window size.
pub const MAX_NU: usize = 8;

/// Whether windows may straddle the joins of a segmented sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundaryMode {
    /// Treat the sequence as one flat array.
    #[default]
    Ignore,
    /// Count windows inside each segment only.
    Respect,
}

/// Window counts for one window size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCounts {
    /// Window size ν.
    pub nu: usize,
    /// `2^ν` counts indexed by pattern value.
    pub counts: Vec<u64>,
    /// Number of windows counted.
    pub total_windows: u64,
    /// Segments shorter than ν, which contributed no windows.
    pub short_segments: usize,
}

fn check_nu(nu: usize) -> Result<()> {
    if (1..=MAX_NU).contains(&nu) {
        Ok(())
    } else {
        Err(Error::WindowOutOfRange(nu))
    }
}

fn count_into(bits: &[u8], nu: usize, counts: &mut [u64]) -> u64 {
    let mask = (1usize << nu) - 1;
    let mut code = 0usize;
    let mut windows = 0;
    for (i, &b) in bits.iter().enumerate() {
        code = ((code << 1) | b as usize) & mask;
        if i + 1 >= nu {
            counts[code] += 1;
            windows += 1;
        }
    }
    windows
}

/// Counts every overlapping length-`nu` window of `seq`.
pub fn count_overlapping_patterns(
    seq: &BinarySequence,
    nu: usize,
    mode: BoundaryMode,
) -> Result<PatternCounts> {
    check_nu(nu)?;
    let n = seq.len();
    let mut counts = vec![0u64; 1 << nu];
    let mut short_segments = 0;
    let total_windows = match mode {
        BoundaryMode::Ignore => {
            if nu > n {
                return Err(Error::WindowExceedsLength { nu, len: n });
            }
            count_into(seq.bits(), nu, &mut counts)
        }
        BoundaryMode::Respect => seq
            .segments()
            .map(|s| {
                if s.len() < nu {
                    short_segments += 1;
                }
                count_into(s, nu, &mut counts)
            })
            .sum(),
    };
    Ok(PatternCounts {
        nu,
        counts,
        total_windows,
        short_segments,
    })
}

/// ψ²_ν for a set of pattern counts.
///
/// Evaluated as `(2^ν · Σ n_i² − T²) / T`, which equals `Σ (n_i − λ)² / λ`
/// with `λ = T / 2^ν`. The numerator is exact integer arithmetic, so the
/// result does not depend on the order of the counts.
pub fn psi_square(counts: &PatternCounts) -> Result<f64> {
    let total = counts.total_windows as u128;
    if total == 0 {
        return Err(Error::NoWindows);
    }
    let sum_sq: u128 = counts.counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let k = counts.counts.len() as u128;
    let numerator = k * sum_sq - total * total;
    Ok(numerator as f64 / total as f64)
}

/// Degrees of freedom `ξ_ν = 2^(ν−2)` of the second difference, `ν ≥ 2`.
pub fn second_difference_dof(nu: usize) -> u64 {
    assert!(nu >= 2, "second difference needs ν ≥ 2");
    1u64 << (nu - 2)
}

/// ψ² values for ν = 1..=max_nu together with their differences.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsiProfile {
    /// Sequence length N.
    pub n_bits: usize,
    /// `psi[ν − 1] = ψ²_ν`.
    pub psi: Vec<f64>,
    /// `d1[ν − 2] = ∇ψ²_ν`, for ν ≥ 2.
    pub d1: Vec<f64>,
    /// `d2[ν − 3] = ∇²ψ²_ν`, for ν ≥ 3.
    pub d2: Vec<f64>,
    /// `dof[ν − 3] = ξ_ν`, for ν ≥ 3.
    pub dof: Vec<u64>,
}

impl PsiProfile {
    /// Builds the profile from ψ²_1, ψ²_2, ... in order.
    pub fn from_psi(psi: Vec<f64>, n_bits: usize) -> Result<Self> {
        if psi.is_empty() || psi.len() > MAX_NU {
            return Err(Error::WindowOutOfRange(psi.len()));
        }
        let d1 = psi.windows(2).map(|w| w[1] - w[0]).collect();
        let d2 = psi.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
        let dof = (3..=psi.len()).map(second_difference_dof).collect();
        Ok(Self {
            n_bits,
            psi,
            d1,
            d2,
            dof,
        })
    }

    /// Largest ν in the profile.
    pub fn max_nu(&self) -> usize {
        self.psi.len()
    }

    /// ψ²_ν.
    pub fn psi(&self, nu: usize) -> Option<f64> {
        nu.checked_sub(1).and_then(|i| self.psi.get(i)).copied()
    }

    /// ∇ψ²_ν.
    pub fn d1(&self, nu: usize) -> Option<f64> {
        nu.checked_sub(2).and_then(|i| self.d1.get(i)).copied()
    }

    /// ∇²ψ²_ν.
    pub fn d2(&self, nu: usize) -> Option<f64> {
        nu.checked_sub(3).and_then(|i| self.d2.get(i)).copied()
    }
}

/// ψ² profile of `seq` for ν = 1..=max_nu.
pub fn psi_profile(seq: &BinarySequence, max_nu: usize, mode: BoundaryMode) -> Result<PsiProfile> {
    check_nu(max_nu)?;
    if seq.len() < max_nu {
        return Err(Error::WindowExceedsLength {
            nu: max_nu,
            len: seq.len(),
        });
    }
    let psi = (1..=max_nu)
        .map(|nu| psi_square(&count_overlapping_patterns(seq, nu, mode)?))
        .collect::<Result<Vec<f64>>>()?;
    PsiProfile::from_psi(psi, seq.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    /// Materialises every window as its own vector and tallies by value.
    fn brute_force_counts(bits: &[u8], nu: usize) -> Vec<u64> {
        let mut out = vec![0u64; 1 << nu];
        if bits.len() < nu {
            return out;
        }
        for start in 0..=bits.len() - nu {
            let window: Vec<u8> = bits[start..start + nu].to_vec();
            let mut value = 0usize;
            for (j, &b) in window.iter().enumerate() {
                value += (b as usize) << (nu - 1 - j);
            }
            out[value] += 1;
        }
        out
    }

    fn direct_psi(counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        let lambda = total as f64 / counts.len() as f64;
        counts
            .iter()
            .map(|&c| (c as f64 - lambda).powi(2) / lambda)
            .sum()
    }

    fn seq(s: &str) -> BinarySequence {
        BinarySequence::from_str_bits(s, "t").unwrap()
    }

    #[test]
    fn counts_hand_examples() {
        let c = count_overlapping_patterns(&seq("0101"), 2, BoundaryMode::Ignore).unwrap();
        assert_eq!(c.counts, vec![0, 2, 1, 0]);
        assert_eq!(c.total_windows, 3);

        let c = count_overlapping_patterns(&seq("00000"), 3, BoundaryMode::Ignore).unwrap();
        assert_eq!(c.counts[0], 3);
        assert!(c.counts[1..].iter().all(|&x| x == 0));
    }

    #[test]
    fn window_errors() {
        let s = seq("010");
        assert_eq!(
            count_overlapping_patterns(&s, 4, BoundaryMode::Ignore),
            Err(Error::WindowExceedsLength { nu: 4, len: 3 })
        );
        assert_eq!(
            count_overlapping_patterns(&s, 0, BoundaryMode::Ignore),
            Err(Error::WindowOutOfRange(0))
        );
        assert_eq!(
            count_overlapping_patterns(&s, 9, BoundaryMode::Ignore),
            Err(Error::WindowOutOfRange(9))
        );
    }

    #[test]
    fn respecting_boundaries_skips_joins() {
        let s = BinarySequence::with_segments(vec![0, 1, 1, 0, 1], "t", vec![2, 4]).unwrap();
        let c = count_overlapping_patterns(&s, 2, BoundaryMode::Respect).unwrap();
        // segments 01 | 10 | 1
        assert_eq!(c.counts, vec![0, 1, 1, 0]);
        assert_eq!(c.total_windows, 2);
        assert_eq!(c.short_segments, 1);
        let flat = count_overlapping_patterns(&s, 2, BoundaryMode::Ignore).unwrap();
        assert_eq!(flat.total_windows, 4);
    }

    #[test]
    fn psi_worked_examples() {
        let balanced = count_overlapping_patterns(&seq("0110"), 1, BoundaryMode::Ignore).unwrap();
        assert_eq!(psi_square(&balanced).unwrap(), 0.0);

        let zeros = count_overlapping_patterns(&seq("00000000"), 1, BoundaryMode::Ignore).unwrap();
        assert_eq!(psi_square(&zeros).unwrap(), 8.0);

        let alt = count_overlapping_patterns(&seq("01010101"), 2, BoundaryMode::Ignore).unwrap();
        assert_eq!(alt.counts, vec![0, 4, 3, 0]);
        let expected = (2.25f64.powi(2) + 1.25f64.powi(2) + 2.0 * 1.75f64.powi(2)) / 1.75;
        let got = psi_square(&alt).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 7.2857).abs() < 1e-4);
    }

    #[test]
    fn psi_requires_windows() {
        let empty = PatternCounts {
            nu: 2,
            counts: vec![0; 4],
            total_windows: 0,
            short_segments: 1,
        };
        assert_eq!(psi_square(&empty), Err(Error::NoWindows));
    }

    #[test]
    fn profile_differences_from_table_rows() {
        let p = PsiProfile::from_psi(vec![0.0, 3.19, 62.97], 0).unwrap();
        assert!((p.d2(3).unwrap() - 56.59).abs() < 1e-9);
        let p = PsiProfile::from_psi(vec![3.96e-5, 14.73, 33.69], 0).unwrap();
        assert!((p.d2(3).unwrap() - 4.23).abs() < 1e-3);

        let flat = PsiProfile::from_psi(vec![5.0; 8], 0).unwrap();
        assert!(flat.d2.iter().all(|&d| d == 0.0));
        assert_eq!(flat.dof, vec![2, 4, 8, 16, 32, 64]);
        assert_eq!(flat.d2(2), None);
    }

    #[test]
    fn profile_checks_length() {
        assert!(psi_profile(&seq("0101"), 5, BoundaryMode::Ignore).is_err());
        assert!(psi_profile(&seq("0101"), 9, BoundaryMode::Ignore).is_err());
        let p = psi_profile(&seq("0110100110010110"), 4, BoundaryMode::Ignore).unwrap();
        assert_eq!(p.psi.len(), 4);
        assert_eq!(p.d1.len(), 3);
        assert_eq!(p.d2.len(), 2);
    }

    fn bits_strategy(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..=1, 1..=max_len)
    }

    proptest! {
        #[test]
        fn counts_match_brute_force(bits in bits_strategy(64), nu in 1usize..=4) {
            prop_assume!(bits.len() >= nu);
            let s = BinarySequence::new(bits.clone(), "p").unwrap();
            let c = count_overlapping_patterns(&s, nu, BoundaryMode::Ignore).unwrap();
            prop_assert_eq!(&c.counts, &brute_force_counts(&bits, nu));
            prop_assert_eq!(c.counts.iter().sum::<u64>(), c.total_windows);
            prop_assert_eq!(c.total_windows as usize, bits.len() - nu + 1);
        }

        #[test]
        fn respected_counts_sum_over_segments(
            bits in bits_strategy(80),
            cuts in proptest::collection::btree_set(1usize..80, 0..6),
            nu in 1usize..=5,
        ) {
            let bounds: Vec<usize> = cuts.into_iter().filter(|&c| c < bits.len()).collect();
            let s = BinarySequence::with_segments(bits.clone(), "p", bounds).unwrap();
            let c = count_overlapping_patterns(&s, nu, BoundaryMode::Respect).unwrap();
            let mut expected = vec![0u64; 1 << nu];
            let mut total = 0;
            for seg in s.segments() {
                for (e, x) in expected.iter_mut().zip(brute_force_counts(seg, nu)) {
                    *e += x;
                }
                total += (seg.len() + 1).saturating_sub(nu);
            }
            prop_assert_eq!(c.counts, expected);
            prop_assert_eq!(c.total_windows as usize, total);
        }

        #[test]
        fn psi_matches_direct_formula(bits in bits_strategy(200), nu in 1usize..=6) {
            prop_assume!(bits.len() >= nu);
            let s = BinarySequence::new(bits, "p").unwrap();
            let c = count_overlapping_patterns(&s, nu, BoundaryMode::Ignore).unwrap();
            let fast = psi_square(&c).unwrap();
            let slow = direct_psi(&c.counts);
            prop_assert!(fast >= 0.0);
            prop_assert!((fast - slow).abs() <= 1e-9 * (1.0 + slow));
        }

        #[test]
        fn profile_invariant_under_complement_and_reversal(bits in bits_strategy(300)) {
            prop_assume!(bits.len() >= MAX_NU);
            let s = BinarySequence::new(bits, "p").unwrap();
            let p = psi_profile(&s, MAX_NU, BoundaryMode::Ignore).unwrap();
            prop_assert_eq!(&psi_profile(&s.complement(), MAX_NU, BoundaryMode::Ignore).unwrap(), &p);
            prop_assert_eq!(&psi_profile(&s.reversed(), MAX_NU, BoundaryMode::Ignore).unwrap(), &p);
            for nu in 2..=MAX_NU {
                prop_assert_eq!(p.d1(nu).unwrap(), p.psi(nu).unwrap() - p.psi(nu - 1).unwrap());
            }
            for nu in 3..=MAX_NU {
                let d2 = p.psi(nu).unwrap() - 2.0 * p.psi(nu - 1).unwrap() + p.psi(nu - 2).unwrap();
                prop_assert_eq!(p.d2(nu).unwrap(), d2);
            }
        }
    }
}
