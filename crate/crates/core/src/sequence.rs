use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A binarised series, the unit the serial test consumes.
///
/// `segment_bounds` holds the start index of every segment after the first,
/// marking where independently binarised pieces were joined.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinarySequence {
    bits: Vec<u8>,
    source_id: String,
    segment_bounds: Vec<usize>,
}

impl BinarySequence {
    /// Builds a single-segment sequence.
    pub fn new(bits: Vec<u8>, source_id: impl Into<String>) -> Result<Self> {
        Self::with_segments(bits, source_id, Vec::new())
    }

    /// Builds a sequence made of joined segments.
    pub fn with_segments(
        bits: Vec<u8>,
        source_id: impl Into<String>,
        segment_bounds: Vec<usize>,
    ) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((index, &value)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(Error::InvalidBit { index, value });
        }
        let mut prev = 0;
        for &b in &segment_bounds {
            if b <= prev || b >= bits.len() {
                return Err(Error::InvalidSegmentBounds);
            }
            prev = b;
        }
        Ok(Self {
            bits,
            source_id: source_id.into(),
            segment_bounds,
        })
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_str_bits(s: &str, source_id: impl Into<String>) -> Result<Self> {
        let bits = s
            .bytes()
            .enumerate()
            .map(|(index, c)| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::InvalidBit { index, value: c }),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits, source_id)
    }

    /// The bits, each 0 or 1.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Opaque label of the sequence's origin.
    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Start indices of the second and later segments.
    pub fn segment_bounds(&self) -> &[usize] {
        &self.segment_bounds
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; sequences are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of ones.
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Iterates the segments as slices, in order.
    pub fn segments(&self) -> impl Iterator<Item = &[u8]> + '_ {
        let starts = core::iter::once(0).chain(self.segment_bounds.iter().copied());
        let ends = self
            .segment_bounds
            .iter()
            .copied()
            .chain(core::iter::once(self.bits.len()));
        starts.zip(ends).map(move |(s, e)| &self.bits[s..e])
    }

    /// Every bit flipped; segments preserved.
    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| b ^ 1).collect(),
            source_id: self.source_id.clone(),
            segment_bounds: self.segment_bounds.clone(),
        }
    }

    /// The sequence read backwards, with segment bounds mirrored.
    pub fn reversed(&self) -> Self {
        let n = self.bits.len();
        let mut bits = self.bits.clone();
        bits.reverse();
        Self {
            bits,
            source_id: self.source_id.clone(),
            segment_bounds: self.segment_bounds.iter().rev().map(|&b| n - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_empty_and_non_binary() {
        assert_eq!(BinarySequence::new(vec![], "x"), Err(Error::Empty));
        assert_eq!(
            BinarySequence::new(vec![0, 2], "x"),
            Err(Error::InvalidBit { index: 1, value: 2 })
        );
    }

    #[test]
    fn segment_bounds_validated() {
        let bits = vec![0, 1, 0, 1];
        assert!(BinarySequence::with_segments(bits.clone(), "x", vec![2]).is_ok());
        assert!(BinarySequence::with_segments(bits.clone(), "x", vec![0]).is_err());
        assert!(BinarySequence::with_segments(bits.clone(), "x", vec![2, 2]).is_err());
        assert!(BinarySequence::with_segments(bits, "x", vec![4]).is_err());
    }

    #[test]
    fn complement_flips_and_is_involution() {
        let s = BinarySequence::from_str_bits("0101", "s").unwrap();
        assert_eq!(s.complement().bits(), &[1, 0, 1, 0]);
        assert_eq!(s.complement().complement(), s);
    }

    #[test]
    fn reversal_mirrors_segments() {
        let s = BinarySequence::with_segments(vec![1, 1, 0, 0, 0], "s", vec![2]).unwrap();
        let r = s.reversed();
        assert_eq!(r.bits(), &[0, 0, 0, 1, 1]);
        assert_eq!(r.segment_bounds(), &[3]);
        let segs: Vec<&[u8]> = r.segments().collect();
        assert_eq!(segs, vec![&[0u8, 0, 0][..], &[1, 1][..]]);
        assert_eq!(r.reversed(), s);
    }
}
