use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The sequence or sample is empty.
    Empty,
    /// A bit value other than 0 or 1.
    InvalidBit {
        /// Position of the offending element.
        index: usize,
        /// The value found there.
        value: u8,
    },
    /// Segment bounds are not strictly increasing inside `(0, len)`.
    InvalidSegmentBounds,
    /// Window size outside `1..=8`.
    WindowOutOfRange(usize),
    /// Window size larger than the sequence.
    WindowExceedsLength {
        /// Requested window size.
        nu: usize,
        /// Sequence length.
        len: usize,
    },
    /// No complete window could be formed.
    NoWindows,
    /// Any other violated precondition.
    Domain(&'static str),
}

/// Result alias for the core crate.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty => f.write_str("empty input"),
            Error::InvalidBit { index, value } => {
                write!(f, "bit {value} at index {index} is not 0 or 1")
            }
            Error::InvalidSegmentBounds => {
                f.write_str("segment bounds must be strictly increasing and inside the sequence")
            }
            Error::WindowOutOfRange(nu) => write!(f, "window size {nu} outside 1..=8"),
            Error::WindowExceedsLength { nu, len } => {
                write!(f, "window size {nu} exceeds sequence length {len}")
            }
            Error::NoWindows => f.write_str("no complete window in sequence"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
