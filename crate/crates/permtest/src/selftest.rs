//! Checks the PCG64 implementation against stored reference output words.

use std::fmt;

use permtest_core::Pcg64;

use crate::error::{Error, Result};

/// Reference vectors compiled into the binary.
pub const EMBEDDED_FIXTURE: &str = include_str!("../fixtures/pcg64_reference.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureCase {
    pub seed: u128,
    pub stream: u128,
    pub outputs: Vec<u64>,
}

/// Parses `case <seed hex> <stream hex>` headers each followed by output
/// words in hex. `#` starts a comment line.
pub fn parse_fixture(text: &str) -> Result<Vec<FixtureCase>> {
    let mut cases: Vec<FixtureCase> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = Some(i as u64 + 1);
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let hex128 = |s: &str| {
            u128::from_str_radix(s, 16).map_err(|_| Error::format(line_no, format!("bad hex {s:?}")))
        };
        if let Some(rest) = line.strip_prefix("case") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::format(line_no, "expected `case <seed> <stream>`"));
            }
            cases.push(FixtureCase {
                seed: hex128(parts[0])?,
                stream: hex128(parts[1])?,
                outputs: Vec::new(),
            });
        } else {
            let word = u64::from_str_radix(line, 16)
                .map_err(|_| Error::format(line_no, format!("bad output word {line:?}")))?;
            cases
                .last_mut()
                .ok_or_else(|| Error::format(line_no, "output word before first case"))?
                .outputs
                .push(word);
        }
    }
    if cases.is_empty() || cases.iter().any(|c| c.outputs.is_empty()) {
        return Err(Error::format(None, "fixture holds no complete case"));
    }
    Ok(cases)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub case: usize,
    pub index: usize,
    pub expected: u64,
    pub actual: u64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "case {} output {}: expected {:016x}, got {:016x}",
            self.case, self.index, self.expected, self.actual
        )
    }
}

/// First output that differs from the fixture, if any.
pub fn check(cases: &[FixtureCase]) -> Option<Mismatch> {
    for (c, case) in cases.iter().enumerate() {
        let mut rng = Pcg64::new(case.seed, case.stream);
        for (index, &expected) in case.outputs.iter().enumerate() {
            let actual = rng.next_u64();
            if actual != expected {
                return Some(Mismatch {
                    case: c,
                    index,
                    expected,
                    actual,
                });
            }
        }
    }
    None
}
