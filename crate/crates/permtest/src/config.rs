//! Run configuration: one JSON document, overridable flag by flag.

use std::fs;
use std::path::{Path, PathBuf};

use permtest_core::stream::{Generator, SyntheticBinarisation, SyntheticSpec, DEFAULT_BURN_IN};
use permtest_core::{BoundaryMode, StreamKind, SummaryOptions, TrimMode};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Frequency, GapScope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StreamSel {
    Firm,
    Year,
}

impl StreamSel {
    pub fn kind(self) -> StreamKind {
        match self {
            StreamSel::Firm => StreamKind::FirmSeparated,
            StreamSel::Year => StreamKind::YearSeparated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorName {
    #[default]
    Pcg64,
    Logistic,
}

/// Sequence lengths of one synthetic stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LengthSpec {
    Constant { count: usize, length: usize },
    /// One length per line; blank lines and `#` comments ignored.
    File { path: PathBuf },
}

impl LengthSpec {
    pub fn lengths(&self) -> Result<Vec<usize>> {
        match self {
            LengthSpec::Constant { count, length } => {
                if *count == 0 {
                    return Err(Error::Config("synthetic count must be positive".into()));
                }
                Ok(vec![*length; *count])
            }
            LengthSpec::File { path } => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let mut out = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    out.push(line.parse().map_err(|_| {
                        Error::Config(format!("{}:{}: bad length {line:?}", path.display(), i + 1))
                    })?);
                }
                if out.is_empty() {
                    return Err(Error::Config(format!("{}: no lengths", path.display())));
                }
                Ok(out)
            }
        }
    }
}

/// Generator settings for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub generator: GeneratorName,
    pub binarisation: SyntheticBinarisation,
    pub burn_in: usize,
    pub firm: LengthSpec,
    pub year: LengthSpec,
}

/// Firm-like default: 19 years of monthly returns per instrument.
pub const DEFAULT_FIRM_SHAPE: (usize, usize) = (4225, 227);
/// Year-like default: one year of monthly returns for every instrument.
pub const DEFAULT_YEAR_SHAPE: (usize, usize) = (19, 4225 * 12);

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            generator: GeneratorName::Pcg64,
            binarisation: SyntheticBinarisation::Median,
            burn_in: DEFAULT_BURN_IN,
            firm: LengthSpec::Constant {
                count: DEFAULT_FIRM_SHAPE.0,
                length: DEFAULT_FIRM_SHAPE.1,
            },
            year: LengthSpec::Constant {
                count: DEFAULT_YEAR_SHAPE.0,
                length: DEFAULT_YEAR_SHAPE.1,
            },
        }
    }
}

impl SyntheticConfig {
    pub fn generator(&self) -> Generator {
        match self.generator {
            GeneratorName::Pcg64 => Generator::Pcg64,
            GeneratorName::Logistic => Generator::Logistic {
                burn_in: self.burn_in,
            },
        }
    }

    pub fn spec(&self, kind: StreamKind) -> Result<SyntheticSpec> {
        let lengths = match kind {
            StreamKind::FirmSeparated => &self.firm,
            StreamKind::YearSeparated => &self.year,
        }
        .lengths()?;
        Ok(SyntheticSpec {
            kind,
            lengths,
            binarisation: self.binarisation,
        })
    }
}

/// Everything a run depends on. `output_dir` and `jobs` do not change
/// results and are left out of the copy echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input_path: Option<PathBuf>,
    pub frequency: Frequency,
    pub streams: Vec<StreamSel>,
    pub max_nu: usize,
    pub alpha: f64,
    pub trim_fractions: Vec<f64>,
    pub boundary_mode: BoundaryMode,
    pub trim_mode: TrimMode,
    pub gap_scope: GapScope,
    /// Instruments drawn for recurrence figures.
    pub recurrence_count: usize,
    /// Master seed for synthetic data and figure sampling.
    pub seed: u64,
    pub synthetic: Option<SyntheticConfig>,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input_path: None,
            frequency: Frequency::Monthly,
            streams: vec![StreamSel::Firm, StreamSel::Year],
            max_nu: 8,
            alpha: 0.05,
            trim_fractions: vec![0.01, 0.02, 0.03, 0.04, 0.05],
            boundary_mode: BoundaryMode::Ignore,
            trim_mode: TrimMode::PerNu,
            gap_scope: GapScope::InstrumentLife,
            recurrence_count: 4,
            seed: 2019,
            synthetic: None,
            output_dir: PathBuf::from("out"),
            jobs: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=8).contains(&self.max_nu) {
            return Err(Error::Config(format!("max_nu {} outside 3..=8", self.max_nu)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if let Some(f) = self.trim_fractions.iter().find(|f| !(0.0..0.5).contains(*f)) {
            return Err(Error::Config(format!("trim fraction {f} outside [0, 0.5)")));
        }
        if self.streams.is_empty() {
            return Err(Error::Config("no stream selected".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be positive".into()));
        }
        Ok(())
    }

    /// Selected stream kinds, deduplicated, firm first.
    pub fn stream_kinds(&self) -> Vec<StreamKind> {
        let mut s = self.streams.clone();
        s.sort();
        s.dedup();
        s.into_iter().map(StreamSel::kind).collect()
    }

    pub fn summary_options(&self) -> SummaryOptions {
        SummaryOptions {
            alpha: self.alpha,
            trim_fractions: self.trim_fractions.clone(),
            trim_mode: self.trim_mode,
        }
    }

    pub fn synthetic_or_default(&self) -> SyntheticConfig {
        self.synthetic.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.stream_kinds(), [StreamKind::FirmSeparated, StreamKind::YearSeparated]);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c = RunConfig::from_json(
            r#"{"max_nu": 5, "streams": ["year"], "synthetic": {"generator": "logistic",
                "firm": {"constant": {"count": 10, "length": 50}}}}"#,
        )
        .unwrap();
        assert_eq!(c.max_nu, 5);
        assert_eq!(c.alpha, 0.05);
        let syn = c.synthetic.unwrap();
        assert_eq!(syn.generator(), Generator::Logistic { burn_in: 100 });
        assert_eq!(syn.firm.lengths().unwrap(), vec![50; 10]);
        assert_eq!(syn.year.lengths().unwrap().len(), 19);
    }

    #[test]
    fn unknown_fields_and_bad_values_rejected() {
        assert!(RunConfig::from_json(r#"{"maxnu": 5}"#).is_err());
        for bad in [
            r#"{"max_nu": 2}"#,
            r#"{"max_nu": 9}"#,
            r#"{"alpha": 0}"#,
            r#"{"alpha": 1}"#,
            r#"{"trim_fractions": [0.5]}"#,
            r#"{"streams": []}"#,
        ] {
            let c = RunConfig::from_json(bad).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn echo_omits_output_and_jobs() {
        let c = RunConfig {
            output_dir: "/tmp/x".into(),
            jobs: Some(3),
            ..Default::default()
        };
        let json = serde_json::to_string(&c).unwrap();
        assert!(!json.contains("output_dir") && !json.contains("jobs"));
        let back = RunConfig::from_json(&json).unwrap();
        assert_eq!(back.seed, c.seed);
    }

    #[test]
    fn lengths_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lengths.txt");
        fs::write(&p, "# years\n120\n\n132\n").unwrap();
        let spec = LengthSpec::File { path: p.clone() };
        assert_eq!(spec.lengths().unwrap(), vec![120, 132]);
        fs::write(&p, "12x\n").unwrap();
        assert!(spec.lengths().is_err());
    }
}
