//! Argument parsing and dispatch for the `permtest` binary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::commands::{cmd_ingest, cmd_report, cmd_simulate, cmd_test};
use crate::config::{GeneratorName, RunConfig, StreamSel};
use crate::error::{Error, Result};
use crate::panel::{Frequency, GapScope};
use crate::selftest::{check, parse_fixture, EMBEDDED_FIXTURE};

#[derive(Debug, Parser)]
#[command(name = "permtest", version, about = "Overlapping-permutations randomness test for binarised return series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and clean a price file; writes panel.csv, audit.csv, rejects.csv.
    Ingest(RunArgs),
    /// Run the serial test over the firm and year streams of a price file.
    Test(RunArgs),
    /// Run the serial test over generated streams.
    Simulate(RunArgs),
    /// Check the PCG64 generator against reference output.
    RngSelftest {
        /// Fixture file to use instead of the built-in one.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Re-emit tables from an existing report.json.
    Report {
        /// report.json to read.
        #[arg(long)]
        input: PathBuf,
        /// Directory receiving tables/.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub frequency: Option<Frequency>,
    /// Stream(s) to analyse; repeat or comma-separate.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub stream: Vec<StreamSel>,
    #[arg(long)]
    pub max_nu: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Trim fractions, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub trim: Vec<f64>,
    #[arg(long, value_parser = ["ignore", "respect"])]
    pub boundary_mode: Option<String>,
    #[arg(long, value_parser = ["per_nu", "whole_sequence"])]
    pub trim_mode: Option<String>,
    #[arg(long, value_enum)]
    pub gap_scope: Option<GapScope>,
    #[arg(long)]
    pub recurrence_count: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all processors).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorName>,
    #[arg(long, value_parser = ["median", "raw"])]
    pub binarisation: Option<String>,
    #[arg(long)]
    pub burn_in: Option<usize>,
}

fn parse_name<T: DeserializeOwned>(name: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(name.into())).map_err(|e| Error::Config(e.to_string()))
}

impl RunArgs {
    /// Config file (or defaults) with every given flag applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            c.input_path = Some(v.clone());
        }
        if let Some(v) = self.frequency {
            c.frequency = v;
        }
        if !self.stream.is_empty() {
            c.streams = self.stream.clone();
        }
        if let Some(v) = self.max_nu {
            c.max_nu = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if !self.trim.is_empty() {
            c.trim_fractions = self.trim.clone();
        }
        if let Some(v) = &self.boundary_mode {
            c.boundary_mode = parse_name(v)?;
        }
        if let Some(v) = &self.trim_mode {
            c.trim_mode = parse_name(v)?;
        }
        if let Some(v) = self.gap_scope {
            c.gap_scope = v;
        }
        if let Some(v) = self.recurrence_count {
            c.recurrence_count = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out {
            c.output_dir = v.clone();
        }
        c.jobs = self.jobs;
        if self.generator.is_some() || self.binarisation.is_some() || self.burn_in.is_some() {
            let mut syn = c.synthetic.take().unwrap_or_default();
            if let Some(v) = self.generator {
                syn.generator = v;
            }
            if let Some(v) = &self.binarisation {
                syn.binarisation = parse_name(v)?;
            }
            if let Some(v) = self.burn_in {
                syn.burn_in = v;
            }
            c.synthetic = Some(syn);
        }
        c.validate()?;
        Ok(c)
    }
}

fn rng_selftest(fixture: Option<&PathBuf>) -> Result<bool> {
    let text = match fixture {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => EMBEDDED_FIXTURE.to_string(),
    };
    let cases = parse_fixture(&text)?;
    match check(&cases) {
        None => {
            let words: usize = cases.iter().map(|c| c.outputs.len()).sum();
            println!("rng-selftest: pass ({} cases, {words} words)", cases.len());
            Ok(true)
        }
        Some(m) => {
            eprintln!("rng-selftest: FAIL at {m}");
            Ok(false)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Ingest(args) => {
            let summary = cmd_ingest(&args.resolve()?)?;
            println!("{summary}");
        }
        Command::Test(args) => {
            for dir in cmd_test(&args.resolve()?)? {
                println!("wrote {}", dir.display());
            }
        }
        Command::Simulate(args) => {
            for dir in cmd_simulate(&args.resolve()?)? {
                println!("wrote {}", dir.display());
            }
        }
        Command::RngSelftest { fixture } => {
            if !rng_selftest(fixture.as_ref())? {
                return Ok(3);
            }
        }
        Command::Report { input, out } => {
            cmd_report(&input, &out)?;
            println!("wrote {}", out.join("tables").display());
        }
    }
    Ok(0)
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use permtest_core::{BoundaryMode, TrimMode};

    fn args(extra: &[&str]) -> RunArgs {
        let mut v = vec!["permtest", "test"];
        v.extend_from_slice(extra);
        match Cli::try_parse_from(v).unwrap().command {
            Command::Test(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        std::fs::write(&p, r#"{"max_nu": 6, "alpha": 0.01, "seed": 7}"#).unwrap();
        let c = args(&[
            "--config",
            p.to_str().unwrap(),
            "--alpha",
            "0.1",
            "--stream",
            "year",
            "--trim",
            "0.1,0.2",
            "--boundary-mode",
            "respect",
            "--trim-mode",
            "whole_sequence",
        ])
        .resolve()
        .unwrap();
        assert_eq!(c.max_nu, 6);
        assert_eq!(c.alpha, 0.1);
        assert_eq!(c.seed, 7);
        assert_eq!(c.streams, vec![StreamSel::Year]);
        assert_eq!(c.trim_fractions, vec![0.1, 0.2]);
        assert_eq!(c.boundary_mode, BoundaryMode::Respect);
        assert_eq!(c.trim_mode, TrimMode::WholeSequence);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert!(matches!(args(&["--max-nu", "9"]).resolve(), Err(Error::Config(_))));
        assert!(matches!(args(&["--trim", "0.6"]).resolve(), Err(Error::Config(_))));
        assert!(Cli::try_parse_from(["permtest", "test", "--boundary-mode", "wrap"]).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["permtest", "frobnicate"]), 1);
        assert_eq!(run(["permtest", "test", "--max-nu", "x"]), 1);
        assert_eq!(run(["permtest", "test", "--max-nu", "2"]), 1);
    }
}
