//! The four pipeline commands behind the CLI.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use permtest_core::kde::{centre_and_scale, default_grid, kde_curve, DEFAULT_GRID_POINTS};
use permtest_core::recurrence::{recurrence_matrix, AxisLabel};
use permtest_core::stream::{monthly_column_sums, shape_synthetic};
use permtest_core::{
    psi_profile, summarize_stream, BoundaryMode, ExperimentStream, Pcg64, PsiProfile, StreamKind,
    StreamReport,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::emit::{emit_tables, write_file, write_kde, write_recurrence, DataSource, ReportFile};
use crate::error::{CoreContext, Error, Result};
use crate::panel::{clean_panel, write_audit, AuditEntry, DropReason, Frequency, Panel};
use crate::prices::{parse_prices, write_prices, write_rejects, ParsedPrices};
use crate::streams::{adjusted_prices, build_stream, return_panel};

/// Counts printed by `ingest`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub kept: usize,
    pub dropped: usize,
    pub gap: usize,
    pub short: usize,
    pub duplicate: usize,
    pub rejected_rows: usize,
}

impl std::fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "kept {} instruments, dropped {} (gap {}, short {}, duplicate {}), rejected {} rows",
            self.kept, self.dropped, self.gap, self.short, self.duplicate, self.rejected_rows
        )
    }
}

fn input_path(config: &RunConfig) -> Result<&Path> {
    config
        .input_path
        .as_deref()
        .ok_or_else(|| Error::Config("no input file given".into()))
}

fn read_prices(path: &Path) -> Result<ParsedPrices> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_prices(BufReader::new(file))
}

fn load_panel(config: &RunConfig) -> Result<(Panel, Vec<AuditEntry>, ParsedPrices)> {
    let parsed = read_prices(input_path(config)?)?;
    let (panel, audit) = clean_panel(&parsed.records, config.frequency, config.gap_scope);
    if panel.is_empty() {
        return Err(Error::format(None, "no instrument survived cleaning"));
    }
    Ok((panel, audit, parsed))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Cleans the input and writes `panel.csv`, `audit.csv` and `rejects.csv`.
pub fn cmd_ingest(config: &RunConfig) -> Result<IngestSummary> {
    config.validate()?;
    let parsed = read_prices(input_path(config)?)?;
    let (panel, audit) = clean_panel(&parsed.records, config.frequency, config.gap_scope);
    let out = &config.output_dir;
    let records: Vec<_> = panel.records().cloned().collect();
    write_file(&out.join("panel.csv"), &csv_bytes(|b| write_prices(b, &records))?)?;
    write_file(&out.join("audit.csv"), &csv_bytes(|b| write_audit(b, &audit))?)?;
    write_file(&out.join("rejects.csv"), &csv_bytes(|b| write_rejects(b, &parsed.rejects))?)?;
    let count = |r: DropReason| audit.iter().filter(|a| a.reason == r).count();
    let summary = IngestSummary {
        kept: panel.len(),
        dropped: audit.len(),
        gap: count(DropReason::Gap),
        short: count(DropReason::Short),
        duplicate: count(DropReason::Duplicate),
        rejected_rows: parsed.rejects.len(),
    };
    if panel.is_empty() {
        return Err(Error::format(None, format!("no instrument survived cleaning: {summary}")));
    }
    Ok(summary)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Profiles of every sequence, in stream order.
pub fn profile_stream(
    stream: &ExperimentStream,
    max_nu: usize,
    mode: BoundaryMode,
    jobs: Option<usize>,
) -> Result<Vec<PsiProfile>> {
    pool(jobs)?.install(|| {
        stream
            .sequences
            .par_iter()
            .map(|s| psi_profile(s, max_nu, mode).context("computing ψ² profile"))
            .collect()
    })
}

const REL_TOL: f64 = 1e-9;

/// Cross-checks a finished report against its own per-sequence data.
pub fn check_invariants(report: &StreamReport, profiles: &[PsiProfile]) -> Result<()> {
    let fail = |msg: String| Err(Error::Invariant(msg));
    for (i, p) in profiles.iter().enumerate() {
        if p.psi.iter().any(|&v| !(v >= 0.0)) {
            return fail(format!("sequence {i}: negative or NaN ψ²"));
        }
        for nu in 3..=p.max_nu() {
            let j = nu - 1;
            if p.d2[nu - 3] != p.psi[j] - 2.0 * p.psi[j - 1] + p.psi[j - 2] {
                return fail(format!("sequence {i}: second difference at ν={nu} not exact"));
            }
        }
    }
    for (j, d) in report.d2_summary.iter().enumerate() {
        let sum: f64 = report.per_sequence_d2.iter().map(|row| row[j]).sum();
        let scale = sum.abs().max(d.combined.statistic.abs()).max(1.0);
        if (sum - d.combined.statistic).abs() > REL_TOL * scale {
            return fail(format!("ν={}: combined statistic differs from column sum", d.column.nu));
        }
        if !(0.0..=1.0).contains(&d.significant_fraction) {
            return fail(format!("ν={}: significant fraction out of range", d.column.nu));
        }
        let mut prev = d.combined.statistic;
        for rung in &report.trim_ladder {
            let s = rung.entries[j].assessment.statistic;
            if s > prev + REL_TOL * prev.abs().max(1.0) {
                return fail(format!("ν={}: trim ladder increases at p={}", d.column.nu, rung.fraction));
            }
            prev = s;
        }
    }
    Ok(())
}

fn write_report(dir: &Path, file: &ReportFile, stream: &ExperimentStream) -> Result<()> {
    write_file(&dir.join("report.json"), file.to_json()?.as_bytes())?;
    let mut prov = serde_json::to_string_pretty(&stream.provenance)?;
    prov.push('\n');
    write_file(&dir.join("provenance.json"), prov.as_bytes())?;
    emit_tables(&file.stream, dir)
}

fn analyse(
    config: &RunConfig,
    stream: &ExperimentStream,
    source: DataSource,
) -> Result<(ReportFile, PathBuf)> {
    if stream.is_empty() {
        return Err(Error::format(None, format!("{} stream holds no sequence", stream.kind.short_name())));
    }
    let profiles = profile_stream(stream, config.max_nu, config.boundary_mode, config.jobs)?;
    let labels: Vec<String> = stream.provenance.iter().map(|p| p.label.clone()).collect();
    let report = summarize_stream(stream.kind, &labels, &profiles, &config.summary_options())
        .context("summarising stream")?;
    check_invariants(&report, &profiles)?;
    let degenerate_segments = stream
        .provenance
        .iter()
        .flat_map(|p| &p.segments)
        .filter(|s| s.degenerate)
        .count();
    let file = ReportFile {
        config: config.clone(),
        source,
        degenerate_segments,
        stream: report,
    };
    let dir = config.output_dir.join(stream.kind.short_name());
    write_report(&dir, &file, stream)?;
    Ok((file, dir))
}

/// Instruments drawn for recurrence figures: a seeded partial shuffle,
/// returned in ascending panel order.
pub fn sample_instruments(n: usize, count: usize, seed: u64) -> Vec<usize> {
    // stream index beyond any synthetic sequence index
    let mut rng = Pcg64::new(seed as u128, 1u128 << 64);
    let mut idx: Vec<usize> = (0..n).collect();
    let k = count.min(n);
    for i in 0..k {
        let j = i + (rng.next_u64() % (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    let mut chosen = idx[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn emit_recurrence(panel: &Panel, config: &RunConfig, dir: &Path) -> Result<()> {
    for i in sample_instruments(panel.len(), config.recurrence_count, config.seed) {
        let inst = &panel.instruments[i];
        let prices = adjusted_prices(inst)?;
        let returns = permtest_core::log_returns(&prices).context("computing log returns")?;
        let figures = dir.join("figures");
        let id = file_safe(&inst.id);
        let pm = recurrence_matrix(&prices, AxisLabel::Prices).context("recurrence of prices")?;
        write_recurrence(&pm, &figures.join(format!("recurrence_{id}_prices")))?;
        if returns.len() >= 2 {
            let rm = recurrence_matrix(&returns, AxisLabel::Returns).context("recurrence of returns")?;
            write_recurrence(&rm, &figures.join(format!("recurrence_{id}_returns")))?;
        }
    }
    Ok(())
}

/// Per-year KDE of month-wise column sums; segments that are not whole
/// years and years without spread go to the audit.
fn emit_kde(stream: &ExperimentStream, dir: &Path, audit: &mut Vec<AuditEntry>) -> Result<()> {
    for (seq, prov) in stream.sequences.iter().zip(&stream.provenance) {
        let year = &prov.label;
        let sums = match monthly_column_sums(seq, 12) {
            Ok(s) => s,
            Err(_) => {
                audit.push(AuditEntry {
                    id: year.clone(),
                    reason: DropReason::ShortSegment,
                    detail: "no whole-year segment for column sums".into(),
                });
                continue;
            }
        };
        for &k in &sums.excluded_segments {
            audit.push(AuditEntry {
                id: format!("{}:{year}", prov.segments[k].instrument),
                reason: DropReason::ShortSegment,
                detail: format!("{} months, excluded from column sums", prov.segments[k].len),
            });
        }
        let samples: Vec<f64> = sums.sums.iter().map(|&s| s as f64).collect();
        let scale = sums.rows as f64;
        let grid = default_grid(&centre_and_scale(&samples, scale), DEFAULT_GRID_POINTS);
        match grid.and_then(|g| kde_curve(&samples, scale, &g).map(|d| (g, d))) {
            Ok((grid, density)) => {
                write_kde(&dir.join("figures").join(format!("kde_{}.csv", file_safe(year))), &grid, &density)?
            }
            Err(_) => audit.push(AuditEntry {
                id: year.clone(),
                reason: DropReason::ZeroSpread,
                detail: "column sums have no spread".into(),
            }),
        }
    }
    Ok(())
}

/// Runs the full pipeline over the input panel, one output directory per
/// stream kind.
pub fn cmd_test(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let (panel, clean_audit, _) = load_panel(config)?;
    let series = return_panel(&panel)?;
    let mut written = Vec::new();
    for kind in config.stream_kinds() {
        let built = build_stream(&series, kind)?;
        let mut audit = clean_audit.clone();
        audit.extend(built.audit.iter().cloned());
        let source = DataSource::Panel {
            frequency: config.frequency,
            instruments: panel.len(),
        };
        let (_, dir) = analyse(config, &built.stream, source)?;
        match kind {
            StreamKind::FirmSeparated => emit_recurrence(&panel, config, &dir)?,
            StreamKind::YearSeparated if config.frequency == Frequency::Monthly => {
                emit_kde(&built.stream, &dir, &mut audit)?
            }
            StreamKind::YearSeparated => {}
        }
        write_file(&dir.join("audit.csv"), &csv_bytes(|b| write_audit(b, &audit))?)?;
        written.push(dir);
    }
    Ok(written)
}

/// Generates the configured synthetic streams from the master seed and
/// analyses them like empirical ones.
pub fn cmd_simulate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let syn = config.synthetic_or_default();
    let mut written = Vec::new();
    for kind in config.stream_kinds() {
        let spec = syn.spec(kind)?;
        let stream = shape_synthetic(&spec, syn.generator(), config.seed)
            .map_err(|e| Error::Config(format!("synthetic spec: {e}")))?;
        let mut echoed = config.clone();
        echoed.synthetic = Some(syn.clone());
        let source = DataSource::Synthetic {
            generator: syn.generator,
            binarisation: syn.binarisation,
            master_seed: config.seed,
        };
        let (_, dir) = analyse(&echoed, &stream, source)?;
        written.push(dir);
    }
    Ok(written)
}

/// Re-emits the tables of an existing `report.json` into `out`.
pub fn cmd_report(report_json: &Path, out: &Path) -> Result<()> {
    let file = ReportFile::read(report_json)?;
    emit_tables(&file.stream, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let a = sample_instruments(100, 4, 2019);
        assert_eq!(a, sample_instruments(100, 4, 2019));
        assert_eq!(a.len(), 4);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_instruments(3, 10, 1), vec![0, 1, 2]);
        assert_ne!(a, sample_instruments(100, 4, 2020));
    }

    #[test]
    fn invariant_checker_catches_tampering() {
        let spec = permtest_core::stream::SyntheticSpec::constant(StreamKind::FirmSeparated, 30, 200);
        let stream = shape_synthetic(&spec, permtest_core::stream::Generator::Pcg64, 5).unwrap();
        let profiles = profile_stream(&stream, 8, BoundaryMode::Ignore, Some(2)).unwrap();
        let labels: Vec<String> = stream.provenance.iter().map(|p| p.label.clone()).collect();
        let report =
            summarize_stream(stream.kind, &labels, &profiles, &Default::default()).unwrap();
        check_invariants(&report, &profiles).unwrap();

        let mut bad = report.clone();
        bad.d2_summary[2].combined.statistic += 1.0;
        assert!(matches!(check_invariants(&bad, &profiles), Err(Error::Invariant(_))));

        let mut bad = report.clone();
        bad.trim_ladder[1].entries[0].assessment.statistic += 1e6;
        assert!(matches!(check_invariants(&bad, &profiles), Err(Error::Invariant(_))));
    }

    #[test]
    fn profiles_independent_of_job_count() {
        let spec = permtest_core::stream::SyntheticSpec::constant(StreamKind::FirmSeparated, 64, 100);
        let stream = shape_synthetic(&spec, permtest_core::stream::Generator::Pcg64, 9).unwrap();
        let one = profile_stream(&stream, 8, BoundaryMode::Ignore, Some(1)).unwrap();
        let four = profile_stream(&stream, 8, BoundaryMode::Ignore, Some(4)).unwrap();
        assert_eq!(one, four);
    }
}
