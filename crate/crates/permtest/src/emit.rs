//! Output files: summary tables, figure data and `report.json`.
//!
//! Table cells print with two decimals, except ψ²_1 and fractions below 0.1
//! which use scientific notation. A cell whose statistic is *not*
//! significant is marked: `*` in the companion CSV column, `**bold**` in
//! Markdown.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use permtest_core::recurrence::RecurrenceMatrix;
use permtest_core::{StreamKind, StreamReport};
use serde::{Deserialize, Serialize};

use crate::config::{GeneratorName, RunConfig};
use crate::error::{Error, Result};
use crate::panel::Frequency;

/// Where the sequences of a report came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Panel {
        frequency: Frequency,
        instruments: usize,
    },
    Synthetic {
        generator: GeneratorName,
        binarisation: permtest_core::stream::SyntheticBinarisation,
        master_seed: u64,
    },
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: RunConfig,
    pub source: DataSource,
    /// Binarised segments whose ties at the median left them unbalanced.
    pub degenerate_segments: usize,
    pub stream: StreamReport,
}

impl ReportFile {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(Some(e.line() as u64), e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub value: f64,
    pub text: String,
    /// `Some(true)` when the value is not significant.
    pub bold: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub nus: Vec<usize>,
    /// Whether the table carries significance markers.
    pub marked: bool,
    pub rows: Vec<Row>,
}

pub fn fmt_fixed(v: f64) -> String {
    format!("{v:.2}")
}

pub fn fmt_sci(v: f64) -> String {
    format!("{v:.2e}")
}

fn fmt_fraction(v: f64) -> String {
    if v < 0.1 {
        fmt_sci(v)
    } else {
        fmt_fixed(v)
    }
}

fn cell(value: f64, text: String, bold: Option<bool>) -> Cell {
    Cell { value, text, bold }
}

/// Mean, sd and maximum of ψ²_ν, plus one row per year for the year stream.
pub fn psi_table(report: &StreamReport) -> Table {
    let nus: Vec<usize> = (1..=report.max_nu).collect();
    let fmt = |nu: usize, v: f64| if nu == 1 { fmt_sci(v) } else { fmt_fixed(v) };
    let summary_row = |label: &str, pick: fn(&permtest_core::report::ColumnSummary) -> f64| Row {
        label: label.into(),
        cells: report
            .psi_summary
            .iter()
            .map(|c| cell(pick(c), fmt(c.nu, pick(c)), None))
            .collect(),
    };
    let mut rows = vec![
        summary_row("mean", |c| c.mean),
        summary_row("sd", |c| c.sd),
        summary_row("max", |c| c.max),
    ];
    if report.kind == StreamKind::YearSeparated {
        for (label, psi) in report.labels.iter().zip(&report.per_sequence_psi) {
            rows.push(Row {
                label: label.clone(),
                cells: psi
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| cell(v, fmt(j + 1, v), None))
                    .collect(),
            });
        }
    }
    Table {
        name: "psi_summary",
        nus,
        marked: false,
        rows,
    }
}

/// ∇²ψ²_ν summary, per-year rows (year stream), combined sum and the share
/// of individually significant sequences.
pub fn d2_table(report: &StreamReport) -> Table {
    let nus: Vec<usize> = (3..=report.max_nu).collect();
    let d = &report.d2_summary;
    let mut rows = vec![
        Row {
            label: "mean".into(),
            cells: d
                .iter()
                .map(|s| cell(s.column.mean, fmt_fixed(s.column.mean), Some(!s.mean_assessment.significant)))
                .collect(),
        },
        Row {
            label: "sd".into(),
            cells: d.iter().map(|s| cell(s.column.sd, fmt_fixed(s.column.sd), None)).collect(),
        },
        Row {
            label: "max".into(),
            cells: d
                .iter()
                .map(|s| cell(s.column.max, fmt_fixed(s.column.max), Some(s.column.max <= s.sequence_critical)))
                .collect(),
        },
    ];
    if report.kind == StreamKind::YearSeparated {
        for (label, values) in report.labels.iter().zip(&report.per_sequence_d2) {
            rows.push(Row {
                label: label.clone(),
                cells: values
                    .iter()
                    .zip(d)
                    .map(|(&v, s)| cell(v, fmt_fixed(v), Some(v <= s.sequence_critical)))
                    .collect(),
            });
        }
    }
    rows.push(Row {
        label: "sum".into(),
        cells: d
            .iter()
            .map(|s| cell(s.combined.statistic, fmt_fixed(s.combined.statistic), Some(!s.combined.significant)))
            .collect(),
    });
    rows.push(Row {
        label: "fraction".into(),
        cells: d
            .iter()
            .map(|s| cell(s.significant_fraction, fmt_fraction(s.significant_fraction), None))
            .collect(),
    });
    Table {
        name: "d2_summary",
        nus,
        marked: true,
        rows,
    }
}

/// Combined ∇²ψ²_ν after dropping each trim fraction of top contributors;
/// the first row is the untrimmed sum.
pub fn trim_table(report: &StreamReport) -> Table {
    let nus: Vec<usize> = (3..=report.max_nu).collect();
    let sum_cell = |a: &permtest_core::ChiSquareAssessment| {
        cell(a.statistic, fmt_fixed(a.statistic), Some(!a.significant))
    };
    let mut rows = vec![Row {
        label: "0".into(),
        cells: report.combined().map(sum_cell).collect(),
    }];
    for rung in &report.trim_ladder {
        rows.push(Row {
            label: rung.fraction.to_string(),
            cells: rung.entries.iter().map(|e| sum_cell(&e.assessment)).collect(),
        });
    }
    Table {
        name: "trim_ladder",
        nus,
        marked: true,
        rows,
    }
}

pub fn render_csv(table: &Table) -> String {
    let mut header = vec!["row".to_string()];
    for nu in &table.nus {
        header.push(format!("nu{nu}"));
        if table.marked {
            header.push(format!("nu{nu}*"));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in &table.rows {
        let mut fields = vec![row.label.clone()];
        for c in &row.cells {
            fields.push(c.text.clone());
            if table.marked {
                fields.push(if c.bold == Some(true) { "*".into() } else { String::new() });
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn render_markdown(table: &Table) -> String {
    let mut out = String::from("| |");
    for nu in &table.nus {
        out.push_str(&format!(" ν={nu} |"));
    }
    out.push_str("\n|---|");
    for _ in &table.nus {
        out.push_str("---:|");
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&format!("| {} |", row.label));
        for c in &row.cells {
            if c.bold == Some(true) {
                out.push_str(&format!(" **{}** |", c.text));
            } else {
                out.push_str(&format!(" {} |", c.text));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `tables/<name>.csv` and `tables/<name>.md` for all three tables.
pub fn emit_tables(report: &StreamReport, dir: &Path) -> Result<()> {
    for table in [psi_table(report), d2_table(report), trim_table(report)] {
        let base = dir.join("tables").join(table.name);
        write_file(&base.with_extension("csv"), render_csv(&table).as_bytes())?;
        write_file(&base.with_extension("md"), render_markdown(&table).as_bytes())?;
    }
    Ok(())
}

fn buffered(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Plain CSV matrix and an 8-bit binary graymap next to it.
pub fn write_recurrence(m: &RecurrenceMatrix, stem: &Path) -> Result<()> {
    let csv_path = stem.with_extension("csv");
    let mut w = buffered(&csv_path)?;
    let io = |e| Error::io(&csv_path, e);
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)?;

    let pgm_path = stem.with_extension("pgm");
    let mut bytes = format!("P5\n{0} {0}\n255\n", m.size()).into_bytes();
    bytes.extend(m.gray_levels());
    write_file(&pgm_path, &bytes)
}

/// `x,density` rows.
pub fn write_kde(path: &Path, grid: &[f64], density: &[f64]) -> Result<()> {
    let mut w = buffered(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "x,density").map_err(io)?;
    for (x, y) in grid.iter().zip(density) {
        writeln!(w, "{x},{y}").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use permtest_core::{summarize_stream, PsiProfile, SummaryOptions};

    fn year_report() -> StreamReport {
        let labels: Vec<String> = (2001..2004).map(|y| y.to_string()).collect();
        let profiles: Vec<PsiProfile> = [
            vec![0.0, 3.19, 62.97, 179.27, 337.94, 533.66, 982.93, 1562.51],
            vec![3.96e-5, 14.73, 33.69, 54.92, 81.64, 128.0, 250.3, 500.2],
            vec![1.2e-3, 1.0, 4.0, 12.0, 28.0, 60.0, 124.0, 252.0],
        ]
        .into_iter()
        .map(|psi| PsiProfile::from_psi(psi, 5000).unwrap())
        .collect();
        summarize_stream(StreamKind::YearSeparated, &labels, &profiles, &SummaryOptions::default()).unwrap()
    }

    #[test]
    fn number_formats() {
        assert_eq!(fmt_sci(3.96e-5), "3.96e-5");
        assert_eq!(fmt_fixed(1107.594), "1107.59");
        assert_eq!(fmt_fraction(0.0431), "4.31e-2");
        assert_eq!(fmt_fraction(0.79), "0.79");
    }

    #[test]
    fn markdown_column_count() {
        let r = year_report();
        for t in [psi_table(&r), d2_table(&r), trim_table(&r)] {
            let md = render_markdown(&t);
            for line in md.lines() {
                assert_eq!(line.matches('|').count() - 1, t.nus.len() + 1, "{line}");
            }
        }
    }

    #[test]
    fn significance_marks() {
        let t = d2_table(&year_report());
        let y2001 = t.rows.iter().find(|r| r.label == "2001").unwrap();
        assert_eq!(y2001.cells[0].text, "56.59");
        assert_eq!(y2001.cells[0].bold, Some(false));
        let y2002 = t.rows.iter().find(|r| r.label == "2002").unwrap();
        assert_eq!(y2002.cells[0].bold, Some(true));
        assert!(render_csv(&t).lines().next().unwrap().starts_with("row,nu3,nu3*,nu4,nu4*"));
    }

    #[test]
    fn csv_round_trip_to_printed_precision() {
        let r = year_report();
        for t in [psi_table(&r), d2_table(&r), trim_table(&r)] {
            let text = render_csv(&t);
            let mut rd = csv::Reader::from_reader(text.as_bytes());
            let stride = if t.marked { 2 } else { 1 };
            for (rec, row) in rd.records().zip(&t.rows) {
                let rec = rec.unwrap();
                assert_eq!(&rec[0], row.label);
                for (j, c) in row.cells.iter().enumerate() {
                    let parsed: f64 = rec[1 + j * stride].parse().unwrap();
                    let tol = if rec[1 + j * stride].contains('e') {
                        c.value.abs() * 0.005 + 1e-300
                    } else {
                        0.005 + 1e-9
                    };
                    assert!((parsed - c.value).abs() <= tol, "{} {parsed} vs {}", t.name, c.value);
                    if t.marked {
                        assert_eq!(&rec[2 + j * stride] == "*", c.bold == Some(true));
                    }
                }
            }
        }
    }

    #[test]
    fn tables_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let r = year_report();
        emit_tables(&r, &dir.path().join("a")).unwrap();
        emit_tables(&r, &dir.path().join("b")).unwrap();
        for name in ["psi_summary.csv", "d2_summary.csv", "trim_ladder.md"] {
            let a = fs::read(dir.path().join("a/tables").join(name)).unwrap();
            let b = fs::read(dir.path().join("b/tables").join(name)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn graymap_layout() {
        let dir = tempfile::tempdir().unwrap();
        let m = permtest_core::recurrence::recurrence_matrix(
            &[1.0, 3.0, 2.0],
            permtest_core::recurrence::AxisLabel::Prices,
        )
        .unwrap();
        let stem = dir.path().join("figures/recurrence_A_prices");
        write_recurrence(&m, &stem).unwrap();
        let pgm = fs::read(stem.with_extension("pgm")).unwrap();
        assert!(pgm.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(&pgm[pgm.len() - 9..], &[0, 255, 128, 255, 0, 128, 128, 128, 0]);
        let csv = fs::read_to_string(stem.with_extension("csv")).unwrap();
        assert_eq!(csv, "0,2,1\n2,0,1\n1,1,0\n");
    }
}
