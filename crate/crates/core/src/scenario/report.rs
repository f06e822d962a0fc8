use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One metric against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `value <= tolerance`; false for NaN.
    pub pass: bool,
    pub note: String,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            note: String::new(),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, tolerance: f64, reason: &Error) -> Self {
        Check::new(name, f64::NAN, tolerance).note(reason.to_string())
    }
}

/// A CSV side table written next to the report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub csv: String,
}

impl Table {
    pub fn from_rows<T: Serialize>(file: &str, rows: &[T]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| Error::io(file, e))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(file, e.into_error()))?;
        Ok(Table {
            file: file.to_string(),
            csv: String::from_utf8(bytes).expect("csv output is utf-8"),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub config_hash: String,
    pub degenerate: bool,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    /// Not written to report files.
    pub wall_time: Duration,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Text,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    check: String,
    value: f64,
    tolerance: f64,
    pass: bool,
    note: String,
    scenario: String,
    config_hash: String,
}

/// The report body in the requested format.
pub fn render_report(report: &RunReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let rows: Vec<CsvRow> = report
                .checks
                .iter()
                .map(|c| CsvRow {
                    check: c.name.clone(),
                    value: c.value,
                    tolerance: c.tolerance,
                    pass: c.pass,
                    note: c.note.clone(),
                    scenario: report.scenario.clone(),
                    config_hash: report.config_hash.clone(),
                })
                .collect();
            Ok(Table::from_rows("report.csv", &rows)?.csv)
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
            writeln!(out, "scenario {} ({})", report.scenario, report.config_hash).unwrap();
            if report.degenerate {
                writeln!(out, "degenerate: zero duration, evolution checks are trivial").unwrap();
            }
            for c in &report.checks {
                let flag = if c.pass { "PASS" } else { "FAIL" };
                write!(out, "{flag} {:<width$} {:>12.4e} <= {:.1e}", c.name, c.value, c.tolerance).unwrap();
                if !c.note.is_empty() {
                    write!(out, "  {}", c.note).unwrap();
                }
                out.push('\n');
            }
            let failed = report.failures().count();
            writeln!(out, "{} checks, {} failed", report.checks.len(), failed).unwrap();
            Ok(out)
        }
    }
}

/// Writes `report.csv` or `report.txt` plus the side tables into `dir`.
pub fn emit_report(report: &RunReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = match format {
        ReportFormat::Csv => "report.csv",
        ReportFormat::Text => "report.txt",
    };
    let mut files = vec![(dir.join(name), render_report(report, format)?)];
    files.extend(report.tables.iter().map(|t| (dir.join(&t.file), t.csv.clone())));
    for (path, body) in &files {
        std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Reads a CSV report back.
pub fn read_report(path: &Path) -> Result<RunReport> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let mut report = RunReport {
        scenario: String::new(),
        config_hash: String::new(),
        degenerate: false,
        checks: Vec::new(),
        tables: Vec::new(),
        wall_time: Duration::ZERO,
    };
    for row in r.deserialize::<CsvRow>() {
        let row = row.map_err(|e| Error::io(path, e))?;
        report.scenario = row.scenario;
        report.config_hash = row.config_hash;
        report.checks.push(Check {
            name: row.check,
            value: row.value,
            tolerance: row.tolerance,
            pass: row.pass,
            note: row.note,
        });
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffKind {
    Same,
    /// Values differ by less than the tolerance.
    Within,
    /// Values differ by more than the tolerance.
    Shifted,
    /// The pass flag flipped.
    Flipped,
    OnlyLeft,
    OnlyRight,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffRow {
    pub check: String,
    pub left: f64,
    pub right: f64,
    pub tolerance: f64,
    pub kind: DiffKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportDiff {
    pub same_config: bool,
    pub rows: Vec<DiffRow>,
}

impl ReportDiff {
    /// No flipped, shifted or unmatched checks.
    pub fn is_clean(&self) -> bool {
        self.rows
            .iter()
            .all(|r| matches!(r.kind, DiffKind::Same | DiffKind::Within))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.same_config {
            out.push_str("config hashes differ\n");
        }
        for r in &self.rows {
            let kind = match r.kind {
                DiffKind::Same => continue,
                DiffKind::Within => "within",
                DiffKind::Shifted => "shifted",
                DiffKind::Flipped => "flipped",
                DiffKind::OnlyLeft => "only-left",
                DiffKind::OnlyRight => "only-right",
            };
            writeln!(out, "{kind:<10} {} {:e} -> {:e} (tolerance {:e})", r.check, r.left, r.right, r.tolerance).unwrap();
        }
        let changed = self.rows.iter().filter(|r| r.kind != DiffKind::Same).count();
        writeln!(out, "{} checks compared, {changed} differ", self.rows.len()).unwrap();
        out
    }
}

/// Matches checks by name; a difference counts once it exceeds the tolerance
/// of the check.
pub fn compare_reports(left: &RunReport, right: &RunReport) -> ReportDiff {
    let mut by_name: BTreeMap<&str, (Option<&Check>, Option<&Check>)> = BTreeMap::new();
    for c in &left.checks {
        by_name.entry(&c.name).or_default().0 = Some(c);
    }
    for c in &right.checks {
        by_name.entry(&c.name).or_default().1 = Some(c);
    }
    let rows = by_name
        .into_iter()
        .map(|(name, pair)| {
            let (l, r, tol, kind) = match pair {
                (Some(a), Some(b)) => {
                    let same = a.value.to_bits() == b.value.to_bits() && a.pass == b.pass;
                    let tol = a.tolerance.max(b.tolerance);
                    let kind = if same {
                        DiffKind::Same
                    } else if a.pass != b.pass {
                        DiffKind::Flipped
                    } else if (a.value - b.value).abs() <= tol {
                        DiffKind::Within
                    } else {
                        DiffKind::Shifted
                    };
                    (a.value, b.value, tol, kind)
                }
                (Some(a), None) => (a.value, f64::NAN, a.tolerance, DiffKind::OnlyLeft),
                (None, Some(b)) => (f64::NAN, b.value, b.tolerance, DiffKind::OnlyRight),
                (None, None) => unreachable!(),
            };
            DiffRow {
                check: name.to_string(),
                left: l,
                right: r,
                tolerance: tol,
                kind,
            }
        })
        .collect();
    ReportDiff {
        same_config: left.config_hash == right.config_hash,
        rows,
    }
}
