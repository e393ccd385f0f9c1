//! CSV, text-table and plot-data output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{aggregate, CellKey, RunRecord, ThresholdRecord};
use crate::engine::Mode;
use crate::error::{Error, Result};
use crate::objectives::BenchmarkFunction;

/// Marker for thresholds not reached by a majority of runs.
pub const UNREACHED: &str = "---";

/// One line of `runs.csv`: a single threshold of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub function: BenchmarkFunction,
    pub n: usize,
    pub complexity: usize,
    pub workers: usize,
    pub mode: Mode,
    pub repetition: usize,
    pub seed: u64,
    pub threshold: f64,
    pub time_s: Option<f64>,
    pub evals_at_cross: Option<u64>,
    pub mean_cpu_load: Option<f64>,
    /// `optimum`, `budget`, `stagnation`, or `error`.
    pub terminal_reason: String,
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub function: BenchmarkFunction,
    pub n: usize,
    pub complexity: usize,
    pub workers: usize,
    pub mode: Mode,
    pub threshold: f64,
    pub median_time_s: Option<f64>,
    pub median_cpu_load: Option<f64>,
    pub success_count: usize,
    pub repetitions: usize,
}

impl RunRecord {
    pub fn rows(&self) -> Vec<RunRow> {
        let reason = match &self.outcome {
            Ok(r) => r.name().to_string(),
            Err(_) => "error".to_string(),
        };
        self.hits
            .iter()
            .map(|h| RunRow {
                function: self.key.function,
                n: self.key.n,
                complexity: self.key.complexity,
                workers: self.key.workers,
                mode: self.key.mode,
                repetition: self.repetition,
                seed: self.seed,
                threshold: h.threshold,
                time_s: h.time_s,
                evals_at_cross: h.evals_at_cross,
                mean_cpu_load: h.mean_cpu_load,
                terminal_reason: reason.clone(),
            })
            .collect()
    }
}

impl From<&ThresholdRecord> for SummaryRow {
    fn from(r: &ThresholdRecord) -> Self {
        Self {
            function: r.key.function,
            n: r.key.n,
            complexity: r.key.complexity,
            workers: r.key.workers,
            mode: r.key.mode,
            threshold: r.threshold,
            median_time_s: r.median_time_s,
            median_cpu_load: r.median_cpu_load,
            success_count: r.success_count,
            repetitions: r.repetitions,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_err(path))
}

const RUN_HEADER: [&str; 12] = [
    "function",
    "n",
    "complexity",
    "workers",
    "mode",
    "repetition",
    "seed",
    "threshold",
    "time_s",
    "evals_at_cross",
    "mean_cpu_load",
    "terminal_reason",
];

const SUMMARY_HEADER: [&str; 10] = [
    "function",
    "n",
    "complexity",
    "workers",
    "mode",
    "threshold",
    "median_time_s",
    "median_cpu_load",
    "success_count",
    "repetitions",
];

/// Writes one row per (run, threshold). Floats use shortest round-trip form.
pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let rows: Vec<RunRow> = records.iter().flat_map(RunRecord::rows).collect();
    write_rows(&rows, &RUN_HEADER, path)
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRow>> {
    read_rows(path)
}

pub fn write_summary_csv(summary: &[ThresholdRecord], path: &Path) -> Result<()> {
    let rows: Vec<SummaryRow> = summary.iter().map(SummaryRow::from).collect();
    write_rows(&rows, &SUMMARY_HEADER, path)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

fn format_threshold(t: f64) -> String {
    if t >= 1.0 && t.fract() == 0.0 {
        format!("{t}")
    } else {
        format!("{t:e}")
    }
}

fn format_entry(r: &ThresholdRecord) -> String {
    match (r.median_time_s, r.median_cpu_load) {
        (Some(t), Some(l)) => format!("{t:.2}/{l:.1}"),
        (Some(t), None) => format!("{t:.2}/?"),
        _ => UNREACHED.to_string(),
    }
}

/// Human-readable tables: one section per (function, workers, complexity),
/// one row per (dimension, algorithm), one column per threshold. Entries are
/// `median seconds/median load`.
pub fn render_table(summary: &[ThresholdRecord]) -> String {
    type Section = (BenchmarkFunction, usize, usize);
    let mut sections: BTreeMap<Section, BTreeMap<(usize, Mode), Vec<&ThresholdRecord>>> =
        BTreeMap::new();
    for r in summary {
        sections
            .entry((r.key.function, r.key.workers, r.key.complexity))
            .or_default()
            .entry((r.key.n, r.key.mode))
            .or_default()
            .push(r);
    }
    let mut out = String::new();
    for ((function, workers, complexity), rows) in sections {
        let _ = writeln!(
            out,
            "== {function} | {workers} workers | complexity {complexity} =="
        );
        let mut thresholds: Vec<f64> = rows.values().flatten().map(|r| r.threshold).collect();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let _ = write!(out, "{:<6} {:<13}", "n", "algorithm");
        for t in &thresholds {
            let _ = write!(out, " {:>11}", format_threshold(*t));
        }
        out.push('\n');
        for ((n, mode), cells) in rows {
            let _ = write!(out, "{:<6} {:<13}", n, mode.name());
            for t in &thresholds {
                let entry = cells
                    .iter()
                    .find(|r| r.threshold == *t)
                    .map_or_else(|| UNREACHED.to_string(), |r| format_entry(r));
                let _ = write!(out, " {entry:>11}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Directory-safe name of a cell.
pub fn cell_label(key: &CellKey) -> String {
    format!(
        "{}-n{}-c{}-w{}-{}",
        key.function, key.n, key.complexity, key.workers, key.mode
    )
}

/// Writes `<dir>/<cell>/<rep>.dat` with one `evals best_fitness` line per
/// trace point. Returns the files written.
pub fn emit_plot_data(records: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for r in records {
        let cell_dir = dir.join(cell_label(&r.key));
        fs::create_dir_all(&cell_dir).map_err(io_err(&cell_dir))?;
        let path = cell_dir.join(format!("{}.dat", r.repetition));
        let mut body = String::from("# evals best_fitness\n");
        for p in &r.trace {
            let _ = writeln!(body, "{} {:e}", p.evals, p.best_fitness);
        }
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        f.write_all(body.as_bytes()).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `runs.csv`, `summary.csv`, `tables.txt` and `plot-data/` under `dir`.
pub fn write_outputs(records: &[RunRecord], dir: &Path) -> Result<Vec<ThresholdRecord>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_csv(records, &dir.join("runs.csv"))?;
    let summary = aggregate(records);
    write_summary_csv(&summary, &dir.join("summary.csv"))?;
    let mut tables = render_table(&summary);
    if records.iter().any(|r| !r.cpu_available) {
        tables.push_str(
            "note: process CPU counter unavailable for some runs; their loads are missing\n",
        );
    }
    let tables_path = dir.join("tables.txt");
    fs::write(&tables_path, tables).map_err(io_err(&tables_path))?;
    emit_plot_data(records, &dir.join("plot-data"))?;
    Ok(summary)
}
