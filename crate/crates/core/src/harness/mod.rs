//! Experiment harness: runs a matrix of configurations, extracts
//! threshold-crossing times and CPU load, and aggregates medians.

pub mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::cpu::{mean_load_until, CpuSample, DEFAULT_SAMPLE_PERIOD};
use crate::engine::{self, Mode, RunConfig, TerminalReason, TracePoint};
use crate::error::{Error, Result};
use crate::objectives::{BenchmarkFunction, ObjectiveSpec};
use crate::seed::{mix, mix_all};
use crate::strategy::default_params;

pub use report::{
    cell_label, emit_plot_data, read_csv, read_summary_csv, render_table, write_csv, write_outputs,
    write_summary_csv, RunRow, SummaryRow, UNREACHED,
};

/// Threshold levels reported for each function.
pub fn default_thresholds(function: BenchmarkFunction) -> Vec<f64> {
    match function {
        BenchmarkFunction::Sphere | BenchmarkFunction::Rastrigin => {
            vec![1.0, 3e-2, 1e-5, 3e-7, 1e-10]
        }
        BenchmarkFunction::Rosenbrock | BenchmarkFunction::Ellipsoid => {
            vec![3000.0, 100.0, 1e-2, 3e-6, 1e-10]
        }
    }
}

fn check_trace(trace: &[TracePoint]) -> Result<()> {
    for w in trace.windows(2) {
        if w[1].time_s < w[0].time_s {
            return Err(Error::contract("trace is not sorted by time"));
        }
        if w[1].best_fitness > w[0].best_fitness {
            return Err(Error::contract("trace fitness increases"));
        }
    }
    Ok(())
}

/// First trace point at or below each threshold.
pub fn crossings(trace: &[TracePoint], thresholds: &[f64]) -> Result<Vec<Option<TracePoint>>> {
    check_trace(trace)?;
    Ok(thresholds
        .iter()
        .map(|&t| {
            let i = trace.partition_point(|p| p.best_fitness > t);
            trace.get(i).copied()
        })
        .collect())
}

/// Earliest time at which the best fitness is `≤` each threshold.
pub fn time_to_thresholds(trace: &[TracePoint], thresholds: &[f64]) -> Result<Vec<Option<f64>>> {
    Ok(crossings(trace, thresholds)?
        .into_iter()
        .map(|p| p.map(|p| p.time_s))
        .collect())
}

/// Median; the mean of the middle pair for even sizes. `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub function: BenchmarkFunction,
    pub n: usize,
    pub complexity: usize,
    pub workers: usize,
    pub mode: Mode,
}

impl CellKey {
    /// Seed of repetition `rep` of this cell under `master_seed`.
    pub fn run_seed(&self, master_seed: u64, rep: usize) -> u64 {
        mix_all(&[
            master_seed,
            self.function as u64,
            self.n as u64,
            self.complexity as u64,
            self.workers as u64,
            self.mode as u64,
            rep as u64,
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub functions: Vec<BenchmarkFunction>,
    pub dimensions: Vec<usize>,
    pub complexities: Vec<usize>,
    pub worker_counts: Vec<usize>,
    pub modes: Vec<Mode>,
    /// Repetitions for cells without cost injection.
    pub repetitions: usize,
    /// Repetitions for cells with cost injection.
    pub repetitions_heavy: usize,
    pub master_seed: u64,
    pub thresholds: BTreeMap<BenchmarkFunction, Vec<f64>>,
    pub eval_budget: u64,
    pub sample_period: Duration,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// The full benchmark matrix.
    fn default() -> Self {
        Self {
            functions: BenchmarkFunction::ALL.to_vec(),
            dimensions: vec![100, 300, 1000],
            complexities: vec![0, 200, 400, 600],
            worker_counts: vec![2, 4, 6, 8],
            modes: vec![Mode::Async, Mode::Generational],
            repetitions: 100,
            repetitions_heavy: 50,
            master_seed: 0,
            thresholds: BenchmarkFunction::ALL
                .iter()
                .map(|&f| (f, default_thresholds(f)))
                .collect(),
            eval_budget: engine::DEFAULT_EVAL_BUDGET,
            sample_period: DEFAULT_SAMPLE_PERIOD,
            output_dir: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 || self.repetitions_heavy == 0 {
            return Err(Error::contract("repetitions must be at least 1"));
        }
        for (f, t) in &self.thresholds {
            if t.windows(2).any(|w| !(w[0] > w[1])) {
                return Err(Error::contract(format!(
                    "thresholds for {f} not strictly descending"
                )));
            }
        }
        for &f in &self.functions {
            for &n in &self.dimensions {
                for &c in &self.complexities {
                    ObjectiveSpec::new(f, n).with_complexity(c, 0).validate()?;
                }
            }
        }
        if self.worker_counts.contains(&0) {
            return Err(Error::contract("worker counts must be positive"));
        }
        Ok(())
    }

    pub fn thresholds_for(&self, f: BenchmarkFunction) -> Vec<f64> {
        self.thresholds
            .get(&f)
            .cloned()
            .unwrap_or_else(|| default_thresholds(f))
    }

    pub fn repetitions_for(&self, complexity: usize) -> usize {
        if complexity == 0 {
            self.repetitions
        } else {
            self.repetitions_heavy
        }
    }

    /// Cells in execution order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &function in &self.functions {
            for &n in &self.dimensions {
                for &complexity in &self.complexities {
                    for &workers in &self.worker_counts {
                        for &mode in &self.modes {
                            cells.push(CellKey {
                                function,
                                n,
                                complexity,
                                workers,
                                mode,
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Crossing of one threshold in one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdHit {
    pub threshold: f64,
    pub time_s: Option<f64>,
    pub evals_at_cross: Option<u64>,
    /// Mean load from the run start until the crossing.
    pub mean_cpu_load: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub key: CellKey,
    pub repetition: usize,
    pub seed: u64,
    /// `Err` holds the failure message of a run that aborted.
    pub outcome: std::result::Result<TerminalReason, String>,
    pub evals_used: u64,
    pub wall_time: f64,
    pub best_fitness: f64,
    pub hits: Vec<ThresholdHit>,
    pub trace: Vec<TracePoint>,
    pub cpu_samples: Vec<CpuSample>,
    pub cpu_available: bool,
}

impl RunRecord {
    fn failed(key: CellKey, repetition: usize, seed: u64, thresholds: &[f64], err: Error) -> Self {
        Self {
            key,
            repetition,
            seed,
            outcome: Err(err.to_string()),
            evals_used: 0,
            wall_time: 0.0,
            best_fitness: f64::INFINITY,
            hits: thresholds
                .iter()
                .map(|&threshold| ThresholdHit {
                    threshold,
                    time_s: None,
                    evals_at_cross: None,
                    mean_cpu_load: None,
                })
                .collect(),
            trace: Vec::new(),
            cpu_samples: Vec::new(),
            cpu_available: false,
        }
    }
}

/// Builds a record from a finished run.
pub fn record_run(
    key: CellKey,
    repetition: usize,
    seed: u64,
    thresholds: &[f64],
    result: engine::RunResult,
) -> Result<RunRecord> {
    let hits = crossings(&result.trace, thresholds)?
        .into_iter()
        .zip(thresholds)
        .map(|(p, &threshold)| ThresholdHit {
            threshold,
            time_s: p.map(|p| p.time_s),
            evals_at_cross: p.map(|p| p.evals),
            mean_cpu_load: p.and_then(|p| mean_load_until(&result.cpu_samples, p.time_s)),
        })
        .collect();
    Ok(RunRecord {
        key,
        repetition,
        seed,
        outcome: Ok(result.terminal_reason),
        evals_used: result.evals_used,
        wall_time: result.wall_time,
        best_fitness: result.best_fitness,
        hits,
        trace: result.trace,
        cpu_samples: result.cpu_samples,
        cpu_available: result.cpu_available,
    })
}

fn run_cell_once(
    config: &ExperimentConfig,
    key: CellKey,
    rep: usize,
    seed: u64,
) -> Result<RunRecord> {
    let thresholds = config.thresholds_for(key.function);
    let spec =
        ObjectiveSpec::new(key.function, key.n).with_complexity(key.complexity, mix(seed, 0x67));
    let mut run = RunConfig::new(spec)?;
    run.params = default_params(key.n)?;
    run.workers = key.workers;
    run.mode = key.mode;
    run.seed = seed;
    run.eval_budget = config.eval_budget;
    run.thresholds = thresholds.clone();
    run.cpu_sample_period = Some(config.sample_period);

    let objective = spec.instantiate()?;
    let result = match key.mode {
        Mode::Async => engine::run_async_with(&objective, &run, None)?,
        Mode::Generational => engine::run_generational_with(&objective, &run, None)?,
    };
    record_run(key, rep, seed, &thresholds, result)
}

/// Runs every cell of the matrix, one run at a time. `on_record` sees each
/// record as soon as it is produced. Failed runs are recorded, not fatal.
pub fn run_batch_with(
    config: &ExperimentConfig,
    mut on_record: impl FnMut(&RunRecord),
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut records = Vec::new();
    for key in config.cells() {
        for rep in 0..config.repetitions_for(key.complexity) {
            let seed = key.run_seed(config.master_seed, rep);
            let record = run_cell_once(config, key, rep, seed).unwrap_or_else(|e| {
                RunRecord::failed(key, rep, seed, &config.thresholds_for(key.function), e)
            });
            on_record(&record);
            records.push(record);
        }
    }
    Ok(records)
}

pub fn run_batch(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    run_batch_with(config, |_| {})
}

/// Per-cell, per-threshold medians.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRecord {
    pub key: CellKey,
    pub threshold: f64,
    /// Present only when a majority of repetitions crossed the threshold.
    pub median_time_s: Option<f64>,
    pub median_cpu_load: Option<f64>,
    pub success_count: usize,
    pub repetitions: usize,
}

impl ThresholdRecord {
    pub fn reached(&self) -> bool {
        self.median_time_s.is_some()
    }
}

/// Groups records by cell and threshold. Output is ordered by cell key, then
/// by descending threshold, independent of the input order.
pub fn aggregate(records: &[RunRecord]) -> Vec<ThresholdRecord> {
    // threshold bits are ordered so that larger positive thresholds sort first
    let mut groups: BTreeMap<CellKey, BTreeMap<std::cmp::Reverse<u64>, Vec<&ThresholdHit>>> =
        BTreeMap::new();
    let mut reps: BTreeMap<CellKey, usize> = BTreeMap::new();
    for r in records {
        *reps.entry(r.key).or_default() += 1;
        let cell = groups.entry(r.key).or_default();
        for h in &r.hits {
            cell.entry(std::cmp::Reverse(h.threshold.to_bits()))
                .or_default()
                .push(h);
        }
    }
    let mut out = Vec::new();
    for (key, by_threshold) in groups {
        let repetitions = reps[&key];
        let mut rows: Vec<ThresholdRecord> = by_threshold
            .into_iter()
            .map(|(bits, hits)| {
                let times: Vec<f64> = hits.iter().filter_map(|h| h.time_s).collect();
                let loads: Vec<f64> = hits
                    .iter()
                    .filter(|h| h.time_s.is_some())
                    .filter_map(|h| h.mean_cpu_load)
                    .collect();
                let success_count = times.len();
                let majority = success_count >= repetitions.div_ceil(2) && success_count > 0;
                ThresholdRecord {
                    key,
                    threshold: f64::from_bits(bits.0),
                    median_time_s: if majority { median(&times) } else { None },
                    median_cpu_load: if majority { median(&loads) } else { None },
                    success_count,
                    repetitions,
                }
            })
            .collect();
        rows.sort_by(|a, b| b.threshold.total_cmp(&a.threshold));
        out.extend(rows);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(t: f64, f: f64) -> TracePoint {
        TracePoint {
            time_s: t,
            evals: (t * 100.0) as u64,
            best_fitness: f,
        }
    }

    #[test]
    fn threshold_defaults() {
        assert_eq!(
            default_thresholds(BenchmarkFunction::Sphere),
            vec![1.0, 3e-2, 1e-5, 3e-7, 1e-10]
        );
        assert_eq!(
            default_thresholds(BenchmarkFunction::Rastrigin),
            default_thresholds(BenchmarkFunction::Sphere)
        );
        let r = default_thresholds(BenchmarkFunction::Rosenbrock);
        assert!(r.contains(&3000.0) && r.contains(&100.0));
        assert_eq!(r, vec![3000.0, 100.0, 1e-2, 3e-6, 1e-10]);
        for f in BenchmarkFunction::ALL {
            assert!(default_thresholds(f).windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn crossing_times() {
        let trace = [tp(0.1, 5.0), tp(0.2, 0.5)];
        assert_eq!(time_to_thresholds(&trace, &[1.0]).unwrap(), vec![Some(0.2)]);
        assert_eq!(time_to_thresholds(&trace, &[0.1]).unwrap(), vec![None]);
        assert_eq!(time_to_thresholds(&trace, &[0.5]).unwrap(), vec![Some(0.2)]);
        assert_eq!(
            time_to_thresholds(&trace, &[10.0]).unwrap(),
            vec![Some(0.1)]
        );
        assert_eq!(time_to_thresholds(&[], &[1.0]).unwrap(), vec![None]);
    }

    #[test]
    fn unsorted_trace_is_rejected() {
        assert!(time_to_thresholds(&[tp(0.2, 5.0), tp(0.1, 1.0)], &[1.0]).is_err());
        assert!(time_to_thresholds(&[tp(0.1, 1.0), tp(0.2, 5.0)], &[1.0]).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    fn record(key: CellKey, rep: usize, times: &[Option<f64>]) -> RunRecord {
        let thresholds = [1.0, 1e-5];
        RunRecord {
            key,
            repetition: rep,
            seed: rep as u64,
            outcome: Ok(TerminalReason::Optimum),
            evals_used: 10,
            wall_time: 1.0,
            best_fitness: 0.0,
            hits: thresholds
                .iter()
                .zip(times)
                .map(|(&threshold, &t)| ThresholdHit {
                    threshold,
                    time_s: t,
                    evals_at_cross: t.map(|_| 5),
                    mean_cpu_load: t.map(|t| 1.0 + t),
                })
                .collect(),
            trace: Vec::new(),
            cpu_samples: Vec::new(),
            cpu_available: true,
        }
    }

    fn key() -> CellKey {
        CellKey {
            function: BenchmarkFunction::Sphere,
            n: 10,
            complexity: 0,
            workers: 2,
            mode: Mode::Async,
        }
    }

    #[test]
    fn majority_rule() {
        let mut recs: Vec<RunRecord> = (0..10)
            .map(|i| record(key(), i, &[Some(1.0), None]))
            .collect();
        recs[0].hits[1].time_s = Some(3.0);
        recs[1].hits[1].time_s = Some(4.0);
        let agg = aggregate(&recs);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[0].threshold, 1.0);
        assert_eq!(agg[0].median_time_s, Some(1.0));
        assert_eq!(agg[0].success_count, 10);
        assert_eq!(agg[1].success_count, 2);
        assert!(!agg[1].reached());
    }

    #[test]
    fn aggregate_medians_and_exact_half() {
        let recs = vec![
            record(key(), 0, &[Some(3.0), Some(5.0)]),
            record(key(), 1, &[Some(1.0), None]),
            record(key(), 2, &[Some(2.0), None]),
            record(key(), 3, &[Some(4.0), Some(7.0)]),
        ];
        let agg = aggregate(&recs);
        assert_eq!(agg[0].median_time_s, Some(2.5));
        assert_eq!(agg[0].median_cpu_load, Some(3.5));
        // 2 of 4 is exactly ceil(4/2)
        assert_eq!(agg[1].median_time_s, Some(6.0));
        assert_eq!(agg[1].repetitions, 4);
    }

    #[test]
    fn seeds_differ_across_cells() {
        let a = key();
        let b = CellKey { workers: 4, ..a };
        assert_ne!(a.run_seed(1, 0), b.run_seed(1, 0));
        assert_ne!(a.run_seed(1, 0), a.run_seed(1, 1));
        assert_ne!(a.run_seed(1, 0), a.run_seed(2, 0));
        assert_eq!(a.run_seed(1, 3), a.run_seed(1, 3));
    }

    #[test]
    fn full_matrix_size() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.cells().len(), 4 * 3 * 4 * 4 * 2);
    }
}
