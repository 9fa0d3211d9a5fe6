//! Parallel sweeps with ordered, streamed output.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Formulation};
use crate::run::{run_single, ExperimentRecord, RunMetrics};
use crate::stats::Summary;
use crate::{HarnessError, SCHEMA_VERSION};

pub const WORKERS_ENV: &str = "POLYQAOA_WORKERS";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Explicit request first, then the environment, then the machine's parallelism.
pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .or_else(|| thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .max(1)
}

/// One aggregated row: a metric over all seeds of a sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub schema_version: u32,
    pub formulation: Formulation,
    pub bit_resolution: u32,
    pub layers: usize,
    pub metric: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

type Extractor = fn(&RunMetrics) -> f64;

const METRICS: &[(&str, Extractor)] = &[
    ("best_sampled", |m| m.best_sampled),
    ("sample_median", |m| m.samples.median),
    ("sample_mean", |m| m.samples.mean),
    ("reported_expectation", |m| m.reported_expectation),
    ("training_expectation", |m| m.training_expectation),
    ("iterations", |m| m.iterations as f64),
    ("wall_clock_ms", |m| m.wall_clock_ms),
    ("num_qubits", |m| m.num_qubits as f64),
    ("num_ancilla", |m| m.num_ancilla as f64),
    ("depth_ladder", |m| m.depth_ladder as f64),
    ("depth_native", |m| m.depth_native as f64),
];

/// Aggregates successful records per (formulation, resolution, layers).
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Formulation, u32, usize), Vec<&RunMetrics>> = BTreeMap::new();
    for r in records {
        if let Some(m) = &r.metrics {
            groups.entry((r.formulation, r.bit_resolution, r.layers)).or_default().push(m);
        }
    }
    let mut rows = Vec::new();
    for ((formulation, bit_resolution, layers), ms) in groups {
        for (name, get) in METRICS {
            let values: Vec<f64> = ms.iter().map(|m| get(m)).collect();
            let s = Summary::of(&values).expect("groups are non-empty");
            rows.push(SummaryRow {
                schema_version: SCHEMA_VERSION,
                formulation,
                bit_resolution,
                layers,
                metric: name.to_string(),
                count: s.count,
                min: s.min,
                q1: s.q1,
                median: s.median,
                q3: s.q3,
                max: s.max,
                mean: s.mean,
            });
        }
    }
    rows
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Runs every point of `config` on `workers` threads. When `out_dir` is
/// given, records are appended to `records.jsonl` in point order as soon as
/// they and all earlier points are done, and `summary.csv` is written at the
/// end.
pub fn run_sweep(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    workers: usize,
) -> Result<SweepOutcome, HarnessError> {
    config.validate()?;
    let points = config.points();
    let problem = config.problem();
    let settings = config.run_settings();

    let mut sink = match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(BufWriter::new(File::create(dir.join(RECORDS_FILE))?))
        }
        None => None,
    };

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<ExperimentRecord>();
    let mut records = Vec::with_capacity(points.len());
    let written: Result<(), HarnessError> = thread::scope(|scope| {
        for _ in 0..workers.clamp(1, points.len().max(1)) {
            let tx = tx.clone();
            let (next, points, problem, settings) = (&next, &points, &problem, &settings);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = points.get(i) else { break };
                if tx.send(run_single(problem, p, settings, i)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending = BTreeMap::new();
        for record in rx {
            pending.insert(record.index, record);
            while let Some(r) = pending.remove(&records.len()) {
                if let Some(w) = sink.as_mut() {
                    serde_json::to_writer(&mut *w, &r)?;
                    w.write_all(b"\n")?;
                    w.flush()?;
                }
                records.push(r);
            }
        }
        Ok(())
    });
    written?;

    let summary = summarize(&records);
    if let Some(dir) = out_dir {
        write_summary(&summary, &dir.join(SUMMARY_FILE))?;
    }
    Ok(SweepOutcome { records, summary })
}
