//! Benchmark rows, their CSV form and the Markdown summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One solver run on one generated instance. `p` is the parameter count of
/// the objective (edges for the Ising model, increments for trend series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub solver: String,
    pub model: String,
    pub n: usize,
    pub p: usize,
    pub s_true: usize,
    pub s_used: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub runtime_s: f64,
    pub objective: f64,
}

pub const COLUMNS: [&str; 13] = [
    "solver",
    "model",
    "n",
    "p",
    "s_true",
    "s_used",
    "seed",
    "accuracy",
    "recall",
    "precision",
    "f1",
    "runtime_s",
    "objective",
];

pub fn write_records<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| crate::CliError::io("<csv>", e))?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<BenchRecord>, _>>()?)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Markdown table with one row per (model, solver) and "mean (sd)" cells.
pub fn summary_markdown(title: &str, records: &[BenchRecord]) -> String {
    let mut groups: BTreeMap<(&str, &str), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.model, &r.solver)).or_default().push(r);
    }
    let mut out = String::new();
    let _ = writeln!(out, "# {title}\n");
    out.push_str("| model | solver | runs | s_used | accuracy | precision | f1 | runtime (s) |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for ((model, solver), rows) in groups {
        let cell = |f: fn(&BenchRecord) -> f64| {
            let v: Vec<f64> = rows.iter().map(|r| f(r)).collect();
            let (m, sd) = mean_sd(&v);
            format!("{m:.2} ({sd:.2})")
        };
        let _ = writeln!(
            out,
            "| {model} | {solver} | {} | {} | {} | {} | {} | {} |",
            rows.len(),
            cell(|r| r.s_used as f64),
            cell(|r| r.accuracy),
            cell(|r| r.precision),
            cell(|r| r.f1),
            cell(|r| r.runtime_s),
        );
    }
    out
}
