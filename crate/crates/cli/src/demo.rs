//! The two worked examples: noiseless compressive sensing with GraSP, and
//! sparse trend filtering of a random walk with splicing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sco::zoo::{gen_random_walk, objective_linear, objective_trend_norm};
use sco::{solve, Dataset, ModelKind, ModelSpec, ScoProblem, ScoSolution, SolverConfig, SolverKind};

use crate::error::{CliError, Result};
use crate::output::SolveOutput;

pub const CS_COEFFICIENTS: [(usize, f64); 3] = [(3, 9.71), (4, 19.16), (7, 13.53)];

/// Numpy-style vector: entries right-aligned to a common width.
fn bracket(items: &[String]) -> String {
    let width = items.iter().map(String::len).max().unwrap_or(0);
    let cells: Vec<String> = items.iter().map(|s| format!("{s:>width$}")).collect();
    format!("[{}]", cells.join(" "))
}

fn ints(v: &[usize]) -> String {
    bracket(&v.iter().map(|j| j.to_string()).collect::<Vec<_>>())
}

fn decimals(v: &[f64]) -> String {
    bracket(&v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>())
}

pub struct CompressiveSensing {
    pub data: Dataset,
    pub solution: ScoSolution,
    pub report: String,
}

/// Noiseless y = Xc with 100 Gaussian rows, 10 columns and three planted
/// coefficients, recovered by GraSP at s = 3.
pub fn compressive_sensing() -> Result<CompressiveSensing> {
    let mut data = sco::zoo::gen_linear(
        &ModelSpec::new(ModelKind::Linear, 100, 10, 3, 0).with_snr(f64::INFINITY),
    )?;
    let mut c = vec![0.0; 10];
    for (j, v) in CS_COEFFICIENTS {
        c[j] = v;
    }
    let x = data.x.as_ref().expect("linear data has a design");
    let y: Vec<f64> = x.rows().into_iter().map(|r| r.iter().zip(&c).map(|(a, b)| a * b).sum()).collect();
    data.y = Some(y);
    data.support_true = CS_COEFFICIENTS.iter().map(|&(j, _)| j).collect();
    data.theta_true = c;

    let problem = ScoProblem::new(objective_linear(&data)?, 3)?;
    let solution = solve(SolverKind::Grasp, &problem, &SolverConfig::default())?;
    let truth: Vec<f64> = data.support_true.iter().map(|&j| data.theta_true[j]).collect();
    let est: Vec<f64> = solution.support.iter().map(|&j| solution.params[j]).collect();
    let mut report = String::new();
    let _ = writeln!(
        report,
        "Effective variables:  {} coefficients:  {}",
        ints(&data.support_true),
        decimals(&truth)
    );
    let _ = writeln!(
        report,
        "Estimated variables:  {} estimated coefficients: {}",
        ints(&solution.support),
        decimals(&est)
    );
    Ok(CompressiveSensing {
        data,
        solution,
        report,
    })
}

pub struct TrendFilter {
    pub observation: Vec<f64>,
    pub trend: Vec<f64>,
    pub solution: ScoSolution,
}

pub const TREND_N: usize = 500;
pub const TREND_S: usize = 10;
pub const TREND_SEED: u64 = 2023;

/// Random walk of length 500 fitted by a cumulative sum of 10 increments,
/// minimizing the unsquared residual norm.
pub fn trend_filter() -> Result<TrendFilter> {
    let data = gen_random_walk(TREND_N, TREND_SEED);
    let problem = ScoProblem::new(objective_trend_norm(&data)?, TREND_S)?;
    let solution = solve(SolverKind::Scope, &problem, &SolverConfig::default())?;
    let mut level = 0.0;
    let trend = solution
        .params
        .iter()
        .map(|t| {
            level += t;
            level
        })
        .collect();
    Ok(TrendFilter {
        observation: data.y.expect("random walk has observations"),
        trend,
        solution,
    })
}

pub fn trend_csv(tf: &TrendFilter) -> String {
    let mut out = String::from("observation,trend\n");
    for (o, t) in tf.observation.iter().zip(&tf.trend) {
        let _ = writeln!(out, "{o},{t}");
    }
    out
}

/// Line chart of the observation and the fitted trend.
pub fn trend_svg(tf: &TrendFilter) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let all = tf.observation.iter().chain(&tf.trend);
    let lo = all.clone().fold(f64::INFINITY, |m, v| m.min(*v));
    let hi = all.fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let last = (tf.observation.len().max(2) - 1) as f64;
    let points = |v: &[f64]| {
        v.iter()
            .enumerate()
            .map(|(i, y)| {
                let px = PAD + (W - 2.0 * PAD) * i as f64 / last;
                let py = H - PAD - (H - 2.0 * PAD) * (y - lo) / span;
                format!("{px:.1},{py:.1}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="0.8" points="{}"/>"##,
        points(&tf.observation)
    );
    let _ = writeln!(
        svg,
        r##"<polyline fill="none" stroke="#ff7f0e" stroke-width="2" points="{}"/>"##,
        points(&tf.trend)
    );
    let _ = writeln!(
        svg,
        r##"<g font-family="sans-serif" font-size="12"><line x1="{x0}" y1="20" x2="{x1}" y2="20" stroke="#1f77b4"/><text x="{t}" y="24">observation</text><line x1="{x0}" y1="38" x2="{x1}" y2="38" stroke="#ff7f0e" stroke-width="2"/><text x="{t}" y="42">filtering trend</text></g>"##,
        x0 = PAD + 10.0,
        x1 = PAD + 40.0,
        t = PAD + 46.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf> {
    fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Runs a demo by name, writes its artifacts into `out_dir` and returns the
/// text to print.
pub fn run_demo(name: &str, out_dir: &Path) -> Result<String> {
    let demo = match name {
        "compressive-sensing" | "trend-filter" => name,
        _ => {
            return Err(CliError::Usage(format!(
                "unknown demo `{name}`; expected compressive-sensing or trend-filter"
            )))
        }
    };
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    if demo == "compressive-sensing" {
        let cs = compressive_sensing()?;
        let json = serde_json::to_string_pretty(&SolveOutput::new(SolverKind::Grasp, &cs.solution))?;
        write(out_dir.join("compressive-sensing.json"), &json)?;
        write(out_dir.join("compressive-sensing.txt"), &cs.report)?;
        Ok(cs.report)
    } else {
        let tf = trend_filter()?;
        let csv = write(out_dir.join("trend-filter.csv"), &trend_csv(&tf))?;
        let svg = write(out_dir.join("trend-filter.svg"), &trend_svg(&tf))?;
        let jumps: Vec<usize> = tf.solution.support.clone();
        Ok(format!(
            "Trend jumps at {} (objective {:.4})\nwrote {} and {}\n",
            ints(&jumps),
            tf.solution.objective,
            csv.display(),
            svg.display()
        ))
    }
}

