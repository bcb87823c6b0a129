//! Benchmark suites: every solver on seeded instances of one model family.

use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sco::selection::{select_by_criterion, Criterion, SparsityGrid};
use sco::{
    generate, solve, support_metrics, validate_solution, ModelKind, ModelSpec, ScoSolution,
    SolverConfig, SolverKind,
};

use crate::error::{CliError, Result};
use crate::record::{summary_markdown, write_records, BenchRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    A2Linear,
    A2Logistic,
    A2Trend,
    A2Ising,
    SelectionA3,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::A2Linear,
        Suite::A2Logistic,
        Suite::A2Trend,
        Suite::A2Ising,
        Suite::SelectionA3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::A2Linear => "a2-linear",
            Suite::A2Logistic => "a2-logistic",
            Suite::A2Trend => "a2-trend",
            Suite::A2Ising => "a2-ising",
            Suite::SelectionA3 => "selection-a3",
        }
    }

    /// Instances for one seed at the given scale, each with the criterion
    /// used to pick s (none for fixed-s suites).
    pub fn cases(self, scale: f64, seed: u64) -> Vec<Case> {
        let fixed = |kind, n, p, s| Case {
            spec: scaled(ModelSpec::new(kind, n, p, s, seed), scale),
            criterion: None,
        };
        let chosen = |kind, n, p, s, c| {
            let spec = scaled(ModelSpec::new(kind, n, p, s, seed), scale);
            Case {
                criterion: Some(c),
                spec,
            }
        };
        match self {
            Suite::A2Linear => vec![fixed(ModelKind::Linear, 500, 1000, 10)],
            Suite::A2Logistic => vec![fixed(ModelKind::Logistic, 500, 1000, 10)],
            Suite::A2Trend => vec![fixed(ModelKind::TrendFilter, 200, 0, 5)],
            Suite::A2Ising => vec![fixed(ModelKind::Ising, 500, 10, 8)],
            Suite::SelectionA3 => vec![
                chosen(ModelKind::Linear, 200, 100, 5, Criterion::Sic),
                chosen(ModelKind::Logistic, 200, 100, 5, Criterion::Gic),
                chosen(ModelKind::TrendFilter, 200, 0, 5, Criterion::Bic),
                chosen(ModelKind::Ising, 300, 10, 8, Criterion::Gic),
            ],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|k| k.name()).collect();
                CliError::Usage(format!("unknown suite `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub spec: ModelSpec,
    pub criterion: Option<Criterion>,
}

/// Multiplies n, p and s_true by `scale`, rounding up, and keeps the
/// instance well-formed.
pub fn scaled(mut spec: ModelSpec, scale: f64) -> ModelSpec {
    let up = |v: usize| ((v as f64 * scale).ceil() as usize).max(1);
    spec.n = up(spec.n);
    spec.p = match spec.kind {
        ModelKind::TrendFilter => 0,
        ModelKind::Ising => up(spec.p).max(2),
        _ => up(spec.p),
    };
    spec.s_true = up(spec.s_true).min(spec.dim());
    spec
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("scale must lie in (0, 1], got {scale}")))
    }
}

/// Runs one solver on one case and scores the result.
pub fn run_case(case: &Case, kind: SolverKind) -> Result<(BenchRecord, ScoSolution)> {
    let spec = &case.spec;
    let data = generate(spec)?;
    let (sol, s_used, problem) = match case.criterion {
        None => {
            let problem = data.problem(spec.s_true)?;
            let sol = solve(kind, &problem, &SolverConfig::default())?;
            (sol, spec.s_true, problem)
        }
        Some(criterion) => {
            let problem = data.problem(1)?;
            let top = (2 * spec.s_true).min(problem.view().unit_count());
            let grid = SparsityGrid::range(1, top)?;
            let start = std::time::Instant::now();
            let path = select_by_criterion(&problem, &grid, kind, criterion, &SolverConfig::default())?;
            let mut sol = path.chosen;
            sol.runtime = start.elapsed().as_secs_f64();
            (sol, path.chosen_s, problem.with_sparsity(path.chosen_s)?)
        }
    };
    validate_solution(&problem, &sol, 1e-9).map_err(|e| CliError::Invalid(e.to_string()))?;
    let m = support_metrics(&data.support_true, &sol.support, data.dim())?;
    let record = BenchRecord {
        solver: kind.name().to_string(),
        model: spec.kind.name().to_string(),
        n: spec.n,
        p: data.dim(),
        s_true: spec.s_true,
        s_used,
        seed: spec.seed,
        accuracy: m.accuracy,
        recall: m.recall,
        precision: m.precision,
        f1: m.f1,
        runtime_s: sol.runtime,
        objective: sol.objective,
    };
    Ok((record, sol))
}

/// Every solver on every case and seed, sorted by (solver, model, seed).
pub fn suite_records(
    suite: Suite,
    scale: f64,
    seeds: RangeInclusive<u64>,
    solvers: &[SolverKind],
) -> Result<Vec<BenchRecord>> {
    check_scale(scale)?;
    let mut records = Vec::new();
    for seed in seeds {
        for case in suite.cases(scale, seed) {
            for &kind in solvers {
                records.push(run_case(&case, kind)?.0);
            }
        }
    }
    records.sort_by(|a, b| {
        (a.solver.as_str(), a.model.as_str(), a.seed).cmp(&(b.solver.as_str(), b.model.as_str(), b.seed))
    });
    Ok(records)
}

#[derive(Debug)]
pub struct SuiteOutput {
    pub records: Vec<BenchRecord>,
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Runs all eight solvers and writes `<suite>.csv` and `<suite>.md` into
/// `out_dir`.
pub fn run_suite(suite: Suite, scale: f64, seeds: RangeInclusive<u64>, out_dir: &Path) -> Result<SuiteOutput> {
    check_scale(scale)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let title = format!("{suite} (scale {scale}, seeds {}..{})", seeds.start(), seeds.end());
    let records = suite_records(suite, scale, seeds, &SolverKind::ALL)?;
    let csv = out_dir.join(format!("{suite}.csv"));
    let file = fs::File::create(&csv).map_err(|e| CliError::io(&csv, e))?;
    write_records(&records, file)?;
    let summary = out_dir.join(format!("{suite}.md"));
    fs::write(&summary, summary_markdown(&title, &records)).map_err(|e| CliError::io(&summary, e))?;
    Ok(SuiteOutput { records, csv, summary })
}
