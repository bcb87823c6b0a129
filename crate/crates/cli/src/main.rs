use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use sco::selection::{cross_validate, select_by_criterion, Criterion, SparsityGrid};
use sco::{generate, solve, ModelKind, ModelSpec, SolverConfig, SolverKind};
use sco_cli::{demo, parse_range, run_suite, CliError, Result, SolveOutput, Suite};

#[derive(Parser)]
#[command(name = "sco", version, about = "Sparsity-constrained optimization solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// linear, logistic, trend or ising
    #[arg(long)]
    model: ModelKind,
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Features, or spins for the Ising model; ignored for trend series
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long = "s-true", default_value_t = 5)]
    s_true: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// var(Xθ*)/var(ε) for linear data
    #[arg(long, default_value_t = 5.0)]
    snr: f64,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        ModelSpec::new(self.model, self.n, self.p, self.s_true, self.seed).with_snr(self.snr)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a worked example: compressive-sensing or trend-filter
    Demo {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Generate one instance and solve it at a fixed sparsity
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value = "scope")]
        solver: SolverKind,
        /// Write the result JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark suite and write CSV and Markdown summaries
    Bench {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Inclusive seed range, e.g. 0..19
        #[arg(long, default_value = "0..19")]
        seeds: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Choose the sparsity level by an information criterion or CV
    Select {
        #[command(flatten)]
        model: ModelArgs,
        /// aic, bic, gic, sic or cv
        #[arg(long)]
        criterion: String,
        #[arg(long = "k-folds", default_value_t = 5)]
        k_folds: usize,
        /// Inclusive range of s values, e.g. 1..10
        #[arg(long, default_value = "1..10")]
        grid: String,
        #[arg(long, default_value = "scope")]
        solver: SolverKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct PathPoint {
    s: usize,
    value: f64,
    objective: f64,
}

#[derive(Serialize)]
struct SelectOutput {
    criterion: String,
    chosen_s: usize,
    path: Vec<PathPoint>,
    solution: SolveOutput,
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, json + "\n").map_err(|e| CliError::io(path, e)),
        None => match writeln!(std::io::stdout(), "{json}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
            _ => Ok(()),
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Demo { name, out } => {
            print!("{}", demo::run_demo(&name, &out)?);
        }
        Command::Solve { model, s, solver, out } => {
            let data = generate(&model.spec())?;
            let problem = data.problem(s)?;
            let sol = solve(solver, &problem, &SolverConfig::default())?;
            emit(&SolveOutput::new(solver, &sol), out.as_deref())?;
        }
        Command::Bench { suite, scale, seeds, out } => {
            let suite: Suite = suite.parse()?;
            let done = run_suite(suite, scale, parse_range(&seeds)?, &out)?;
            println!(
                "{} records -> {} and {}",
                done.records.len(),
                done.csv.display(),
                done.summary.display()
            );
        }
        Command::Select {
            model,
            criterion,
            k_folds,
            grid,
            solver,
            out,
        } => {
            let criterion = match criterion.parse::<Criterion>().map_err(|e| CliError::Usage(e.to_string()))? {
                Criterion::CrossValidation(_) => Criterion::CrossValidation(k_folds),
                c => c,
            };
            let range = parse_range(&grid)?;
            let grid = SparsityGrid::range(*range.start() as usize, *range.end() as usize)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let data = generate(&model.spec())?;
            let config = SolverConfig {
                seed: Some(model.seed),
                ..SolverConfig::default()
            };
            let result = match criterion {
                Criterion::CrossValidation(k) => {
                    cross_validate(|rows| data.subset(rows)?.problem(1), data.n(), k, &grid, solver, &config)?
                }
                c => select_by_criterion(&data.problem(1)?, &grid, solver, c, &config)?,
            };
            let output = SelectOutput {
                criterion: criterion.to_string(),
                chosen_s: result.chosen_s,
                path: result
                    .entries
                    .iter()
                    .map(|e| PathPoint {
                        s: e.s,
                        value: e.value,
                        objective: e.solution.objective,
                    })
                    .collect(),
                solution: SolveOutput::new(solver, &result.chosen),
            };
            emit(&output, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
