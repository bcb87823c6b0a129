//! Harness around the `sco` library: demos, benchmark suites, sparsity
//! selection and their file artifacts.

pub mod demo;
mod error;
pub mod output;
pub mod record;
pub mod suite;

pub use error::{CliError, Result};
pub use output::SolveOutput;
pub use record::{read_records, summary_markdown, write_records, BenchRecord};
pub use sco::exhaustive::exhaustive_oracle;
pub use sco::metrics::{support_metrics, Metrics};
pub use suite::{run_suite, suite_records, Suite, SuiteOutput};

use std::ops::RangeInclusive;

/// Parses an inclusive range written `A..B` or `A..=B`.
pub fn parse_range(s: &str) -> Result<RangeInclusive<u64>> {
    let bad = || CliError::Usage(format!("expected a range like 0..19, got `{s}`"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}
