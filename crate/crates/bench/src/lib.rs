//! Criterion benchmarks for the `sco` library. Run with `cargo bench -p sco-bench`.
