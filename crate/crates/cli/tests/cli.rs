use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use sco_cli::{read_records, write_records, BenchRecord};

fn sco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sco")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// CSV body with the runtime column removed.
fn without_runtime(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let col = r.headers().unwrap().iter().position(|h| h == "runtime_s").unwrap();
    r.records()
        .map(|rec| {
            rec.unwrap()
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != col)
                .map(|(_, v)| v.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn compressive_sensing_demo_recovers_the_planted_support() {
    let dir = tempfile::tempdir().unwrap();
    let out = sco(&["demo", "compressive-sensing", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("Estimated variables:  [3 4 7]"), "{text}");
    assert!(text.contains("[ 9.71 19.16 13.53]"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("compressive-sensing.json")).unwrap()).unwrap();
    assert_eq!(json["support"], serde_json::json!([3, 4, 7]));
}

#[test]
fn trend_demo_writes_a_piecewise_constant_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = sco(&["demo", "trend-filter", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("trend-filter.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 501);
    assert_eq!(lines[0], "observation,trend");
    let trend: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let mut prev = 0.0;
    let jumps = trend
        .iter()
        .filter(|&&t| {
            let moved = t != prev;
            prev = t;
            moved
        })
        .count();
    assert!(jumps <= 10, "{jumps}");
    let svg = fs::read_to_string(dir.path().join("trend-filter.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn solve_emits_the_result_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("result.json");
    let out = sco(&[
        "solve", "--model", "logistic", "--n", "80", "--p", "20", "--s-true", "3", "--s", "3", "--solver", "htp",
        "--seed", "4", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["solver", "support", "params", "objective", "iterations", "converged", "runtime_s"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(v["solver"], "htp");
    assert_eq!(v["params"].as_array().unwrap().len(), 20);
    assert!(v["support"].as_array().unwrap().len() <= 3);
}

#[test]
fn select_reports_the_chosen_level() {
    let out = sco(&["select", "--model", "linear", "--criterion", "bic", "--grid", "1..8", "--seed", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["criterion"], "bic");
    assert_eq!(v["path"].as_array().unwrap().len(), 8);
    let s = v["chosen_s"].as_u64().unwrap();
    assert_eq!(v["solution"]["support"].as_array().unwrap().len() as u64, s);
}

#[test]
fn exit_codes_separate_usage_from_runtime_errors() {
    assert_eq!(sco(&["bench", "--suite", "a9"]).status.code(), Some(2));
    assert_eq!(sco(&["demo", "nope"]).status.code(), Some(2));
    assert_eq!(sco(&["solve", "--model", "linear"]).status.code(), Some(2));
    assert_eq!(sco(&["bench", "--suite", "a2-linear", "--seeds", "3..1"]).status.code(), Some(2));
    assert_eq!(sco(&["solve", "--model", "linear", "--p", "10", "--s-true", "2", "--s", "11"]).status.code(), Some(3));
    let blocked = tempfile::NamedTempFile::new().unwrap();
    let under_file = blocked.path().join("out.json");
    let args = ["solve", "--model", "linear", "--p", "10", "--s-true", "2", "--s", "2", "--out", under_file.to_str().unwrap()];
    assert_eq!(sco(&args).status.code(), Some(3));
    assert_eq!(sco(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_rows_cover_every_solver_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = sco(&["bench", "--suite", "a2-linear", "--scale", "0.05", "--seeds", "0..2", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_records(fs::File::open(dir.path().join("a2-linear.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 8 * 3);
    for r in &records {
        for m in [r.accuracy, r.recall, r.precision, r.f1] {
            assert!((0.0..=1.0).contains(&m));
        }
        assert!(r.runtime_s >= 0.0);
    }
    let md = fs::read_to_string(dir.path().join("a2-linear.md")).unwrap();
    assert_eq!(md.lines().filter(|l| l.starts_with("| linear |")).count(), 8);
}

#[test]
fn repeated_bench_runs_match_apart_from_runtime() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = sco(&["bench", "--suite", "a2-trend", "--scale", "0.2", "--seeds", "0..1", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(without_runtime(&a.path().join("a2-trend.csv")), without_runtime(&b.path().join("a2-trend.csv")));
}

#[test]
fn selection_suite_records_the_chosen_sparsity() {
    let dir = tempfile::tempdir().unwrap();
    let out = sco(&["bench", "--suite", "selection-a3", "--scale", "0.2", "--seeds", "0..0", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_records(fs::File::open(dir.path().join("selection-a3.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 8 * 4);
    for r in &records {
        assert!(r.s_used >= 1 && r.s_used <= 2 * r.s_true, "{r:?}");
    }
    assert!(records.iter().any(|r| r.model == "logistic"));
}

fn record() -> impl Strategy<Value = BenchRecord> {
    let unit = 0.0f64..=1.0;
    (
        ("[a-z]{2,6}", "[a-z]{3,8}", 1usize..1000, 1usize..5000, 1usize..50, 0usize..100, any::<u64>()),
        (unit.clone(), unit.clone(), unit.clone(), unit, 0.0f64..1e3, -1e6f64..1e6),
    )
        .prop_map(|((solver, model, n, p, s_true, s_used, seed), (accuracy, recall, precision, f1, runtime_s, objective))| {
            BenchRecord { solver, model, n, p, s_true, s_used, seed, accuracy, recall, precision, f1, runtime_s, objective }
        })
}

proptest! {
    #[test]
    fn bench_csv_round_trips_exactly(records in proptest::collection::vec(record(), 0..20)) {
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        prop_assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    }
}
