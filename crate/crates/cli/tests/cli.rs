use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn symlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symlab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const SMALL: &str = r#"{
  "experiments": [
    {"kind": "verify-wishart", "n": 20, "d": 3, "trials": 2e4, "seed": 7},
    {"kind": "gap-linear", "group": {"symmetric": 3}, "rep": "natural_permutation", "n": 8, "trials": 3000, "seed": 3},
    {"kind": "gap-kernel", "group": {"cyclic": 3}, "rep": "natural_permutation", "kernel": {"type": "gaussian", "bandwidth": 1.5},
     "n": 10, "rho": 0.5, "trials": 100, "n_pairs": 2000, "seed": 4}
  ]
}"#;

#[test]
fn wishart_example_row_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = symlab(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("# symlab-csv v1\n"));
    let row = csv.lines().find(|l| l.starts_with("verify-wishart,")).unwrap();
    assert!(row.contains(",0.0625,"), "{row}");
    assert!(row.contains(",7,pass,"), "{row}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(json["verdict"], "pass");
    assert_eq!(json["experiments"].as_array().unwrap().len(), 3);
}

#[test]
fn same_config_and_seed_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(symlab(&["run", &cfg, "--out", a.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(symlab(&["run", &cfg, "--out", b.to_str().unwrap(), "--threads", "1"]).status.code(), Some(0));
    for file in ["results.csv", "results.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
}

#[test]
fn every_row_carries_hash_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    symlab(&["run", &cfg]);
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines().skip(1);
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let seed_col = header.iter().position(|c| *c == "seed").unwrap();
    let hash_col = header.iter().position(|c| *c == "config_hash").unwrap();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len());
        assert!(cells[seed_col].parse::<u64>().is_ok());
        assert_eq!(cells[hash_col].len(), 16);
    }
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiments": [{"kind": "verify-wishart", "n": 20, "d": 3, "trials": 2000}]}"#);
    let out = symlab(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn unknown_kind_and_bad_descriptors_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiments": [{"kind": "gap-cubic", "seed": 1}]}"#);
    assert_eq!(symlab(&["run", &cfg]).status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        r#"{"experiments": [{"kind": "gap-linear", "group": {"symmetric": 3}, "rep": "natural_permutation", "n": 3, "trials": 100, "seed": 1}]}"#,
    );
    let out = symlab(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("interpolation"));
}

#[test]
fn failing_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiments": [{"kind": "vc-bound", "group": {"symmetric": 3}, "reps": ["natural_permutation", {"trivial": 1}], "expected": 1.0, "seed": 1}]}"#,
    );
    assert_eq!(symlab(&["run", &cfg]).status.code(), Some(1));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.lines().last().unwrap().contains(",fail,"));
}

#[test]
fn overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = symlab(&["run", &cfg, "--set", "experiments.0.trials=3000", "--set", "experiments.0.seed=11"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("verify-wishart,")).unwrap();
    assert!(row.contains(",3000,") && row.contains(",11,pass,"), "{row}");
    let bad = symlab(&["run", &cfg, "--set", "experiments.9.trials=1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_two() {
    assert_eq!(symlab(&["suite", "medium"]).status.code(), Some(2));
}
