//! Harness-level contracts: the environment-variable seed fallback, the
//! JSON output mode, and deterministic fixture emission.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_osplab"))
}

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("osplab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn env_seed_matches_the_flag() {
    let dir = temp_dir("seed");
    let flag = dir.join("flag.csv");
    let env = dir.join("env.csv");
    let status = bin()
        .args(["pubproj", "--n", "12", "--c", "3", "--trials", "2000", "--seed", "77", "--out"])
        .arg(&flag)
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args(["pubproj", "--n", "12", "--c", "3", "--trials", "2000", "--out"])
        .arg(&env)
        .env("OSPLAB_SEED", "77")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&flag).unwrap(), std::fs::read(&env).unwrap());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_mode_mirrors_the_csv_columns() {
    let output = bin()
        .args([
            "pubproj", "--n", "10", "--c", "4", "--trials", "1000", "--seed", "7", "--json",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["n"], 10);
    assert_eq!(row["c"], 4);
    assert_eq!(row["rule"], "uniform");
    assert!(row["mean_tau"].is_f64() || row["mean_tau"].is_i64());
    assert!(row["prob_tau_below_exact"].as_f64().unwrap() > 0.0);
}

#[test]
fn fixtures_are_byte_identical_across_runs() {
    let a = temp_dir("fx-a");
    let b = temp_dir("fx-b");
    for dir in [&a, &b] {
        let status = bin().args(["fixtures", "--dir"]).arg(dir).status().unwrap();
        assert!(status.success());
    }
    let mut names: Vec<_> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 12, "expected the full fixture set, got {names:?}");
    for name in names {
        let left = std::fs::read(a.join(&name)).unwrap();
        let right = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(left, right, "{name:?} differs across runs");
    }
    std::fs::remove_dir_all(&a).ok();
    std::fs::remove_dir_all(&b).ok();
}

#[test]
fn malformed_files_exit_with_usage_code() {
    let dir = temp_dir("bad");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let status = bin()
        .args(["check", "--mechanism"])
        .arg(&bad)
        .args(["--valuations"])
        .arg(&bad)
        .args(["--signalling"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}
