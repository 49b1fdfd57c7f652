use std::process::{Command, Output};

use delone_core::pointset::{read_point_set, AnyPointSet};
use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delone-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn generate_square_lattice_window() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z2.json");
    let o = lab(&[
        "generate",
        "--set",
        "zn",
        "--n",
        "2",
        "--window",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["addresses"].as_array().unwrap().len(), 121);
    assert_eq!(doc["meta"]["config"]["seed"], 0);
    // the written document reads back as the same set
    let AnyPointSet::Exact(set) = read_point_set(&text).unwrap() else {
        panic!("exact set expected")
    };
    let again = lab(&["generate", "--input", path.to_str().unwrap()]);
    let AnyPointSet::Exact(back) =
        read_point_set(std::str::from_utf8(&again.stdout).unwrap()).unwrap()
    else {
        panic!("exact set expected")
    };
    assert_eq!(set, back);
}

#[test]
fn csv_has_config_header_and_tags() {
    let o = lab(&[
        "atlas",
        "--set",
        "fibonacci",
        "--T",
        "1.5,2.5",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    let cfg: Value = serde_json::from_str(head.strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(cfg["command"], "atlas");
    assert_eq!(
        lines.next().unwrap(),
        "T,n_lower,stabilized,half_side,flagged,tag"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.ends_with(",certified-bracket")));
}

#[test]
fn outputs_are_reproducible() {
    let args = [
        "wdist",
        "--set",
        "fibonacci",
        "--window",
        "400",
        "--U",
        "10,20",
        "--seed",
        "3",
        "--format",
        "csv",
    ];
    let a = lab(&args);
    let b = lab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout)
        .unwrap()
        .lines()
        .skip(2)
        .all(|l| l.ends_with(",sampled")));
}

#[test]
fn malformed_config_exits_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"t\": [1, 2,\n").unwrap();
    let o = lab(&["atlas", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    std::fs::write(&bad, r#"{"t": [1], "windwo": 3}"#).unwrap();
    let o = lab(&["atlas", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("windwo"));
    assert_eq!(
        lab(&["atlas", "--set", "nonsense", "--T", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(lab(&["nonsense"]).status.code(), Some(1));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "atlas", "generator": {"construction": "integer-lattice", "n": 1}, "t": [1.0], "window": 20}"#).unwrap();
    let v = stdout_json(&lab(&["atlas", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["result"][0]["n_lower"], 1);
    // flags override the file
    let v = stdout_json(&lab(&[
        "atlas",
        "--config",
        cfg.to_str().unwrap(),
        "--T",
        "2",
    ]));
    assert_eq!(v["config"]["t"][0], 2.0);
    assert_eq!(
        lab(&["repetitivity", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn float_import_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.json");
    std::fs::write(
        &dup,
        r#"{"dimension": 1, "points": [[0.0], [1e-9], [2.0]], "region": {"kind": "box", "intervals": [[-1, 3]]}, "tolerance": 1e-6}"#,
    )
    .unwrap();
    assert_eq!(
        lab(&["generate", "--input", dup.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let mismatch = dir.path().join("mismatch.json");
    std::fs::write(
        &mismatch,
        r#"{"dimension": 2, "points": [[0.0], [2.0]], "region": {"kind": "box", "intervals": [[-1, 3], [-1, 3]]}, "tolerance": 1e-6}"#,
    )
    .unwrap();
    assert_eq!(
        lab(&["generate", "--input", mismatch.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
    let ok = dir.path().join("ok.json");
    std::fs::write(&ok, r#"{"dimension": 1, "points": [[0.0], [2.0]], "region": {"kind": "box", "intervals": [[-1, 3]]}, "tolerance": 1e-6}"#)
        .unwrap();
    let v = stdout_json(&lab(&["generate", "--input", ok.to_str().unwrap()]));
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
}

#[test]
fn io_and_budget_exit_codes() {
    let o = lab(&[
        "generate",
        "--set",
        "zn",
        "--out",
        "/nonexistent-dir/x.json",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(
        lab(&["atlas", "--input", "/nonexistent-dir/x.json", "--T", "1"])
            .status
            .code(),
        Some(3)
    );
    // too few boxes of side U fit in the window
    let o = lab(&["wdist", "--set", "zn", "--window", "10", "--U", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_fibonacci_passes() {
    let o = lab(&["verify", "fibonacci", "--format", "json"]);
    let v = stdout_json(&o);
    assert_eq!(v["passed"], true);
    assert!(String::from_utf8_lossy(&o.stderr)
        .lines()
        .all(|l| l.starts_with("PASS ")));
}

#[test]
fn analyses_report_expected_values() {
    let v = stdout_json(&lab(&[
        "diffraction",
        "--set",
        "zn",
        "--T",
        "10",
        "--kmax",
        "1",
        "--pitch",
        "0.5",
    ]));
    let i: Vec<f64> = v["intensity"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((i[0] - 18.05).abs() < 1e-9 && (i[1] - 0.05).abs() < 1e-9);
    let v = stdout_json(&lab(&[
        "address", "--set", "zn", "--n", "2", "--window", "40",
    ]));
    assert_eq!(v["rank"], 2);
    assert_eq!(v["residuals_identically_zero"], true);
    let v = stdout_json(&lab(&["repetitivity", "--set", "zn", "--T", "2,4,8,16"]));
    assert_eq!(v["result"]["verdict"], "ideal-crystal-like");
    let v = stdout_json(&lab(&[
        "frequencies",
        "--set",
        "zn",
        "--T",
        "1",
        "--window",
        "10",
    ]));
    assert_eq!(v["result"][0]["classes"].as_array().unwrap().len(), 1);
}

#[test]
fn thread_cap_is_respected_and_validated() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_delone-lab"))
            .args(["atlas", "--set", "fibonacci", "--T", "3", "--format", "csv"])
            .env("DELONE_LAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("4");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run("zero").status.code(), Some(1));
}
