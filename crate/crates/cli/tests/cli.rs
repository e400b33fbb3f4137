use std::fs::File;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tcm_cli::cache::{ClassNumberCache, HEADER};
use tcm_cli::output::{cell, parse_csv, OutputEnvelope};

fn tcm(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcm"))
        .args(args)
        .arg("--cache")
        .arg(cache)
        .env_remove("TCM_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str], cache: &Path) -> OutputEnvelope {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = tcm(&full, cache);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_code_zero_and_clean_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let env = json(
        &["phi", "--disc", "-4", "--n", "5"],
        &dir.path().join("c.csv"),
    );
    assert_eq!(env.command, "phi");
    assert_eq!(env.rows[0]["phi"], 16);
    assert_eq!(env.rows[0]["factorization"], "P5.0*P5.1");
    assert!(!env.meta.timestamp.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.csv");
    for args in [
        &["bound", "--d-min", "5", "--d-max", "3"][..],
        &["bound", "--d-min", "0", "--d-max", "3"],
        &["phi", "--disc", "-12", "--n", "5"],
        &["galois", "--disc", "-4", "--n", "1000"],
        &["analytics", "landau", "--disc", "-4", "--x", "50"],
        &["frobnicate"],
    ] {
        let out = tcm(args, &cache);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let out = tcm(&["galois", "--disc", "-4", "--n", "1000"], &cache);
    assert!(String::from_utf8_lossy(&out.stderr).contains("200"));
}

#[test]
fn bad_thread_count_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tcm"))
        .args(["phi", "--disc", "-4", "--n", "5", "--cache"])
        .arg(dir.path().join("c.csv"))
        .env("TCM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_tcm"))
        .args(["bound", "--d-min", "1", "--d-max", "20", "--cache"])
        .arg(dir.path().join("c.csv"))
        .env("TCM_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[cfg(target_os = "linux")]
#[test]
fn unwritable_stdout_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_tcm"))
        .args([
            "bound", "--d-min", "1", "--d-max", "50", "--format", "json", "--cache",
        ])
        .arg(dir.path().join("c.csv"))
        .stdout(File::create("/dev/full").unwrap())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn cache_lifecycle_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let built = json(&["cache", "--cap", "300"], &path);
    assert_eq!(built.rows[0]["status"], "built");
    assert_eq!(
        json(&["cache", "--cap", "300"], &path).rows[0]["status"],
        "loaded"
    );

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(HEADER));
    assert!(text.contains("\n-23,3,2\n"));
    std::fs::write(&path, text.replace("\n-23,3,2\n", "\n-23,4,2\n")).unwrap();
    for args in [
        &["cache"][..],
        &["analytics", "scan", "--disc", "-23", "--x", "100"],
    ] {
        let out = tcm(args, &path);
        assert_eq!(out.status.code(), Some(4), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("-23"));
    }

    std::fs::write(&path, "garbage\n").unwrap();
    let out = tcm(&["cache", "--cap", "100", "--format", "json"], &path);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt"));
    let text = std::fs::read_to_string(&path).unwrap();
    let rebuilt = ClassNumberCache::parse(&text).unwrap();
    assert_eq!(rebuilt, ClassNumberCache::build(100));
}

#[test]
fn json_round_trips_for_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.csv");
    for args in [
        &["bound", "--d-min", "1", "--d-max", "30"][..],
        &["phi", "--disc", "-7", "--n", "12"],
        &["galois", "--disc", "-4", "--p", "3", "--a", "1", "--b", "1"],
        &["galois", "--disc", "-7", "--p", "2", "--a", "0"],
        &["galois", "--disc", "-8", "--n", "10"],
        &["analytics", "mertens", "--x", "1000"],
        &["analytics", "product", "--disc", "-20", "--x", "1000"],
        &["analytics", "scan", "--disc", "-7", "--x", "500"],
        &["analytics", "landau", "--disc", "-7", "--x", "500"],
        &["audit", "--d", "2", "--disc", "-3", "--a", "1", "--b", "7"],
        &["refine", "--d", "1", "--disc-cap", "8"],
        &["cache", "--cap", "50"],
    ] {
        let env = json(args, &cache);
        let text = serde_json::to_string(&env).unwrap();
        let back: OutputEnvelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, env, "{args:?}");
        assert!(!env.rows.is_empty(), "{args:?}");
    }
}

#[test]
fn csv_agrees_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.csv");
    let args = ["bound", "--d-min", "1", "--d-max", "40"];
    let env = json(&args, &cache);
    let out = tcm(&[&args[..], &["--format", "csv"]].concat(), &cache);
    assert!(out.status.success());
    let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(
        header,
        ["d", "a", "b", "bound", "ratio", "running_constant"]
    );
    assert_eq!(rows.len(), env.rows.len());
    for (csv_row, json_row) in rows.iter().zip(&env.rows) {
        for (col, text) in header.iter().zip(csv_row) {
            let v = &json_row[col.as_str()];
            assert_eq!(text, &cell(v));
            if let Value::Number(n) = v {
                assert_eq!(text.parse::<f64>().unwrap(), n.as_f64().unwrap());
            }
        }
    }
}

#[test]
fn table_is_default_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = tcm(
        &["phi", "--disc", "-3", "--n", "7"],
        &dir.path().join("c.csv"),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().split_whitespace().any(|c| c == "phi"));
    assert!(lines.next().unwrap().split_whitespace().any(|c| c == "36"));
}
