//! Command-line behavior, driven both in-process through `cli::run` and
//! through the built binary.

use std::io::Cursor;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use subset_sketch::cli::{self, EXIT_CLAIM_FAILURE, EXIT_INPUT_ERROR, EXIT_OK};

struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str], stdin: &str) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("subset-sketch").chain(args.iter().copied());
    let code = cli::run(argv, &mut Cursor::new(stdin.as_bytes()), &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn priority_sample_has_k_entries() {
    let o = run(&["sample", "--method", "priority", "--k", "2", "--seed", "3", "--format", "csv"], "4\n3\n2\n1\n");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let sketch = json(&o.stdout);
    assert_eq!(sketch["method"], "priority");
    assert_eq!(sketch["samples"].as_array().unwrap().len(), 2);
    assert!(o.stderr.starts_with("n=4 W=10 samples=2 tau="), "{}", o.stderr);
}

#[test]
fn threshold_summary_reports_expected_count() {
    let o = run(&["sample", "--method", "threshold", "--k", "2"], "1\n2\n3\n4\n");
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stderr.contains("tau=0.2 expected=2\n"), "{}", o.stderr);
    assert_eq!(json(&o.stdout)["tau"], 0.2);
}

#[test]
fn input_errors_exit_with_two() {
    let empty = run(&["sample", "--method", "priority", "--k", "2"], "");
    assert_eq!(empty.code, EXIT_INPUT_ERROR);
    assert!(empty.stdout.is_empty());

    let bad = run(&["sample", "--method", "priority", "--k", "2"], "1\n2\nthree\n");
    assert_eq!(bad.code, EXIT_INPUT_ERROR);
    assert!(bad.stderr.contains("line 3"), "{}", bad.stderr);

    let zero_k = run(&["sample", "--method", "priority", "--k", "0"], "1\n");
    assert_eq!(zero_k.code, EXIT_INPUT_ERROR);

    let unknown = run(&["sample", "--method", "reservoir", "--k", "2"], "1\n");
    assert_eq!(unknown.code, EXIT_INPUT_ERROR);
}

#[test]
fn estimate_queries() {
    let dir = tempfile::tempdir().unwrap();
    let sketch = dir.path().join("s.json");
    let s = sketch.to_str().unwrap();
    let o = run(&["sample", "--method", "priority", "--k", "8", "--out", s], "4\n3\n2\n1\n");
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.is_empty());

    let all = run(&["estimate", "--sketch", s, "--subset", "all"], "");
    assert_eq!(all.stdout, "{\"estimate\":10.0}\n");
    let none = run(&["estimate", "--sketch", s, "--subset", "list:17,99"], "");
    assert_eq!(json(&none.stdout)["estimate"], 0.0);
    let odd = run(&["estimate", "--sketch", s, "--subset", "mod:2:1"], "");
    assert_eq!(json(&odd.stdout)["estimate"], 4.0);
    let bad = run(&["estimate", "--sketch", s, "--subset", "mod:2:2"], "");
    assert_eq!(bad.code, EXIT_INPUT_ERROR);
}

#[test]
fn corrupted_sketch_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"method":"priority","k":2,"tau":0.5,"samples":[{"index":0,"weight":4.0,"rank":0.1,"what":5.0},{"index":1,"weight":3.0,"rank":0.2,"what":3.0}]}"#,
    )
    .unwrap();
    let o = run(&["estimate", "--sketch", path.to_str().unwrap()], "");
    assert_eq!(o.code, EXIT_INPUT_ERROR);
    assert!(o.stderr.contains("max(w, 1/tau)"), "{}", o.stderr);

    std::fs::write(&path, r#"{"method":"threshold","tau":0.2,"entries":[{"index":0,"weight":1.0,"p":0.3}]}"#).unwrap();
    let o = run(&["estimate", "--sketch", path.to_str().unwrap()], "");
    assert_eq!(o.code, EXIT_INPUT_ERROR);
    assert!(o.stderr.contains("min(1, w * tau)"), "{}", o.stderr);
}

#[test]
fn experiment_reports_and_exit_codes() {
    let args = ["experiment", "--generator", "geometric:12", "--k", "3", "--trials", "20000", "--seed", "4"];
    let o = run(&args, "");
    let report = json(&o.stdout);
    let fails = report["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["verdict"] == "fail")
        .count();
    let expected = if fails == 0 { EXIT_OK } else { EXIT_CLAIM_FAILURE };
    assert_eq!(o.code, expected);
    assert_eq!(report["report"]["failed"], fails);
    assert_eq!(report["config"]["k"], 3);
    // byte-identical on rerun
    assert_eq!(run(&args, "").stdout, o.stdout);

    let picked = run(
        &["experiment", "--generator", "uniform:20", "--k", "5", "--trials", "20000", "--claims", "claim2_mean_inv_tau"],
        "",
    );
    assert_eq!(picked.code, EXIT_OK);
    let checks = json(&picked.stdout)["report"]["checks"].as_array().unwrap().clone();
    assert_eq!(checks.len(), 1);
    // E[1/tau] = n/k = 4 for unit weights, and W/k = 4 too
    let emp = checks[0]["empirical"].as_f64().unwrap();
    assert!((emp - 4.0).abs() < 0.05, "{emp}");
}

#[test]
fn experiment_configuration_errors() {
    for args in [
        &["experiment", "--generator", "uniform:20", "--k", "5", "--trials", "1"][..],
        &["experiment", "--generator", "uniform:5", "--k", "5"],
        &["experiment", "--generator", "uniform:5", "--k", "1"],
        &["experiment", "--generator", "zipf:10:-1", "--k", "2"],
        &["experiment", "--k", "2"],
        &["experiment", "--generator", "uniform:20", "--k", "2", "--claims", "claim5"],
    ] {
        let o = run(args, "");
        assert_eq!(o.code, EXIT_INPUT_ERROR, "{args:?}: {}", o.stderr);
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn distinct_counts() {
    let five = "a\nb\nc\nd\ne\n";
    let o = run(&["distinct", "--k", "64"], five);
    assert_eq!(o.stdout, "{\"estimate\":5.0,\"exact_mode\":true}\n");

    let lines: String = (0..3000).map(|i| format!("line {i}\n")).collect();
    let once = run(&["distinct", "--k", "64"], &lines);
    let twice = run(&["distinct", "--k", "64"], &format!("{lines}{lines}"));
    assert_eq!(once.stdout, twice.stdout);
    assert_eq!(json(&once.stdout)["exact_mode"], false);

    assert_eq!(run(&["distinct", "--k", "1"], five).code, EXIT_INPUT_ERROR);
}

#[test]
fn distinct_accuracy_across_hash_seeds() {
    let lines: String = (0..10_000).map(|i| format!("{i}\n")).collect();
    let tolerance = 3.0 / 255f64.sqrt();
    let good = (0..200u64)
        .filter(|&seed| {
            let sketch = cli::cmd_distinct(&mut Cursor::new(lines.as_bytes()), 256, seed).unwrap();
            (sketch.estimate() / 10_000.0 - 1.0).abs() <= tolerance
        })
        .count();
    assert!(good >= 198, "{good} of 200 seeds within {tolerance}");
}

#[test]
fn binary_round_trip() {
    let exe = Path::new(env!("CARGO_BIN_EXE_subset-sketch"));
    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("w.jsonl");
    std::fs::write(&weights, "{\"index\":10,\"weight\":4}\n{\"index\":11,\"weight\":3}\n{\"index\":12,\"weight\":2}\n").unwrap();
    let sketch = dir.path().join("s.json");
    let status = Command::new(exe)
        .args(["sample", "--method", "priority", "--k", "3", "--seed", "1"])
        .arg("--input")
        .arg(&weights)
        .arg("--out")
        .arg(&sketch)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let first = std::fs::read(&sketch).unwrap();

    let out = Command::new(exe)
        .args(["estimate", "--subset", "range:10:11", "--sketch"])
        .arg(&sketch)
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "{\"estimate\":7.0}\n");

    // fixed seed and input give byte-identical files
    Command::new(exe)
        .args(["sample", "--method", "priority", "--k", "3", "--seed", "1"])
        .arg("--input")
        .arg(&weights)
        .arg("--out")
        .arg(&sketch)
        .output()
        .unwrap();
    assert_eq!(std::fs::read(&sketch).unwrap(), first);

    let missing = Command::new(exe)
        .args(["sample", "--method", "priority", "--k", "2", "--input"])
        .arg(dir.path().join("nope.csv"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}
