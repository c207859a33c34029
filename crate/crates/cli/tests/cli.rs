use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auditlab"))
        .args(args)
        .env_remove("AUDITLAB_THREADS")
        .output()
        .unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_field(out: &Output, column: &str) -> String {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let pos = header.iter().position(|h| *h == column).unwrap();
    let row = lines.next().unwrap();
    row.split(',').nth(pos).unwrap().to_string()
}

#[test]
fn index_of_shipped_fixtures() {
    let cases = [
        ("da", "cycle_n3.json", 3),
        ("spa", "bids_5_2_3.json", 3),
        ("veto", "votes_101.json", 1),
        ("fixture:swap:n=4", "swap_n4.json", 3),
    ];
    for (mech, file, expected) in cases {
        let v = json(&["index", "--mechanism", mech, "--problem", &fixture(file)]);
        assert_eq!(v["index"], expected, "{mech} on {file}");
        assert_eq!(v["mechanism"], mech);
        assert!(v["problem_hash"].as_str().unwrap().len() == 16);
    }
}

#[test]
fn worst_case_csv() {
    let out = run(&["worst-case", "--mechanism", "ia", "--n", "3"]);
    assert!(out.status.success());
    assert_eq!(csv_field(&out, "worst_index"), "2");
    assert_eq!(csv_field(&out, "problems_evaluated"), "46656");
    assert_eq!(csv_field(&out, "lower_bound"), "false");
    let out = run(&["worst-case", "--mechanism", "majority:x=1", "--n", "5"]);
    assert_eq!(csv_field(&out, "worst_index"), "3");
}

#[test]
fn partial_sweep_is_flagged() {
    let out = run(&[
        "worst-case",
        "--mechanism",
        "da",
        "--n",
        "3",
        "--max-problems",
        "100",
    ]);
    assert!(out.status.success());
    assert_eq!(csv_field(&out, "lower_bound"), "true");
    assert_eq!(csv_field(&out, "problems_evaluated"), "100");
}

#[test]
fn detect_and_smallest_group() {
    let p = fixture("cycle_n3.json");
    let dev = format!("@{}", fixture("cycle_n3.deviation.json"));
    let v = json(&[
        "detect",
        "--mechanism",
        "da",
        "--problem",
        &p,
        "--deviation",
        &dev,
        "--group",
        "0,1",
    ]);
    assert_eq!(v["detects"], false);
    let v = json(&[
        "detect",
        "--mechanism",
        "da",
        "--problem",
        &p,
        "--deviation",
        &dev,
    ]);
    assert_eq!(v["min_size"], 3);
}

#[test]
fn characterize_predicates() {
    let v = json(&["characterize", "vice", "--structure", "fixture:swap:n=4"]);
    assert_eq!(v["is_vice"], false);
    assert!(v["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|x| x["condition"] == 3));
    let v = json(&[
        "characterize",
        "dual-dict",
        "--mechanism",
        "fpa",
        "--n",
        "3",
        "--k",
        "5",
    ]);
    assert!(v["dual_dictatorship"].is_null());
    let v = json(&[
        "characterize",
        "index-two",
        "--mechanism",
        "da-rep:ia",
        "--n",
        "3",
    ]);
    assert_eq!(v["oracle_disagreements"], 0);
    assert_eq!(v["path_disagreements"], 0);
    let v = json(&[
        "characterize",
        "full-range",
        "--mechanism",
        "serial:order=0,1,2",
        "--n",
        "3",
    ]);
    assert_eq!(v["full_range"], true);
    let v = json(&["characterize", "majority-min", "--n", "3"]);
    assert_eq!(v["holds"], true);
    let v = json(&[
        "characterize",
        "compat-reserves",
        "--n",
        "4",
        "--q",
        "3",
        "--r",
        "1",
    ]);
    assert_eq!(v["unique_everywhere"], true);
}

#[test]
fn sample_audit_probabilities() {
    let p = fixture("cycle_n3.json");
    let dev = format!("@{}", fixture("cycle_n3.deviation.json"));
    let base = [
        "sample-audit",
        "--mechanism",
        "da",
        "--problem",
        &p,
        "--deviation",
        &dev,
        "--seed",
        "7",
    ];
    let v = json(&[&base[..], &["--m", "2"]].concat());
    assert_eq!(v["exact"], 0.0);
    assert_eq!(v["empirical"], 0.0);
    let v = json(&[&base[..], &["--m", "3", "--trials", "50"]].concat());
    assert_eq!(
        (v["exact"].as_f64(), v["empirical"].as_f64()),
        (Some(1.0), Some(1.0))
    );
    assert_eq!(
        run(&[&base[..], &["--m", "4"]].concat()).status.code(),
        Some(2)
    );
}

#[test]
fn enumerate_stable_on_the_cycle() {
    let v = json(&["enumerate-stable", "--problem", &fixture("cycle_n3.json")]);
    assert_eq!(v["count"], 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let bad = bad.to_string_lossy().into_owned();
    assert_eq!(
        run(&["index", "--mechanism", "da", "--problem", &bad])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["characterize", "no-such-predicate"]).status.code(),
        Some(2)
    );
    let p = fixture("cycle_n3.json");
    assert_eq!(
        run(&["index", "--mechanism", "ar:e=0", "--problem", &p])
            .status
            .code(),
        Some(3)
    );
    let out = run(&[
        "index",
        "--mechanism",
        "da",
        "--problem",
        &p,
        "--max-counterparts",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = [
        "worst-case",
        "--mechanism",
        "ar:e=2",
        "--n",
        "3",
        "--scope",
        "sample",
        "--samples",
        "200",
        "--seed",
        "3",
        "--no-timing",
        "--format",
        "json",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_auditlab"))
        .args(args)
        .env("AUDITLAB_THREADS", "1")
        .output()
        .unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_auditlab"))
        .args(args)
        .env("AUDITLAB_THREADS", "3")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn report_names_the_failing_row_of_a_broken_table() {
    let dir = tempfile::tempdir().unwrap();
    let sub = format!("majority:x=1={}", fixture("tables/broken_majority_n3.json"));
    let out = run(&[
        "report",
        "--dir",
        dir.path().to_str().unwrap(),
        "--only",
        "11",
        "--substitute",
        &sub,
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(
        csv.lines().any(|l| l.starts_with("11,voting indices,FAIL")),
        "{csv}"
    );
    let row: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("row-11.json")).unwrap())
            .unwrap();
    assert_eq!(row["status"], "fail");
    assert!(row.get("wall_ms").is_none());
}

#[test]
fn report_with_small_n_runs_a_subset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "report",
        "--dir",
        dir.path().to_str().unwrap(),
        "--n",
        "3",
        "--only",
        "1,2,3",
        "--no-timing",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("1,immediate acceptance worst case is 2,PASS"));
    assert!(csv.contains("2,deferred acceptance worst case is n,SKIP"));
}
