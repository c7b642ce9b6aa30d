//! Golden-output and exit-code tests for the `wba` binary.
//!
//! Set `WBA_BLESS=1` to rewrite the files under `tests/golden/`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn wba(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wba"))
        .args(args)
        .current_dir(crate_dir())
        .output()
        .expect("spawn wba")
}

fn golden_path(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(name)
}

/// Runs twice, checks the two outputs are byte-identical and match the
/// committed golden file.
fn check_golden(name: &str, args: &[&str]) {
    let first = wba(args);
    let second = wba(args);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert_eq!(first.stdout, second.stdout, "{args:?} is not deterministic");
    let path = golden_path(name);
    if std::env::var_os("WBA_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &first.stdout).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        first.stdout == expected,
        "{args:?} differs from {}:\n{}",
        path.display(),
        String::from_utf8_lossy(&first.stdout)
    );
}

#[test]
fn evaluate_golden() {
    check_golden(
        "evaluate_fig1b_partial.json",
        &["evaluate", "--confusion", "tests/fixtures/fig1b_confusion.csv", "--scheme", "partial-user(B=0.7)"],
    );
    check_golden(
        "evaluate_fig1b_partial.md",
        &[
            "evaluate",
            "--confusion",
            "tests/fixtures/fig1b_confusion.csv",
            "--scheme",
            "partial-user(B=0.7)",
            "--format",
            "markdown",
        ],
    );
    check_golden(
        "evaluate_identity_accuracy.csv",
        &["evaluate", "--confusion", "tests/fixtures/identity_confusion.csv", "--metrics", "accuracy", "--format", "csv"],
    );
    check_golden(
        "evaluate_predictions_default.json",
        &["evaluate", "--predictions", "tests/fixtures/fig1b_predictions.csv"],
    );
}

#[test]
fn evaluate_reports_expected_values() {
    let out = wba(&[
        "evaluate",
        "--confusion",
        "tests/fixtures/fig1b_confusion.csv",
        "--scheme",
        "partial-user(B=0.7)",
        "--format",
        "markdown",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("| fig1b_confusion | 0.650 | 0.386 | 0.284 |"), "{text}");

    let out = wba(&[
        "evaluate",
        "--confusion",
        "tests/fixtures/identity_confusion.csv",
        "--metrics",
        "accuracy",
        "--format",
        "markdown",
    ]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("| 1.000 |"));

    let out = wba(&["evaluate", "--predictions", "tests/fixtures/fig1b_predictions.csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"scheme\": \"rarity (default)\""), "{text}");
}

#[test]
fn compare_golden() {
    check_golden(
        "compare_flip.json",
        &[
            "compare",
            "--run",
            "majority=tests/fixtures/run_majority.csv",
            "--run",
            "minority=tests/fixtures/run_minority.csv",
            "--weights",
            "tests/fixtures/user_abc.json",
            "--metrics",
            "accuracy,wba",
        ],
    );
    check_golden(
        "compare_flip.md",
        &[
            "compare",
            "--run",
            "majority=tests/fixtures/run_majority.csv",
            "--run",
            "minority=tests/fixtures/run_minority.csv",
            "--weights",
            "tests/fixtures/user_abc.json",
            "--format",
            "markdown",
        ],
    );
    check_golden(
        "compare_identical.json",
        &[
            "compare",
            "--run",
            "first=tests/fixtures/fig1b_confusion.csv",
            "--run",
            "second=tests/fixtures/fig1b_predictions.csv",
        ],
    );
}

#[test]
fn identical_runs_tie_everywhere() {
    let out = wba(&[
        "compare",
        "--run",
        "first=tests/fixtures/fig1b_confusion.csv",
        "--run",
        "second=tests/fixtures/fig1b_confusion.csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for d in v["disagreements"].as_array().unwrap() {
        assert_eq!(d["agree"], true);
        assert!(d["discordant"].as_array().unwrap().is_empty());
    }
    for r in v["rankings"].as_array().unwrap() {
        assert_eq!(r["ties"], serde_json::json!([["first", "second"]]));
    }
}

#[test]
fn weights_golden() {
    check_golden(
        "weights_rarity_amazon.json",
        &["weights", "--scheme", "rarity", "--frequencies", "tests/fixtures/amazon_frequencies.json"],
    );
    check_golden("weights_user_uniform.json", &["weights", "--scheme", "user(A=0.25,B=0.25,C=0.25,D=0.25)"]);
    check_golden(
        "weights_composite_amazon.json",
        &[
            "weights",
            "--criteria",
            "tests/fixtures/amazon_rarity.json",
            "--criteria",
            "tests/fixtures/amazon_user.json",
        ],
    );
    check_golden(
        "weights_partial_labels.json",
        &["weights", "--weights", "tests/fixtures/partial_b.json", "--labels", "A,B,C"],
    );
}

#[test]
fn profile_golden() {
    check_golden("profile_small.json", &["profile", "--predictions", "tests/fixtures/predictions_small.csv"]);
    check_golden("profile_uniform.json", &["profile", "--predictions", "tests/fixtures/predictions_uniform.csv"]);
    check_golden("profile_two.json", &["profile", "--predictions", "tests/fixtures/predictions_two.csv"]);

    let v: serde_json::Value =
        serde_json::from_slice(&wba(&["profile", "--predictions", "tests/fixtures/predictions_small.csv"]).stdout)
            .unwrap();
    assert_eq!(v["items"], 4);
    assert_eq!(v["classes"], 3);
    assert!(v["skew"].is_f64());
    let v: serde_json::Value =
        serde_json::from_slice(&wba(&["profile", "--predictions", "tests/fixtures/predictions_uniform.csv"]).stdout)
            .unwrap();
    assert_eq!(v["infrequent_count"], 0);
    let out = wba(&["profile", "--predictions", "tests/fixtures/predictions_two.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["skew"].is_null());
    assert_eq!(v["notes"].as_array().unwrap().len(), 1);
}

fn code(args: &[&str]) -> i32 {
    wba(args).status.code().expect("exit code")
}

#[test]
fn exit_code_contract() {
    let fig = "tests/fixtures/fig1b_confusion.csv";
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["evaluate", "--confusion", fig]), 0);

    // usage and validation failures
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["evaluate"]), 2);
    assert_eq!(code(&["evaluate", "--predictions", fig, "--confusion", fig]), 2);
    assert_eq!(code(&["evaluate", "--confusion", fig, "--metrics", "auc"]), 2);
    assert_eq!(code(&["evaluate", "--confusion", fig, "--scheme", "user(A=1,B=1)"]), 2);
    assert_eq!(code(&["evaluate", "--confusion", fig, "--scheme", "rarity", "--weights", "x.json"]), 2);
    assert_eq!(code(&["evaluate", "--confusion", fig, "--scheme", "user(A=0.5,B=0.5)"]), 2);
    assert_eq!(code(&["evaluate", "--predictions", fig]), 2);
    assert_eq!(code(&["evaluate", "--confusion", "tests/fixtures/predictions_small.csv"]), 2);
    assert_eq!(code(&["compare", "--run", &format!("a={fig}")]), 2);
    assert_eq!(code(&["compare", "--run", &format!("a={fig}"), "--run", &format!("a={fig}")]), 2);
    assert_eq!(code(&["weights", "--scheme", "rarity", "--labels", "a,b"]), 2);
    assert_eq!(code(&["weights", "--criteria", "rarity"]), 2);
    assert_eq!(code(&["profile", "--predictions", "tests/fixtures/amazon_user.json"]), 2);

    // file system failures
    assert_eq!(code(&["evaluate", "--confusion", "tests/fixtures/missing.csv"]), 1);
    assert_eq!(code(&["compare", "--run", &format!("a={fig}"), "--run", "b=tests/fixtures/missing.csv"]), 1);
    assert_eq!(code(&["evaluate", "--confusion", fig, "--weights", "tests/fixtures/missing.json"]), 1);
    assert_eq!(code(&["evaluate", "--confusion", fig, "--output", "tests/fixtures/no/such/dir/out.json"]), 1);
    assert_eq!(code(&["profile", "--predictions", "tests/fixtures/missing.csv"]), 1);
}

#[test]
fn malformed_rows_are_reported_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "true,predicted\nA,\n").unwrap();
    let out = wba(&["evaluate", "--predictions", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.csv:2") && err.contains("row 2"), "{err}");
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = wba(&[
        "evaluate",
        "--confusion",
        "tests/fixtures/identity_confusion.csv",
        "--metrics",
        "accuracy",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "run,accuracy\nidentity_confusion,1\n");
}
