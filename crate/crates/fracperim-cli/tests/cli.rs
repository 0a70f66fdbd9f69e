//! End-to-end tests of the command-line interface: exit codes, file
//! formats, determinism across worker counts and sweep resumability.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracperim"))
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn compute_ball_exits_zero_with_vanishing_asymmetry() {
    let dir = tempfile::tempdir().unwrap();
    let shape = dir.path().join("ball.json");
    write(&shape, r#"{"kind":"ball","dim":2,"center":[0,0],"radius":1.0}"#);
    let out = bin()
        .args(["compute", "--shape"])
        .arg(&shape)
        .args(["--s", "0.5", "--budget", "50000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lambda0 = 0.000000"), "{text}");
}

#[test]
fn malformed_shape_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let shape = dir.path().join("bad.json");
    write(&shape, r#"{"kind":"ball","dim":2,"center":[0,0],"radius":1.0,"zzz":5}"#);
    let out = bin()
        .args(["compute", "--shape"])
        .arg(&shape)
        .args(["--s", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("error code="), "{err}");
}

#[test]
fn numerical_domain_error_is_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let shape = dir.path().join("ball.json");
    write(&shape, r#"{"kind":"ball","dim":2,"center":[0,0],"radius":1.0}"#);
    // s outside (0,1) surfaces as an invalid-parameter config error (2)
    let out = bin()
        .args(["compute", "--shape"])
        .arg(&shape)
        .args(["--s", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("code=INVALID_PARAMETER"), "{err}");
}

#[test]
fn separation_below_criterion_reports_reason_code() {
    let dir = tempfile::tempdir().unwrap();
    let shape = dir.path().join("tb.json");
    write(&shape, r#"{"kind":"two_ball","dim":2,"eps":0.05,"separation":10.5}"#);
    let out = bin()
        .args(["compute", "--shape"])
        .arg(&shape)
        .args(["--s", "0.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("SEPARATION_TOO_SMALL"), "{err}");
}

fn family_json() -> &'static str {
    r#"{"family":"ellipsoids","dim":2,"eccentricities":[0.1,0.3]}"#
}

#[test]
fn sweep_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    write(&fam, family_json());
    let out1 = dir.path().join("r1.csv");
    let out4 = dir.path().join("r4.csv");
    for (threads, out) in [("1", &out1), ("4", &out4)] {
        let st = bin()
            .args(["sweep", "--family"])
            .arg(&fam)
            .args(["--s", "0.5", "--budget", "40000", "--seed", "7", "--out"])
            .arg(out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(st.success());
    }
    let a = fs::read(&out1).unwrap();
    let b = fs::read(&out4).unwrap();
    assert_eq!(a, b, "results must not depend on the worker count");
    // manifests identical as well (no timestamps in deterministic outputs)
    let ma = fs::read(out1.with_extension("manifest.json")).unwrap();
    let mb = fs::read(out4.with_extension("manifest.json")).unwrap();
    assert_eq!(ma, mb);
}

#[test]
fn sweep_resume_reproduces_uninterrupted_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    write(&fam, r#"{"family":"ellipsoids","dim":2,"eccentricities":[0.1,0.2,0.3]}"#);
    let full = dir.path().join("full.csv");
    let st = bin()
        .args(["sweep", "--family"])
        .arg(&fam)
        .args(["--s", "0.4,0.6", "--budget", "30000", "--seed", "11", "--out"])
        .arg(&full)
        .status()
        .unwrap();
    assert!(st.success());
    let full_bytes = fs::read_to_string(&full).unwrap();

    // simulate an interruption: keep the header + first three rows plus a
    // torn partial line
    let lines: Vec<&str> = full_bytes.lines().collect();
    let mut partial = lines[..4].join("\n");
    partial.push('\n');
    partial.push_str(&lines[4][..lines[4].len() / 2]);
    let resumed = dir.path().join("resumed.csv");
    fs::write(&resumed, &partial).unwrap();
    let st = bin()
        .args(["sweep", "--family"])
        .arg(&fam)
        .args(["--s", "0.4,0.6", "--budget", "30000", "--seed", "11", "--out"])
        .arg(&resumed)
        .args(["--resume"])
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(fs::read_to_string(&resumed).unwrap(), full_bytes);
}

#[test]
fn verify_limits_suite_passes() {
    let out = bin()
        .args(["verify", "--suite", "limits", "--budget", "2000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("limit_s_to_zero_interval"), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 4);
}

#[test]
fn verify_counterexample_expected_failure_gives_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = bin()
        .args(["verify", "--suite", "counterexample", "--budget", "30000", "--out"])
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("(expected failure)"), "{text}");
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let spread = saved
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"].as_str().unwrap().contains("ratio_spread"))
        .unwrap();
    assert_eq!(spread["expected_failure"], true);
    assert_eq!(spread["passed"], false);
    assert_eq!(spread["ok"], true);
}

#[test]
fn verify_unexpected_pass_of_counterexample_is_exit_one() {
    // with an absurd spread cap the boundedness check passes on the
    // two-ball family, which the suite treats as a failure of expectations
    let out = bin()
        .args([
            "verify",
            "--suite",
            "counterexample",
            "--budget",
            "30000",
            "--spread-cap",
            "1e9",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn report_summarizes_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    write(
        &fam,
        r#"{"family":"ellipsoids","dim":2,"eccentricities":[0.1,0.15,0.2,0.25,0.3]}"#,
    );
    let results = dir.path().join("res.csv");
    let st = bin()
        .args(["sweep", "--family"])
        .arg(&fam)
        .args(["--s", "0.5", "--budget", "150000", "--seed", "3", "--out"])
        .arg(&results)
        .status()
        .unwrap();
    assert!(st.success());
    let summary = dir.path().join("summary.json");
    let out = bin()
        .args(["report", "--results"])
        .arg(&results)
        .args(["--out"])
        .arg(&summary)
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(parsed["rows"], 5);
    let slope = parsed["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn radial_shape_compute_works() {
    let dir = tempfile::tempdir().unwrap();
    let shape = dir.path().join("radial.json");
    write(
        &shape,
        r#"{"kind":"radial","dim":2,"grid":{"resolution":256},"u":{"harmonic":[[3,0.05]]}}"#,
    );
    let out = bin()
        .args(["compute", "--shape"])
        .arg(&shape)
        .args(["--s", "0.5", "--budget", "60000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
}
