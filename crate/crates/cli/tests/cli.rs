use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coherence-proj"));
    c.env_remove("COHERENCE_PROJ_LOG");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_config(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("--config").arg(config).arg("--out").arg(out).args(extra).output().expect("spawn binary")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn toy_negative_log_projection_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config(&configs().join("toy_negative_log.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["passed"], true);
    let sol = r["result"]["solution"].as_array().unwrap();
    // harmonic mean of 0.1 and 0.8
    let h = 2.0 / (1.0 / 0.1 + 1.0 / 0.8);
    for x in 0..2 {
        assert!((sol[x][0].as_f64().unwrap() - h).abs() < 1e-7);
    }
    assert!((sol[0][0].as_f64().unwrap() - 0.17778).abs() < 5e-6);
    assert!((sol[2][0].as_f64().unwrap() - 0.40).abs() < 1e-7);
    let csv = std::fs::read_to_string(tmp.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("prompt,outcome_0"));
    assert!(tmp.path().join("metadata.json").exists());
    assert!(tmp.path().join("summary.txt").exists());
}

#[test]
fn minimax_m10_reports_gap_and_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config(&configs().join("minimax_m10.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(tmp.path());
    let mm = &r["result"]["minimax"][0];
    assert_eq!(mm["M"], 10.0);
    assert!((mm["gap"].as_f64().unwrap() - 0.625).abs() < 1e-12);
    assert_eq!(mm["verdict"], "violation reproduced");
    let mut rdr = csv::Reader::from_path(tmp.path().join("minimax_sweep.csv")).unwrap();
    let rec = rdr.records().next().unwrap().unwrap();
    assert_eq!(&rec[1], "6.2500000000000000e-1");
}

#[test]
fn malformed_config_exits_3_with_schema_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", r#"{"version": 1, "task": "project", "set": {"caps": [[0, 0, "x"]]}}"#);
    let o = run_config(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("set.caps[0][2]"), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), "v2.json", r#"{"version": 2, "task": "project"}"#);
    let o = run_config(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`version`"));

    let cfg = write_config(tmp.path(), "trunc.json", r#"{"version": 1, "task": "#);
    assert_eq!(run_config(&cfg, &tmp.path().join("out"), &[]).status.code(), Some(3));

    let o = run_config(&tmp.path().join("missing.json"), &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_3_and_help_exits_0() {
    assert_eq!(bin().arg("--bogus").output().unwrap().status.code(), Some(3));
    assert_eq!(bin().output().unwrap().status.code(), Some(3));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["--suite", "no-such-suite", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unknown suite"));
}

#[test]
fn same_config_and_seed_give_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "di.json",
        r#"{"version": 1, "task": "verify", "seed": 11, "verify": {"suite": "direct-improvement", "instances": 6}}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run_config(&cfg, &a, &["--jobs", "1"]).status.code(), Some(0));
    assert_eq!(run_config(&cfg, &b, &["--jobs", "3"]).status.code(), Some(0));
    let ra = std::fs::read(a.join("report.json")).unwrap();
    let rb = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(report(&a)["seed"], 11);

    let c = tmp.path().join("c");
    run_config(&cfg, &c, &["--seed", "12"]);
    assert_ne!(std::fs::read(c.join("report.json")).unwrap(), ra);
}

#[test]
fn relaxed_task_supports_both_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("relaxed_swap.json");
    let o = run_config(&cfg, &tmp.path().join("cap"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&tmp.path().join("cap"));
    assert_eq!(r["result"]["form"], "constrained");
    assert!(r["result"]["constraint_value"].as_f64().unwrap() <= 0.01 + 1e-9);

    let o = run_config(&cfg, &tmp.path().join("pen"), &["--penalty", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&tmp.path().join("pen"));
    assert_eq!(r["result"]["form"], "penalized");
    assert_eq!(r["result"]["multiplier"], 3.0);

    let o = run_config(&cfg, &tmp.path().join("both"), &["--penalty", "3", "--lambda-cap", "0.1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn two_step_and_empirical_tasks_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config(&configs().join("two_step_swap.json"), &tmp.path().join("ts"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&tmp.path().join("ts"));
    assert!(r["result"]["equivalence_residual"].as_f64().unwrap() < 1e-7);
    assert!(r["result"]["improvement"].as_f64().unwrap() > 0.0);
    assert!(tmp.path().join("ts/intermediate.csv").exists());

    let o = run_config(&configs().join("empirical_swap.json"), &tmp.path().join("em"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&tmp.path().join("em"));
    assert_eq!(r["result"]["bounds"]["m"], 200);
}

#[test]
fn reference_outside_the_coherent_set_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ref.json",
        r#"{"version": 1, "task": "project", "generator": {"kind": "squared_euclidean"}, "phi": [1, 0],
            "baseline": [[0.1, 0.9], [0.8, 0.2]], "reference": [[0.1, 0.9], [0.8, 0.2]]}"#,
    );
    let o = run_config(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`reference`"));
}

#[test]
fn tolerance_override_changes_verdicts_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("minimax_m10.json");
    let o = run_config(&cfg, &tmp.path().join("loose"), &["--tol-override", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&tmp.path().join("loose"));
    for c in r["report"]["checks"].as_array().unwrap() {
        if c["relation"] != "flag" {
            assert_eq!(c["tolerance"], 0.5);
        }
    }
    // The solved gap does not depend on the verdict tolerance.
    assert!((r["result"]["minimax"][0]["gap"].as_f64().unwrap() - 0.625).abs() < 1e-12);
    let o = run_config(&cfg, &tmp.path().join("neg"), &["--tol-override", "-1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn failed_checks_exit_1() {
    // The weighted circle values quoted for the kernel example are not the
    // true minimizer, so the kernel suite reports two failures.
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().args(["--suite", "kernel", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let r = report(tmp.path());
    assert_eq!(r["failed_checks"], 2);
}
