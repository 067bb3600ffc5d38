use std::fs;
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_roughstat");

fn write_config(dir: &tempfile::TempDir, text: &str) -> std::path::PathBuf {
    let path = dir.path().join("experiment.cfg");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "# example limit set on a shorter prefix\nspace = max_rplus\nsequence = example_2_1\nmode = limit_set\nr = 1\nn = 20000\n",
    );
    let out = dir.path().join("out");
    let status = Command::new(BIN)
        .args([
            "run",
            cfg.to_str().unwrap(),
            "--format",
            "both",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(
        report["results"]["intervals"],
        serde_json::json!([[1.0, 5.0]])
    );
    assert_eq!(report["config"]["n"], 20000);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("candidate,verdict,worst_eps,worst_density_num,worst_density_den\n"));
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn config_errors_exit_3_and_list_every_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "space = max_rplus\nsequence = example_2_1\nmode = limit_set\nstep = 0\nwidth = 3\nschedule = 1, 1, 0.5\n",
    );
    let out = Command::new(BIN)
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("line 4: step: grid step must be positive"),
        "{err}"
    );
    assert!(err.contains("line 5: unknown key `width`"), "{err}");
    assert!(
        err.contains("line 6: schedule: schedule must be strictly decreasing"),
        "{err}"
    );
}

#[test]
fn missing_file_and_bad_arguments_exit_3() {
    let out = Command::new(BIN)
        .args(["run", "/nonexistent/x.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(BIN)
        .args(["suite", "--tau", "1/2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(BIN).args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn engine_errors_emit_nothing() {
    let dir = tempfile::tempdir().unwrap();
    // negative candidates lie outside the max space
    let cfg = write_config(
        &dir,
        "space = max_rplus\nsequence = linear\nmode = limit_set\ngrid_lo = -1\ngrid_hi = 1\n",
    );
    let out = Command::new(BIN)
        .args(["run", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn check_axioms_reports_clean_spaces() {
    let out = Command::new(BIN)
        .args(["check-axioms", "shifted_euclidean", "--a", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["holds"], true);
    assert_eq!(body["report"]["checked_triples"], 1728);
    let out = Command::new(BIN)
        .args(["check-axioms", "max_rplus", "--samples", "5"])
        .output()
        .unwrap();
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(body["report"]["checked_triples"], 125);
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(BIN)
            .env("ROUGHSTAT_THREADS", threads)
            .args(["suite", "--n", "5000"])
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("zero").status.code(), Some(3));
}
