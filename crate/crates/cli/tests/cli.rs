use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coopbandit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.conf");
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = "\
algorithm = doe_bandit
k = 4
m = 3
t_horizon = 3000
means_source = synthetic(0.9, 0.4)
seed = 99
trials = 3
";

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bounds_prints_the_report_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "comm_bound",
            "group_regret_term1",
            "individual_regret_term1",
            "tau",
            "type2_term"
        ]
    );
}

#[test]
fn run_twice_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = run(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (fa, fb) = (dir_bytes(&a), dir_bytes(&b));
    assert_eq!(fa.len(), 4);
    assert_eq!(fa, fb);
    // Re-running into the same directory overwrites with the same bytes.
    run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(dir_bytes(&a), fb);
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out_dir = tmp.path().join("sweep");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--vary",
        "m",
        "--values",
        "5,10",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut subdirs: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    subdirs.sort();
    assert_eq!(subdirs, ["m=10", "m=5"]);
    for (name, m) in [("m=5", 5), ("m=10", 10)] {
        let summary: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(out_dir.join(name).join("summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(summary["config"]["m"], m);
        assert!(out_dir.join(name).join("trial_2.csv").exists());
        assert!(fs::read_to_string(out_dir.join(name).join("config.conf"))
            .unwrap()
            .contains(&format!("m = {m}")));
    }
}

#[test]
fn sweep_over_gap_rewrites_the_synthetic_source() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out_dir = tmp.path().join("gaps");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--vary",
        "gap",
        "--values",
        "0.5,0.25",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("gap=0.25/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["config"]["means_source"]["synthetic"]["gap"], 0.25);
}

fn assert_one_line_failure(out: &Output, needle: &str) {
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(
        err.trim_end().lines().count(),
        1,
        "diagnostic should be one line: {err:?}"
    );
    assert!(err.contains(needle), "{err:?} lacks {needle:?}");
}

#[test]
fn invalid_config_fails_with_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}beta = 1.0\n"));
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_one_line_failure(&out, "beta must exceed 1");
}

#[test]
fn missing_config_fails_with_one_line() {
    let out = run(&[
        "run",
        "--config",
        "/nonexistent/exp.conf",
        "--out",
        "/tmp/unused",
    ]);
    assert_one_line_failure(&out, "/nonexistent/exp.conf");
}

#[test]
fn gap_sweep_needs_synthetic_means() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("means.txt"), "0.2\n0.1\n0.3\n0.4\n").unwrap();
    let cfg = write_config(
        tmp.path(),
        &SMALL.replace("synthetic(0.9, 0.4)", "file(means.txt)"),
    );
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--vary",
        "gap",
        "--values",
        "0.1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_one_line_failure(&out, "synthetic");
}

#[test]
fn equal_means_have_no_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("flat.txt"), "0.5\n0.5\n0.5\n0.5\n").unwrap();
    let cfg = write_config(
        tmp.path(),
        &SMALL.replace("synthetic(0.9, 0.4)", "file(flat.txt)"),
    );
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
}
