//! End-to-end tests of the `trispirit` binary: exit codes, error messages
//! and the files each subcommand writes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn trispirit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trispirit")).args(args).output().expect("run trispirit")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn empty_workload_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = trispirit(&["simulate", "--n", "0", "--out", path_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = trispirit(&["simulate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = trispirit(&["simulate", "--variant", "teleport"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_threshold_names_the_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = trispirit(&["simulate", "--tau-r", "0.9", "--out", path_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("tau_r"), "{}", stderr(&out));
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn unreadable_config_and_unwritable_output_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let out = trispirit(&["simulate", "--config", path_arg(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.toml"));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = trispirit(&["simulate", "--n", "50", "--out", path_arg(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot create"), "{}", stderr(&out));
}

#[test]
fn report_reproduces_the_simulate_summary() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let rep = dir.path().join("rep");
    let out = trispirit(&["simulate", "--n", "300", "--variant", "ts-full", "--seed", "7", "--out", path_arg(&sim)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("# resolved config") && stdout.contains("summary: variant=ts-full"));

    let out = trispirit(&["report", "--input", path_arg(&sim.join("records.jsonl")), "--out", path_arg(&rep)]);
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["summary.csv", "summary.json"] {
        let a = fs::read_to_string(sim.join(name)).unwrap();
        let b = fs::read_to_string(rep.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between simulate and report");
    }
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n_tasks = 120\nformat = \"csv\"\n[thresholds]\ntau_r = 0.2\n").unwrap();
    let out_dir = dir.path().join("o");
    let out = trispirit(&["simulate", "--config", path_arg(&cfg), "--n", "80", "--out", path_arg(&out_dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n_tasks = 80"), "{stdout}");
    assert!(stdout.contains("tau_r = 0.2"), "{stdout}");
    assert!(out_dir.join("summary.csv").exists());
    assert!(!out_dir.join("summary.json").exists());
}

#[test]
fn sweep_and_gen_tasks_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = trispirit(&["sweep", "--n", "100", "--format", "csv", "--out", path_arg(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 50 + 50 + 100);

    let out = trispirit(&["gen-tasks", "--n", "25", "--out", path_arg(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let tsv = fs::read_to_string(dir.path().join("tasks.tsv")).unwrap();
    assert_eq!(tsv.lines().filter(|l| !l.starts_with('#')).count(), 25);
}
