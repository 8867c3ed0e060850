use std::path::Path;
use std::process::{Command, Output};

use ace_core::eval::EpisodeTrace;

fn ace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ace")).args(args).output().expect("binary runs")
}

fn normalized(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    EpisodeTrace::from_jsonl(&text).unwrap().scrubbed().to_jsonl()
}

#[test]
fn run_golden_task_succeeds() {
    let out = ace(&["run", "--task", "widget/volume_set", "--backend", "scripted:golden"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = EpisodeTrace::from_jsonl(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(trace.outcome.success);
}

#[test]
fn ablated_lesioned_run_fails_with_code_one() {
    let out = ace(&["run", "--task", "widget/volume_set", "--backend", "scripted:lesioned", "--ablate=no_critic"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_actions_echoes_canonical_form() {
    let out = ace(&["parse-actions", "click(200, 220)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "click(200, 220)\n");
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = ace(&["run", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(out.stdout.is_empty());
}

#[test]
fn identical_runs_write_identical_traces() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = ace(&[
            "run",
            "--task",
            "filemani/archive_report",
            "--backend",
            "scripted:lesioned",
            "--seed",
            "7",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let file = |d: &tempfile::TempDir| d.path().join("filemani/archive_report.jsonl");
    assert_eq!(normalized(&file(&dirs[0])), normalized(&file(&dirs[1])));
}

#[test]
fn suite_report_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    let out = ace(&["suite", "--backend", "scripted:lesioned", "--ablate", "no_planner", "--jobs", "3", "--out", root]);
    assert_eq!(out.status.code(), Some(1), "no_planner tasks fail");
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("Configuration | Design"), "{table}");
    assert_eq!(std::fs::read_to_string(dir.path().join("report.txt")).unwrap(), table);

    let out = ace(&["report", root]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), table);

    let trace = dir.path().join("full/design/paint_square.jsonl");
    let out = ace(&["replay", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
