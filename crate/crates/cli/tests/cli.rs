//! The `plaidy` binary: exit codes, diagnostics, REPL round trips.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_plaidy");

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples")
}

fn plaidy(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn check(spec: &Path, script: &Path) -> Output {
    plaidy(&["check", spec.to_str().unwrap(), "--script", script.to_str().unwrap()])
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn dubins_checks_with_exit_zero() {
    let out = check(&examples().join("dubins.dl"), &examples().join("dubins.dlp"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout.trim(), "goal dubins: closed");
}

#[test]
fn truncated_script_leaves_goals_open() {
    let dir = tempfile::tempdir().unwrap();
    let full = std::fs::read_to_string(examples().join("dubins.dlp")).unwrap();
    let head: String = full.lines().take(12).map(|l| format!("{l}\n")).collect();
    let script = write(dir.path(), "partial.dlp", &head);
    let out = check(&examples().join("dubins.dl"), &script);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{stdout}");
    assert!(stdout.starts_with("goal dubins: open"), "{stdout}");
    assert!(stdout.lines().skip(1).all(|l| l.starts_with("  [")), "{stdout}");
}

#[test]
fn unknown_rule_is_a_located_error() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "bad.dlp", "tac flatten goal=0\n\nrule frobnicate goal=1\n");
    let out = check(&examples().join("dubins.dl"), &script);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr.starts_with(&format!("{}:3:", script.display())), "{stderr}");
}

#[test]
fn malformed_spec_is_a_located_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.dl", "var x;\ngoal g : |- x >;\n");
    let script = write(dir.path(), "empty.dlp", "");
    let out = check(&spec, &script);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr.starts_with(&format!("{}:2:", spec.display())), "{stderr}");
}

#[test]
fn failing_command_reports_its_index() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "g.dl", "var x;\ngoal g : |- x > 0 -> x > 0;\n");
    let script = write(dir.path(), "g.dlp", "rule impliesR goal=0\nrule andR goal=1\n");
    let out = check(&spec, &script);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout.contains("command 1 failed"), "{stdout}");
}

#[test]
fn missing_file_is_an_internal_error() {
    let out = plaidy(&["check", "/nonexistent/spec.dl", "--script", "/nonexistent/s.dlp"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn repl_saves_a_script_that_checks() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "g.dl", "var x, y;\ngoal g : |- x > 0 & y > 0 -> y > 0;\n");
    let saved = dir.path().join("g.dlp");
    let input = format!(
        "rule impliesR goal=0\nrule bogus\nrule andL goal=1 at=L:0\nrule axiom goal=2\nsave {}\nquit\n",
        saved.display()
    );
    let mut child = Command::new(BIN)
        .args(["repl", spec.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout.contains("error:"), "{stdout}");
    assert!(stdout.contains("all goals closed"), "{stdout}");
    let out = check(&spec, &saved);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn oracle_budget_must_be_numeric() {
    let out = Command::new(BIN).args(["oracle", "--fuzz", "1"]).env("PLAIDY_BUDGET_STAR", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PLAIDY_BUDGET_STAR"));
}

#[test]
fn oracle_reports_json() {
    let out = Command::new(BIN).args(["oracle", "--fuzz", "3", "--seed", "5"]).env("PLAIDY_BUDGET_STAR", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], true);
    assert_eq!(report["star_unroll"], 2);
    assert_eq!(report["round_trip"]["cases"], 3);
}
