#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn plref(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plref"))
        .args(args)
        .current_dir(dir)
        .env_remove("PLREF_MANIFEST")
        .env("NO_COLOR", "1")
        .stdin(Stdio::null())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn reader_project() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("reader.pl"), common::READER).unwrap();
    std::fs::write(
        dir.path().join("project.plm"),
        "[files]\nreader.pl\n[roots]\nmake_reader/3\nreader_next/3\nreader_done/1\n",
    )
    .unwrap();
    dir
}

fn assert_error_lines(o: &Output) {
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().filter(|l| !l.starts_with("note:")).collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with("error: "), "{err}");
}

#[test]
fn check_json_lists_suggestions() {
    let dir = reader_project();
    let o = plref(dir.path(), &["check", "-m", "project.plm", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let list = v.as_array().unwrap();
    assert!(!list.is_empty());
    for s in list {
        for key in ["id", "kind", "module", "target", "span", "explanation", "payload"] {
            assert!(s.get(key).is_some(), "missing {key} in {s}");
        }
        assert_eq!(s["id"].as_str().unwrap().len(), 12);
    }
    assert!(list.iter().any(|s| s["kind"] == "cut-replaceable"));
}

#[test]
fn analysis_commands_filter_by_kind() {
    let dir = reader_project();
    let o = plref(dir.path(), &["smells"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("cut-replaceable"));
    let o = plref(dir.path(), &["dup"]);
    assert_eq!(stdout(&o), "");
    let o = plref(dir.path(), &["dead", "--format", "json"]);
    assert_eq!(stdout(&o).trim(), "[]");
}

#[test]
fn dry_run_prints_diff_and_writes_nothing() {
    let dir = reader_project();
    let before = common::tree_hash(dir.path());
    let o = plref(dir.path(), &["cut2ite", "reader_code/3", "--dry-run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("--- a/reader.pl\n+++ b/reader.pl\n"), "{out}");
    assert!(out.contains("-reader_code(end_of_file,_,end_of_file) :- ! ."));
    assert!(out.contains("+        ( Term = end_of_file,"));
    assert_eq!(common::tree_hash(dir.path()), before);
}

#[test]
fn yes_writes_and_non_tty_without_yes_exits_3() {
    let dir = reader_project();
    let before = common::tree_hash(dir.path());
    let o = plref(dir.path(), &["cut2ite", "reader_code/3"]);
    assert_eq!(o.status.code(), Some(3));
    assert_error_lines(&o);
    assert_eq!(common::tree_hash(dir.path()), before);
    let o = plref(dir.path(), &["cut2ite", "reader_code/3", "--yes"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("reader.pl")).unwrap();
    assert!(!text.contains('!'));
}

#[test]
fn rename_qualified_predicate_updates_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = format!(":- module(m, [make_reader/3, reader_next/3, reader_done/1]).\n\n{}", common::READER);
    std::fs::write(dir.path().join("m.pl"), m).unwrap();
    std::fs::write(dir.path().join("main.pl"), ":- use_module(m).\n\nstart(F, S) :- make_reader(F, _, S).\n").unwrap();
    std::fs::write(dir.path().join("project.plm"), "[files]\nmain.pl\nm.pl\n[roots]\nstart/2\n").unwrap();
    let o = plref(dir.path(), &["rename-pred", "m:make_reader/3", "reader_init", "--yes"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let main = std::fs::read_to_string(dir.path().join("main.pl")).unwrap();
    let m = std::fs::read_to_string(dir.path().join("m.pl")).unwrap();
    assert!(main.contains("reader_init(F, _, S)"));
    assert!(m.contains("module(m, [reader_init/3,"));
    assert!(m.contains("reader_init(File,Stream,State) :-"));
    assert!(!m.contains("make_reader"));
}

#[test]
fn exit_codes_for_usage_and_refactoring_errors() {
    let dir = reader_project();
    let o = plref(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_error_lines(&o);
    let o = plref(dir.path(), &["reorder", "reader_next/3", "x,y"]);
    assert_eq!(o.status.code(), Some(2));
    assert_error_lines(&o);
    let o = plref(dir.path(), &["rename-pred", "nosuch/9", "x", "--yes"]);
    assert_eq!(o.status.code(), Some(1));
    assert_error_lines(&o);
    let o = plref(dir.path(), &["reorder", "reader_next/3", "1,1,2", "--yes"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: NotAPermutation"));
    let o = plref(dir.path(), &["check", "-m", "missing.plm"]);
    assert_eq!(o.status.code(), Some(1));
    assert_error_lines(&o);
}

#[test]
fn held_lock_is_a_conflict() {
    let dir = reader_project();
    std::fs::write(dir.path().join(plref_core::edit::LOCK_FILE), "").unwrap();
    let o = plref(dir.path(), &["cut2ite", "reader_code/3", "--yes"]);
    assert_eq!(o.status.code(), Some(3));
    assert_error_lines(&o);
}

#[test]
fn semantics_change_needs_explicit_acceptance() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("guard.pl"), common::GUARD_SRC).unwrap();
    std::fs::write(dir.path().join("project.plm"), "[files]\nguard.pl\n[roots]\nanswer/2\n").unwrap();
    let start = common::GUARD_SRC.find(common::GUARD_NEEDLE).unwrap();
    let at = format!("guard.pl:{start}..{}", start + common::GUARD_NEEDLE.len());
    let before = common::tree_hash(dir.path());
    let o = plref(dir.path(), &["unif2test", &at, "--yes"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error: SemanticsChangeNotAccepted"));
    assert_eq!(common::tree_hash(dir.path()), before);
    let o = plref(dir.path(), &["unif2test", "guard.pl:2:9-2:16", "--yes", "--accept-semantics-change"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("guard.pl")).unwrap();
    assert!(text.contains("X == yes"));
}

#[test]
fn manifest_from_environment() {
    let dir = reader_project();
    std::fs::rename(dir.path().join("project.plm"), dir.path().join("other.plm")).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_plref"))
        .arg("far")
        .current_dir(dir.path())
        .env("PLREF_MANIFEST", "other.plm")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn json_preview_and_oracle_run() {
    let dir = reader_project();
    let o = plref(dir.path(), &["--format", "json", "cut2ite", "reader_code/3", "--dry-run"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["transform"], "replace_cut_by_ite");
    assert_eq!(v["semantics_flag"], "preserving");
    let o = plref(dir.path(), &["oracle", "run", "reader_done(X)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "?- reader_done(X).\nX = end_of_file\n(no more answers)\n");
}

#[test]
fn apply_suggestion_by_id() {
    let dir = reader_project();
    let o = plref(dir.path(), &["smells", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let id = v
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["kind"] == "cut-replaceable")
        .unwrap()["id"]
        .as_str()
        .unwrap()
        .to_string();
    let o = plref(dir.path(), &["apply", &id, "--yes"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = plref(dir.path(), &["apply", &id, "--yes"]);
    assert_eq!(o.status.code(), Some(3));
}
