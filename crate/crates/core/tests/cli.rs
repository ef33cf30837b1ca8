//! End-to-end runs of the `ifsynth` binary.

mod common;

use common::models_dir;
use ifsynth::bundled;
use ifsynth::igraph::{graph_from_json, graph_to_json, EdgeKind};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ifsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifsynth")).args(args).output().expect("binary runs")
}

fn model(name: &str) -> String {
    models_dir().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_tmp(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn function_names(file: &str) -> Vec<String> {
    let src = std::fs::read_to_string(models_dir().join(file)).unwrap();
    ifsynth::model::parse_library(&src).unwrap().functions.iter().map(|f| f.name.clone()).collect()
}

#[test]
fn shipped_model_files_match_the_generators() {
    for (name, src) in bundled::all() {
        let on_disk = std::fs::read_to_string(models_dir().join(&name)).unwrap();
        assert_eq!(on_disk, src, "{name} is stale");
    }
}

#[test]
fn build_prints_dot_and_a_summary() {
    let out = ifsynth(&["build", &model("intstack.gu")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert!(stderr(&out).contains("non_error_nodes=3"), "{}", stderr(&out));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let syntax = write_tmp(dir.path(), "syntax.gu", "module m:\n  var x : [0..\nendmodule\n");
    let semantic = write_tmp(
        dir.path(),
        "semantic.gu",
        "module m:\n  init: err = 0\n  error: err = 1\n  function f() {\n    true ==> y' = 1;\n  }\nendmodule\n",
    );
    let code = |args: &[&str]| ifsynth(args).status.code();
    assert_eq!(code(&["build", syntax.to_str().unwrap()]), Some(1));
    assert_eq!(code(&["build", semantic.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(7));
    assert_eq!(code(&["build", "/nonexistent/lib.gu"]), Some(7));
    assert_eq!(code(&["build", &model("intstack.gu"), "--functions", "peek"]), Some(7));
    assert_eq!(code(&["gen-tests", &model("intstack.gu"), "--depth", "0"]), Some(7));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn empty_interface_is_fine() {
    let out = ifsynth(&["build", &model("intstack.gu"), "--functions", "", "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let g = graph_from_json(&stdout(&out)).unwrap();
    assert!(g.edges.is_empty());
}

#[test]
fn check_client_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_tmp(dir.path(), "good.txt", "push\npush\npop\n");
    let bad = write_tmp(dir.path(), "bad.txt", "push\npop\npop\n");
    let unknown = write_tmp(dir.path(), "unknown.txt", "peek\n");
    let m = model("intstack.gu");
    let out = ifsynth(&["check-client", &m, good.to_str().unwrap()]);
    assert_eq!(stdout(&out).trim(), "LEGAL");
    let out = ifsynth(&["check-client", &m, bad.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "ILLEGAL at step 3");
    assert_eq!(ifsynth(&["check-client", &m, unknown.to_str().unwrap()]).status.code(), Some(7));
}

#[test]
fn gen_tests_lists_both_kinds() {
    let out = ifsynth(&["gen-tests", &model("intstack.gu"), "--depth", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.contains(&"ILLEGAL: pop"));
    assert!(lines.contains(&"LEGAL: push"));
    assert!(lines.contains(&"ILLEGAL: push push push"));
}

#[test]
fn verify_passes_on_a_built_graph_and_fails_on_a_corrupted_one() {
    let m = model("intstack.gu");
    let out = ifsynth(&["verify", &m, "--depth", "4"]);
    assert!(out.status.success(), "{}", stdout(&out));

    let built = ifsynth(&["build", &m, "--format", "json"]);
    let mut g = graph_from_json(&stdout(&built)).unwrap();
    let i = g.edges.iter().position(|e| e.kind == EdgeKind::Error).unwrap();
    g.edges.remove(i);
    let dir = tempfile::tempdir().unwrap();
    let path = write_tmp(dir.path(), "graph.json", &graph_to_json(&g));
    let out = ifsynth(&["verify", &m, "--depth", "4", "--graph", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(6));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!report["safe_violations"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_fibonacci() {
    let out = ifsynth(&["simulate", &model("fibonacci.gu"), "fib", "--set", "n=7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.split_whitespace().any(|kv| kv == "fib.res=13"), "{text}");
    let out = ifsynth(&["simulate", &model("fibonacci.gu"), "fib", "--set", "fib.n=99"]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn builds_are_deterministic() {
    for (name, _) in bundled::all() {
        let m = model(&name);
        let a = ifsynth(&["build", &m, "--format", "json"]);
        let b = ifsynth(&["build", &m, "--format", "json"]);
        assert!(a.status.success(), "{name}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{name}");
        let a = ifsynth(&["build", &m]);
        let b = ifsynth(&["build", &m]);
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn incremental_builds_match_one_phase_builds() {
    for (name, _) in bundled::all() {
        let m = model(&name);
        let fs = function_names(&name);
        let whole = ifsynth(&["build", &m, "--format", "json"]);
        for split in 0..fs.len() {
            let dir = tempfile::tempdir().unwrap();
            let state = dir.path().join("state.json");
            let state = state.to_str().unwrap();
            let first = fs[..split].join(",");
            let phase1 = ifsynth(&["build", &m, "--functions", &first, "--incremental", state]);
            assert!(phase1.status.success(), "{name}: {}", stderr(&phase1));
            let phase2 = ifsynth(&["build", &m, "--format", "json", "--incremental", state]);
            assert!(phase2.status.success(), "{name}: {}", stderr(&phase2));
            assert_eq!(phase2.stdout, whole.stdout, "{name} split after {split}");
        }
    }
}

#[test]
fn bitarray_clients_and_tests() {
    let dir = tempfile::tempdir().unwrap();
    let m = model("bitarray_k4.gu");
    let modify = write_tmp(dir.path(), "modify.txt", "modify\n");
    let empty = write_tmp(dir.path(), "empty.txt", "");
    assert_eq!(stdout(&ifsynth(&["check-client", &m, modify.to_str().unwrap()])).trim(), "ILLEGAL at step 1");
    assert_eq!(stdout(&ifsynth(&["check-client", &m, empty.to_str().unwrap()])).trim(), "LEGAL");
    let out = ifsynth(&["gen-tests", &m, "--depth", "2"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    for want in ["ILLEGAL: modify", "ILLEGAL: access modify", "LEGAL: next", "LEGAL: next modify"] {
        assert!(lines.contains(&want), "missing `{want}` in\n{text}");
    }
}
