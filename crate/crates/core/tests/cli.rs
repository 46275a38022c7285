//! Runs the `glw` binary and byte-compares payloads with `tests/golden/`.
//!
//! Set `GLW_BLESS=1` to rewrite the golden files from the current output.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn fixture(name: &str) -> String {
    root().join("fixtures").join(name).display().to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn glw(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_glw")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn golden(name: &str, args: &[&str]) {
    let run = glw(args);
    assert_eq!(run.code, 0, "{name}: {}", run.stderr);
    let path = root().join("golden").join(format!("{name}.json"));
    if std::env::var_os("GLW_BLESS").is_some() {
        std::fs::write(&path, &run.stdout).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(run.stdout, expected, "{name} differs from golden output");
    assert_eq!(glw(args).stdout, run.stdout, "{name} is not deterministic");
}

fn error_kind(run: &Run) -> String {
    let v: Value = serde_json::from_str(&run.stderr).expect("error object on stderr");
    assert_eq!(v["status"], "error");
    v["kind"].as_str().unwrap().to_string()
}

#[test]
fn headline_examples() {
    let lob = glw(&["decide", "[](([]p0 -> p0)) -> []p0"]);
    let v: Value = serde_json::from_str(&lob.stdout).unwrap();
    assert_eq!((v["status"].clone(), v["verdict"].clone()), (json!("ok"), json!("valid")));

    let gamma = glw(&["gamma", "--n", "2", "--branch", "2", "--block", "1", "--validate"]);
    let v: Value = serde_json::from_str(&gamma.stdout).unwrap();
    assert_eq!(v, json!({ "status": "ok", "dagger": "pass", "points": 9 }));

    let dia = glw(&["decide", "<>T"]);
    let v: Value = serde_json::from_str(&dia.stdout).unwrap();
    assert_eq!(v["verdict"], "countermodel");
    assert_eq!(v["model"]["worlds"].as_array().unwrap().len(), 1);
}

#[test]
fn golden_relational() {
    golden("parse", &["parse", "[]p0 -> <>(p1 & ~p0)"]);
    golden("decide_lob", &["decide", "[](([]p0 -> p0)) -> []p0"]);
    golden("decide_reflexivity", &["decide", "[]p0 -> p0"]);
    golden("brute_decide", &["brute-decide", "p0 -> []p0", "--max-nodes", "3"]);
    golden("check_proof_ok", &["check-proof", &fixture("proof_ok.json")]);
    golden("check_proof_bad", &["check-proof", &fixture("proof_bad.json")]);
    golden("kn", &["kn", "--n", "2", "--branch", "1"]);
    golden("morphism", &["morphism", "--model", &fixture("chain2.json")]);
}

#[test]
fn golden_measures() {
    let structure = fixture("structure_n2.json");
    golden("gamma", &["gamma", "--n", "2", "--branch", "1", "--block", "1"]);
    golden("gamma_mutants", &["gamma", "--n", "2", "--branch", "2", "--block", "1", "--mutants", "3", "--seed", "7"]);
    golden(
        "eval_filter",
        &["eval-filter", "--structure", &structure, "--valuation", &fixture("filter_valuation.json"), "--formula", "<>p0"],
    );
    golden("reduce", &["reduce", "[]p0 -> p0"]);
    golden("rank", &["rank", "--structure", &structure]);
    golden("icard", &["icard", "--structure", &structure, "--zeta", "0", "--xi", "2"]);
    golden("sigma", &["sigma", "--n", "2", "--k", "1"]);
}

#[test]
fn golden_ordinals() {
    let val = fixture("ord_valuation.json");
    golden("ord_eval", &["ord-eval", "--top", "w^2", "--formula", "<>p0", "--valuation", &val, "--points", "w,w*3,w*4"]);
    golden(
        "ord_end_eval",
        &["ord-end-eval", "--top", "w^2", "--formula", "<>p0", "--valuation", &val, "--points", "w,w*3+1"],
    );
    golden("gamma_end_validate", &["gamma-end-validate", "--n", "2", "--construct", "2"]);
}

#[test]
fn out_flag_writes_payload() {
    let dir = std::env::temp_dir().join(format!("glw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("kn.json");
    let run = glw(&["kn", "--n", "1", "--branch", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["size"], 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn error_exit_codes() {
    let unknown = glw(&["frobnicate"]);
    assert_eq!(unknown.code, 1);
    assert_eq!(error_kind(&unknown), "unknown_subcommand");

    let parse = glw(&["decide", "[]("]);
    assert_eq!(parse.code, 1);
    assert_eq!(error_kind(&parse), "parse");

    let missing = glw(&["check-proof", "/nonexistent/proof.json"]);
    assert_eq!((missing.code, error_kind(&missing)), (1, "io".to_string()));

    let malformed = glw(&["rank", "--structure", &fixture("proof_ok.json")]);
    assert_eq!((malformed.code, error_kind(&malformed)), (1, "malformed".to_string()));

    let not_tree = glw(&["morphism", "--model", &fixture("not_a_model.json")]);
    assert_eq!((not_tree.code, error_kind(&not_tree)), (1, "domain".to_string()));

    let guard = glw(&["kn", "--n", "12", "--branch", "3", "--guard", "1000"]);
    assert_eq!((guard.code, error_kind(&guard)), (1, "guard".to_string()));

    let sigma = glw(&["sigma", "--n", "3", "--k", "0", "--engine", "brute"]);
    assert_eq!((sigma.code, error_kind(&sigma)), (1, "guard".to_string()));

    assert_eq!(glw(&["kn", "--n", "2"]).code, 2);
    assert_eq!(glw(&["decide", "p0", "--bogus"]).code, 2);
    assert_eq!(glw(&["--help"]).code, 0);
}
