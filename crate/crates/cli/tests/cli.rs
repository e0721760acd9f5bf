use std::path::PathBuf;
use std::process::Command;

use costlite_cli::{run, Report};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn call(args: &[&str]) -> Report {
    let mut argv = vec!["costlite".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(&argv)
}

#[test]
fn running_example_costs() {
    let kb = fixture("ex1.wkb");
    let r = call(&["sat", "--kb", &kb, "--k", "3"]);
    assert_eq!(r.code, 0, "{r:?}");
    assert!(r.stdout.starts_with("3-satisfiable: yes"));
    assert_eq!(call(&["sat", "--kb", &kb, "--k", "2"]).code, 1);

    let q = fixture("tb0c0.q");
    let r = call(&["entail", "--kb", &kb, "--query", &q, "--mode", "possible", "--k", "3"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.starts_with("possible (k=3): no"));
    let r = call(&["entail", "--kb", &kb, "--query", "cq[]: t(b0,c0)", "--mode", "p", "--k", "10"]);
    assert_eq!(r.code, 0);
}

#[test]
fn json_output_is_parseable() {
    let r = call(&["--json", "sat", "--kb", &fixture("ex1.wkb"), "--k", "3"]);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["answer"], true);
    assert_eq!(v["k"], 3);
}

#[test]
fn answers_over_individuals() {
    let kb = fixture("small.wkb");
    let q = fixture("bx.q");
    let r = call(&["--json", "answers", "--kb", &kb, "--query", &q, "--mode", "certain", "--opt"]);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["k"], 1);
    assert_eq!(v["answers"], serde_json::json!([["a"]]));
    let r = call(&["--json", "answers", "--kb", &kb, "--query", &q, "--mode", "possible", "--k", "1"]);
    let v: serde_json::Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["answers"], serde_json::json!([["a"], ["b"]]));
}

#[test]
fn rewrite_then_eval_matches_entail() {
    let dir = tempfile::tempdir().unwrap();
    let kb = fixture("small.wkb");
    for (query, mode, k) in [("cq[]: B(a)", "c", "1"), ("cq[]: B(b)", "c", "1"), ("cq[]: B(b)", "p", "1"), ("cq[]: B(b)", "p", "0")] {
        let fo = dir.path().join(format!("{mode}{k}.fo")).display().to_string();
        let r = call(&["rewrite", "--tbox", &kb, "--query", query, "--k", k, "--mode", mode, "-o", &fo]);
        assert_eq!(r.code, 0, "{r:?}");
        let eval = call(&["eval", "--fo", &fo, "--abox", &kb, "--k", k, "--mode", mode]);
        let direct = call(&["entail", "--kb", &kb, "--query", query, "--mode", mode, "--k", k]);
        assert_eq!(eval.code, direct.code, "{query} {mode} {k}");
    }
}

#[test]
fn eval_rejects_a_mismatched_header() {
    let dir = tempfile::tempdir().unwrap();
    let kb = fixture("small.wkb");
    let fo = dir.path().join("q.fo").display().to_string();
    assert_eq!(call(&["rewrite", "--tbox", &kb, "--query", "cq[]: B(a)", "--k", "1", "--mode", "c", "-o", &fo]).code, 0);
    let r = call(&["eval", "--fo", &fo, "--abox", &kb, "--k", "2", "--mode", "c"]);
    assert_eq!(r.code, 2);
    let r = call(&["eval", "--fo", &fo, "--abox", &kb, "--k", "1", "--mode", "p"]);
    assert_eq!(r.code, 2);
}

#[test]
fn generators_write_instances() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("unsat").display().to_string();
    let r = call(&["gen", "3sat", "--input", &fixture("unsat.cnf"), "-o", &prefix]);
    assert_eq!(r.code, 0, "{r:?}");
    assert_eq!(call(&["sat", "--kb", &format!("{prefix}.wkb"), "--k", "1"]).code, 1);

    let prefix = dir.path().join("sat").display().to_string();
    call(&["gen", "3sat", "--input", &fixture("sat.cnf"), "-o", &prefix]);
    assert_eq!(call(&["sat", "--kb", &format!("{prefix}.wkb"), "--k", "1"]).code, 0);

    let prefix = dir.path().join("tri").display().to_string();
    let r = call(&["gen", "3col", "--input", &fixture("triangle.edges"), "-o", &prefix]);
    assert!(r.stdout.contains("budget: 12"), "{r:?}");
    assert_eq!(call(&["sat", "--kb", &format!("{prefix}.wkb"), "--k", "12"]).code, 0);

    let prefix = dir.path().join("taut").display().to_string();
    call(&["gen", "3dnf-iq", "--input", &fixture("taut.dnf"), "-o", &prefix]);
    let (kb, q) = (format!("{prefix}.wkb"), format!("{prefix}.q"));
    assert_eq!(call(&["entail", "--kb", &kb, "--query", &q, "--mode", "c", "--k", "1"]).code, 0);
    let prefix = dir.path().join("nontaut").display().to_string();
    call(&["gen", "3dnf-cq", "--input", &fixture("nontaut.dnf"), "-o", &prefix]);
    let (kb, q) = (format!("{prefix}.wkb"), format!("{prefix}.q"));
    assert_eq!(call(&["entail", "--kb", &kb, "--query", &q, "--mode", "c", "--k", "1"]).code, 1);

    let prefix = dir.path().join("lex").display().to_string();
    call(&["gen", "lexmax", "--input", &fixture("sat.cnf"), "--index", "1", "-o", &prefix]);
    let (kb, q) = (format!("{prefix}.wkb"), format!("{prefix}.q"));
    assert_eq!(call(&["entail", "--kb", &kb, "--query", &q, "--mode", "c", "--opt"]).code, 0);
    assert_eq!(call(&["gen", "lexmax", "--input", &fixture("sat.cnf"), "--index", "9"]).code, 2);
}

#[test]
fn oracle_check_agrees_and_is_deterministic() {
    let a = call(&["oracle-check", "--seed", "7", "--count", "40", "--mode", "p"]);
    assert_eq!(a.code, 0, "{a:?}");
    assert!(a.stdout.contains("0 disagreements"));
    assert_eq!(a, call(&["oracle-check", "--seed", "7", "--count", "40", "--mode", "possible"]));
    let c = call(&["oracle-check", "--seed", "3", "--count", "20", "--mode", "c"]);
    assert_eq!(c.code, 0, "{c:?}");
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(call(&["sat", "--kb", &fixture("ex1.wkb")]).code, 2);
    assert_eq!(call(&["sat", "--kb", "/nonexistent.wkb", "--k", "1"]).code, 2);
    assert_eq!(call(&["entail", "--kb", &fixture("ex1.wkb"), "--query", "cq[]: (", "--mode", "p", "--k", "1"]).code, 2);
    assert_eq!(call(&["entail", "--kb", &fixture("ex1.wkb"), "--query", "cq[]: A(a0)", "--mode", "maybe", "--k", "1"]).code, 2);
    let both = call(&["entail", "--kb", &fixture("ex1.wkb"), "--query", "cq[]: A(a0)", "--mode", "p", "--k", "1", "--opt"]);
    assert_eq!(both.code, 2);
    assert_eq!(call(&["gen", "3sat", "--input", &fixture("ex1.wkb")]).code, 2);
    assert_eq!(call(&["--help"]).code, 0);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_costlite");
    let out = Command::new(bin).args(["sat", "--kb", &fixture("ex1.wkb"), "--k", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("yes"));
    let out = Command::new(bin).args(["sat", "--kb", &fixture("ex1.wkb"), "--k", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin).args(["sat"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = Command::new(bin).env("COSTLITE_MAX_ANON", "x").args(["sat", "--kb", &fixture("ex1.wkb"), "--k", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
