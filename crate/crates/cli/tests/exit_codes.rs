//! Exit codes and key output of the binary on the bundled fixtures.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eatwb")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn validate_accepts_bundled_theories_and_rejects_missing_files() {
    for t in ["gamma0", "groups", "z2vec", "pi_eta_eps", "free_binop"] {
        assert_eq!(code(&["validate", &fixture(&format!("{t}.eat"))]), 0, "{t}");
    }
    assert_eq!(code(&["validate", "/nonexistent/theory.eat"]), 3);
}

#[test]
fn prove_reports_proved_refuted_and_unknown() {
    let z2 = fixture("z2vec.eat");
    assert_eq!(code(&["prove", "--theory", &z2, "--lhs", "add(x,add(x,y))", "--rhs", "y"]), 0);
    let binop = fixture("free_binop.eat");
    assert_eq!(code(&["prove", "--theory", &binop, "--lhs", "m(x,y)", "--rhs", "m(y,x)"]), 1);
    assert_eq!(code(&["--refute-size", "0", "prove", "--theory", &binop, "--lhs", "m(x,y)", "--rhs", "m(y,x)"]), 2);
}

#[test]
fn relation_and_model_commands() {
    let out = run(&["rel", "difunctional", &fixture("rel_112_22.rel")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("but not 2 R 1"));
    let (d, c, s) = (fixture("models/order_d.hom"), fixture("models/order_c.hom"), fixture("models/order_s.hom"));
    assert_eq!(code(&["rel", "graphcheck", &d, &c, &s]), 1);
    assert_eq!(code(&["model", "validate", &fixture("models/z2sq.json")]), 0);
    assert_eq!(code(&["coop", &fixture("models/set2.json")]), 1);
    assert_eq!(code(&["--depth", "4", "coop", &fixture("models/z2.json")]), 0);
}

#[test]
fn cube_and_maltsev_commands() {
    assert_eq!(code(&["cube", "--seed", "1", "--count", "20"]), 0);
    assert_eq!(code(&["cube", "--counterexample"]), 1);
    assert_eq!(code(&["maltsev", "--theory", &fixture("z2vec.eat"), "--sort", "v", "--term", "add(add(x,y),z)"]), 0);
    assert_eq!(code(&["maltsev", "--theory", &fixture("gamma0.eat"), "--sort", "star"]), 1);
}

#[test]
fn json_output_is_parseable() {
    let out = run(&["--json", "rel", "difunctional", &fixture("rel_112_22.rel")]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
}
