use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thirdorder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = run(args);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (v, code)
}

#[test]
fn wunschmann_of_the_three_halves_power() {
    let (v, code) = json(&["invariants", "--name", "W", "q^(3/2)"]);
    assert_eq!(code, 0);
    assert_eq!(v["W"], "0");
    assert_eq!(v["config"]["seed"], 24301);
    assert_eq!(v["config"]["params"]["mu"], Value::Null);
    assert_eq!(v.as_object().unwrap().len(), 2);
}

#[test]
fn undefined_invariants_are_null() {
    let (v, code) = json(&["invariants", "--name", "Z", "--name", "K", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["Z"], Value::Null);
    assert_eq!(v["K"], "0");
}

#[test]
fn classify_the_negative_example() {
    let (v, code) = json(&["classify", "3*q^2/(2*p)"]);
    assert_eq!(code, 0);
    assert_eq!(v["einstein_weyl"], true);
    assert_eq!(v["ricci_sign"], "negative");
    assert_eq!(v["contact_trivial"], true);
    assert_eq!(v["point_trivial"], false);
}

#[test]
fn verify_the_swap() {
    let args = ["verify", "--map-kind", "point", "--chi", "y", "--phi", "x", "--source", "0", "--target", "3*q^2/p"];
    let (v, code) = json(&args);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"]["verdict"], "ProvedZero");
    // a refuted equivalence is still a definite answer
    let (v, code) = json(&["verify", "--chi", "y", "--phi", "x", "--source", "0", "--target", "q^3"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"]["verdict"], "ProvedNonzero");
}

#[test]
fn output_is_byte_deterministic() {
    let args = ["classify", "x*q^2 + y*p", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn parameters_are_declared_and_bound() {
    let (v, _) = json(&["invariants", "--name", "a5", "-2*mu*p + y"]);
    assert_eq!(v["a5"], "mu");
    let (v, _) = json(&["invariants", "--name", "a5", "-2*mu*p + y", "--param", "mu=1/2"]);
    assert_eq!(v["a5"], "1/2");
    assert_eq!(v["config"]["params"]["mu"], "1/2");
    let (v, _) = json(&["invariants", "--name", "K", "--param", "lam", "lam*q^2"]);
    assert_eq!(v["config"]["params"]["lam"], Value::Null);
    assert_ne!(v["K"], "0");
}

#[test]
fn errors_exit_with_one_and_show_the_grammar() {
    for args in [
        &["classify", "q^^2"][..],
        &["classify", "z*q"][..],
        &["invariants", "--name", "nope", "q"][..],
        &["classify"][..],
        &["transform", "q^3", "--chi", "y", "--phi", "x"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    let err = String::from_utf8(run(&["classify", "q^^2"]).stderr).unwrap();
    assert!(err.contains("rational exponents"));
}

#[test]
fn unknown_verdicts_exit_with_two() {
    let out = run(&["curvature", "q^3 + y", "--probes", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["flat"]["verdict"], "Unknown");
}

#[test]
fn table_and_latex_carry_the_configuration() {
    let t = String::from_utf8(run(&["invariants", "--name", "W", "q^3 + y", "--format", "table"]).stdout).unwrap();
    assert!(t.starts_with("# seed=24301"));
    assert!(t.contains("W"));
    let l = String::from_utf8(run(&["coframe", "0", "--format", "latex"]).stdout).unwrap();
    assert!(l.starts_with("% seed=24301"));
    assert!(l.contains("\\begin{align*}"));
}

#[test]
fn transform_with_inverse() {
    let args = ["transform", "q^3", "--chi", "y", "--phi", "x", "--inverse-chi", "y", "--inverse-phi", "x"];
    let (v, code) = json(&args);
    assert_eq!(code, 0);
    assert_eq!(v["F"], "(3*p^4*q^2 + q^3)/p^5");
}

#[test]
fn oracle_with_numeric_check() {
    let (v, code) = json(&["oracle", "3*q^2/(2*p)", "--solution", "c1 + c2/(x + c3)", "--grid-points", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["wunschmann"]["verdict"]["verdict"], "ProvedNonzero");
    assert_eq!(v["descent"]["verdict"]["verdict"], "ProvedZero");
    assert_eq!(v["numeric"]["ricci_sign"], "negative");
    assert!(v["numeric"]["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn remaining_subcommands_run() {
    for args in [
        &["connection", "0", "--picture", "point"][..],
        &["metric", "q^3", "--metric-variant", "p"][..],
        &["cotton", "3*q^2/(2*p)"][..],
        &["fivedim", "q^3 + y", "--at", "x=1,y=1/2,p=1,q=2,u=1"][..],
        &["solution-space", "0", "--solution", "c1 + c2*x + c3*x^2/2"][..],
    ] {
        let (v, code) = json(args);
        assert_eq!(code, 0, "{args:?}");
        assert!(v.get("config").is_some());
    }
    let (v, _) = json(&["solution-space", "0", "--solution", "c1 + c2*x + c3*x^2/2"]);
    assert_eq!(v["x0"], "0");
}
