use std::path::PathBuf;
use std::process::{Command, Output};

use biver_cli::{cmd_check, cmd_transform, cmd_translate, parse_domain, parse_init, Status};
use serde_json::Value as Json;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn problem(name: &str) -> PathBuf {
    root().join("../../problems").join(name)
}

fn fixture(name: &str) -> PathBuf {
    root().join("tests/fixtures").join(name)
}

fn biver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biver"))
        .args(args)
        .env_remove("BIVER_SOLVER")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn solver_available() -> bool {
    biver::vcgen::smt::SolverConfig::default().available()
}

#[test]
fn intro_verifies() {
    let p = problem("intro.biv");
    let o = biver(&["verify", p.to_str().unwrap(), "--fuel", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("bounds: domain -2..2, fuel 16"), "{out}");
    assert!(out.contains("status: verified"), "{out}");
}

#[test]
fn doubling_is_refuted_with_counterexample() {
    let p = problem("intro_double.biv");
    let o = biver(&["verify", p.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let j: Json = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["status"], "refuted");
    assert_eq!(j["exit_code"], 1);
    assert_eq!(j["alignment"]["result"], "fails");
    let x = j["projections"]["reason"]["at"]["left"]["x"].as_i64().unwrap();
    assert_eq!(x.rem_euclid(2), 1);
}

#[test]
fn missing_invariant_with_smt_is_a_usage_error() {
    let p = fixture("no_invariant.biv");
    let o = biver(&["verify", p.to_str().unwrap(), "--backend", "smt"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no invariant"));
    // The oracle does not need it.
    let o = biver(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_3() {
    let p = problem("intro.biv");
    let p = p.to_str().unwrap();
    for args in [
        vec!["verify", p, "--domain", "2..1"],
        vec!["verify", p, "--backend", "bdd"],
        vec!["verify", p, "--init", "q=0..1"],
        vec!["verify", p, "--timeout", "0"],
        vec!["frobnicate"],
        vec!["verify", "/nonexistent.biv"],
    ] {
        assert_eq!(biver(&args).status.code(), Some(3), "{args:?}");
    }
    let bad = fixture("bad_syntax.biv");
    assert_eq!(biver(&["check", bad.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(biver(&["--help"]).status.code(), Some(0));
}

#[test]
fn solver_launch_failure_exits_3() {
    let p = problem("intro.biv");
    let o = biver(&["verify", p.to_str().unwrap(), "--backend", "smt", "--solver", "/nonexistent/solver"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn smt_backend_reports() {
    if !solver_available() {
        eprintln!("no solver available, skipping");
        return;
    }
    let p = problem("intro.biv");
    let o = biver(&["verify", p.to_str().unwrap(), "--backend", "smt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let p = problem("intro_double.biv");
    let o = biver(&["verify", p.to_str().unwrap(), "--backend", "smt", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let j: Json = serde_json::from_str(&stdout(&o)).unwrap();
    let sat: Vec<&Json> = j["obligations"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|o| o["answer"] == "sat")
        .collect();
    assert_eq!(sat.len(), 1);
    assert_eq!(sat[0]["replay_holds"], false);
}

#[test]
fn json_is_stable_across_runs() {
    let p = problem("c1.biv");
    let args = ["verify", p.to_str().unwrap(), "--domain", "-1..1", "--init", "n=1..2", "--json"];
    let a = biver(&args);
    let b = biver(&args);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
    let j: Json = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(j["bounds"]["domain"], serde_json::json!([-1, 1]));
    assert_eq!(j["bounds"]["init"]["n"], serde_json::json!([1, 2]));
}

#[test]
fn check_problems() {
    for name in ["intro.biv", "intro_double.biv", "c1.biv", "c2.biv"] {
        let r = cmd_check(&problem(name)).unwrap();
        assert_eq!(r.status, Status::Ok, "{}", r.text);
        assert_eq!(r.json["left_projection"]["matches"], true);
    }
    let r = cmd_check(&fixture("wrong_left.biv")).unwrap();
    assert_eq!(r.status, Status::Refuted);
    assert_eq!(r.json["left_projection"]["matches"], false);
    assert_eq!(r.json["right_projection"]["matches"], true);
}

#[test]
fn transform_and_translate() {
    let r = cmd_transform(&problem("intro.biv")).unwrap();
    assert_eq!(
        r.text.trim(),
        "< hav x | skip >;\nassert { exists |y. x =:= y };\nhavF y { x =:= y }"
    );
    let r = cmd_transform(&fixture("assert_only.biv")).unwrap();
    assert_eq!(r.text.trim(), "assert { x =:= x }");

    let r = cmd_translate(&problem("intro.biv")).unwrap();
    assert_eq!(
        r.text.trim(),
        "hav l_x;\nassert { exists r_y. l_x = r_y };\nhav r_y;\nassume { l_x = r_y }"
    );
    let r = cmd_translate(&fixture("assert_only.biv")).unwrap();
    assert_eq!(r.text.trim(), "assert { l_x = r_x }");
}

#[test]
fn flag_parsing() {
    assert_eq!(parse_domain("-2..2").map(|d| (d.lo, d.hi)), Ok((-2, 2)));
    assert!(parse_domain("1..0").is_err());
    assert!(parse_domain("1-2").is_err());
    let (x, d) = parse_init("n=1..3").unwrap();
    assert_eq!((x.as_str(), d.lo, d.hi), ("n", 1, 3));
    assert!(parse_init("n").is_err());
}
