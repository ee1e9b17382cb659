use std::path::PathBuf;

use biver::oracle::*;
use biver::semantics::{Domain, Value};
use biver::structure::{bframe, kateq, left_proj, right_proj, wellformed};
use biver::syntax::*;
use biver::transform::{chk, default_avoid};

fn load(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name);
    let src = std::fs::read_to_string(&path).unwrap();
    parse_problem(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn problems_print_and_reparse() {
    for name in ["intro.biv", "intro_double.biv", "c1.biv", "c2.biv"] {
        let p = load(name);
        let again = parse_problem(&p.to_string()).unwrap();
        assert_eq!(again, p, "{name}");
    }
}

#[test]
fn problems_are_wellformed_and_project_to_their_programs() {
    for name in ["intro.biv", "intro_double.biv", "c1.biv", "c2.biv"] {
        let p = load(name);
        assert_eq!(wellformed(&p.bicom), Ok(()), "{name}");
        assert!(bframe(&p.bicom, &p.vars), "{name}");
        assert!(kateq(&left_proj(&p.bicom), p.left.as_ref().unwrap()), "{name}");
        assert!(kateq(&right_proj(&p.bicom), p.right.as_ref().unwrap()), "{name}");
    }
}

#[test]
fn intro_holds_and_doubling_refutes() {
    let p = load("intro.biv");
    let bounds = Bounds::default();
    let check = check_main_theorem(&p.bicom, &p.spec.pre, &p.spec.post, &p.vars, &bounds).unwrap();
    assert!(check.instrumented.holds());
    assert_eq!(check.projections, Some(Verdict::HoldsBounded));

    let p = load("intro_double.biv");
    let b = chk(&p.bicom, &default_avoid(&p)).unwrap();
    let v = check_aa(&b, &p.spec.pre, &p.spec.post, &p.vars, &bounds).unwrap();
    let Verdict::Fails(Counterexample { reason: FailReason::BicomFails { left, .. }, .. }) = v else {
        panic!("{v}")
    };
    assert_eq!(left.get(Var::int("x")), Some(Value::Int(-1)));
    let v = check_ae(
        p.left.as_ref().unwrap(),
        p.right.as_ref().unwrap(),
        &p.spec.pre,
        &p.spec.post,
        &p.vars,
        &bounds,
    )
    .unwrap();
    let Verdict::Fails(cex) = v else { panic!("{v}") };
    let FailReason::NoWitness { left } = cex.reason else { panic!() };
    let Some(Value::Int(x)) = left.get(Var::int("x")) else { panic!() };
    assert_eq!(x.rem_euclid(2), 1);
}

#[test]
fn c1_holds_on_small_inputs() {
    let p = load("c1.biv");
    let bounds = Bounds::new(Domain::new(-1, 1), 24)
        .with_init(Var::int("n"), Domain::new(1, 2))
        .with_init(Var::int("x"), Domain::new(0, 1));
    let check = check_main_theorem(&p.bicom, &p.spec.pre, &p.spec.post, &p.vars, &bounds).unwrap();
    assert_eq!(check.instrumented, Verdict::HoldsBounded);
    assert_eq!(check.projections, Some(Verdict::HoldsBounded));
}

#[test]
fn c2_never_fails() {
    let p = load("c2.biv");
    let bounds = Bounds::new(Domain::new(-1, 1), 8);
    let v = check_ae(
        p.left.as_ref().unwrap(),
        p.right.as_ref().unwrap(),
        &p.spec.pre,
        &p.spec.post,
        &p.vars,
        &bounds,
    )
    .unwrap();
    assert!(!v.fails(), "{v}");
    // The existence checks quantify over the bounded domain, so the mixed
    // arms can fail on differences that leave it. The diagonal arms cannot.
    let b = chk(&p.bicom, &default_avoid(&p)).unwrap();
    for high in [0, 1] {
        let bounds = bounds.clone().with_init(Var::int("high"), Domain::new(high, high));
        let v = check_aa(&b, &p.spec.pre, &p.spec.post, &p.vars, &bounds).unwrap();
        assert!(!v.fails(), "{v}");
    }
}
