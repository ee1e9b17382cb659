use std::path::PathBuf;
use std::time::Duration;

use biver::semantics::Domain;
use biver::syntax::*;
use biver::vcgen::smt::*;
use biver::vcgen::{obligations, GoalKind};

fn load(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name);
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn solver() -> Option<SolverConfig> {
    let cfg = SolverConfig::from_env(Duration::from_secs(10));
    if cfg.available() {
        Some(cfg)
    } else {
        eprintln!("no solver available, skipping");
        None
    }
}

#[test]
fn intro_obligations_are_valid() {
    let Some(cfg) = solver() else { return };
    let obs = obligations(&load("intro.biv")).unwrap();
    let (verdict, results) = check_obligations(&obs, &cfg, &Domain::default()).unwrap();
    assert_eq!(verdict, SmtVerdict::Verified, "{results:?}");
}

#[test]
fn doubling_has_a_genuine_counterexample() {
    let Some(cfg) = solver() else { return };
    let obs = obligations(&load("intro_double.biv")).unwrap();
    let (verdict, results) = check_obligations(&obs, &cfg, &Domain::default()).unwrap();
    assert_eq!(verdict, SmtVerdict::Refuted);
    let bad = results
        .iter()
        .find(|r| matches!(r.answer, SolverAnswer::Sat(_)))
        .unwrap();
    assert_eq!(bad.obligation.goal.kind, GoalKind::HavfExists);
    let (_, _, holds) = bad.replay.clone().unwrap();
    assert!(!holds);
}

#[test]
fn c1_obligations_are_valid() {
    let Some(cfg) = solver() else { return };
    let obs = obligations(&load("c1.biv")).unwrap();
    let (verdict, results) = check_obligations(&obs, &cfg, &Domain::default()).unwrap();
    let failed: Vec<String> = results
        .iter()
        .filter(|r| r.answer != SolverAnswer::Unsat)
        .map(|r| format!("{}: {:?}", r.obligation.label(), r.answer))
        .collect();
    assert_eq!(verdict, SmtVerdict::Verified, "{failed:#?}");
}

#[test]
fn valid_obligations_agree_with_the_oracle() {
    let Some(cfg) = solver() else { return };
    let bounds = biver::oracle::Bounds::new(Domain::new(-1, 1), 16);
    for name in ["intro.biv", "intro_double.biv", "c1.biv"] {
        let p = load(name);
        let (verdict, _) = check_obligations(&obligations(&p).unwrap(), &cfg, &bounds.dom).unwrap();
        let b = biver::vcgen::checked_bicom(&p).unwrap();
        let oracle = biver::oracle::check_aa(&b, &p.spec.pre, &p.spec.post, &p.vars, &bounds).unwrap();
        if verdict == SmtVerdict::Verified {
            assert!(!oracle.fails(), "{name}: {oracle}");
        }
    }
}
