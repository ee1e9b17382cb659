//! Bounded exhaustive checking against the executable semantics.
//!
//! Initial stores range over a finite domain, havoc draws from the same
//! domain, and loops are cut off after a fixed number of iterations. A
//! `Fails` verdict always carries a concrete counterexample; anything the
//! bounds could have hidden is reported as inconclusive instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::assertions::eval_rformula;
use crate::semantics::*;
use crate::structure::{
    bframe_violations, bicom_vars, command_vars, left_proj, right_proj, wellformed,
    FrameViolation, WfViolation,
};
use crate::syntax::*;
use crate::transform::{chk, TransformError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub dom: Domain,
    pub fuel: u32,
    /// Narrower ranges for the initial values of particular variables.
    pub init: BTreeMap<Var, Domain>,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            dom: Domain::default(),
            fuel: 16,
            init: BTreeMap::new(),
        }
    }
}

impl Bounds {
    pub fn new(dom: Domain, fuel: u32) -> Bounds {
        Bounds {
            dom,
            fuel,
            init: BTreeMap::new(),
        }
    }

    pub fn with_init(mut self, x: Var, range: Domain) -> Bounds {
        self.init.insert(x, range);
        self
    }

    fn initial_values(&self, x: Var) -> Vec<Value> {
        match (x.sort(), self.init.get(&x)) {
            (Sort::Int, Some(d)) => d.values(Sort::Int),
            _ => self.dom.values(x.sort()),
        }
    }
}

/// Every assignment of the declared variables. Extra variables (such as
/// snapshots introduced by instrumentation) are fixed to their defaults.
pub fn initial_stores(vars: &[Var], extra: &BTreeSet<Var>, bounds: &Bounds) -> Vec<Store> {
    let base: Store = extra
        .iter()
        .filter(|x| !vars.contains(x))
        .map(|x| (*x, Value::default_of(x.sort())))
        .collect();
    let mut out = vec![base];
    for &x in vars {
        let values = bounds.initial_values(x);
        out = out
            .into_iter()
            .flat_map(|s| values.iter().map(move |&v| s.with(x, v)))
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailReason {
    /// The bi-command fails in a step starting from these stores.
    BicomFails { left: Store, right: Store },
    /// A final pair violates the postcondition.
    PostViolated { left: Store, right: Store },
    /// The left command fails in a step starting from this store.
    LeftFails { left: Store },
    /// No right outcome matches this left outcome.
    NoWitness { left: Store },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub left: Store,
    pub right: Store,
    pub reason: FailReason,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "from {} | {}: ", self.left, self.right)?;
        match &self.reason {
            FailReason::BicomFails { left, right } => {
                write!(f, "the alignment fails at {left} | {right}")
            }
            FailReason::PostViolated { left, right } => {
                write!(f, "final states {left} | {right} violate the postcondition")
            }
            FailReason::LeftFails { left } => write!(f, "the left program fails at {left}"),
            FailReason::NoWitness { left } => {
                write!(f, "no right execution matches the left final state {left}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InconclusiveReason {
    /// A run exceeded the loop iteration bound.
    FuelExhausted,
    /// No witness was found, but the bounded right executions may have
    /// missed one.
    WitnessBound,
}

impl fmt::Display for InconclusiveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InconclusiveReason::FuelExhausted => "fuel exhausted",
            InconclusiveReason::WitnessBound => "witness outside the bounds",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconclusive {
    pub reason: InconclusiveReason,
    pub left: Store,
    pub right: Store,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// No violation within the bounds and every run completed.
    HoldsBounded,
    Fails(Counterexample),
    Inconclusive(Inconclusive),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsBounded)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::HoldsBounded => f.write_str("holds within bounds"),
            Verdict::Fails(cex) => write!(f, "fails {cex}"),
            Verdict::Inconclusive(i) => {
                write!(f, "inconclusive ({}) from {} | {}", i.reason, i.left, i.right)
            }
        }
    }
}

fn pairs<'a>(stores: &'a [Store]) -> impl Iterator<Item = (usize, usize)> + 'a {
    (0..stores.len()).flat_map(move |i| (0..stores.len()).map(move |j| (i, j)))
}

/// Forall-forall validity of `{pre} b {post}` within the bounds.
pub fn check_aa(
    b: &Bicom,
    pre: &RelFormula,
    post: &RelFormula,
    vars: &[Var],
    bounds: &Bounds,
) -> EvalResultOf<Verdict> {
    let stores = initial_stores(vars, &bicom_vars(b), bounds);
    let mut inconclusive = None;
    for (i, j) in pairs(&stores) {
        let (s, t) = (&stores[i], &stores[j]);
        if !eval_rformula(pre, s, t, &bounds.dom)? {
            continue;
        }
        let r = eval_bicom(b, s, t, &bounds.dom, bounds.fuel)?;
        let cex = |reason| {
            Verdict::Fails(Counterexample {
                left: s.clone(),
                right: t.clone(),
                reason,
            })
        };
        if r.fails() {
            let at = r.fail_at.clone().expect("failure point");
            return Ok(cex(FailReason::BicomFails {
                left: at.left,
                right: at.right.unwrap_or_else(|| t.clone()),
            }));
        }
        for (s1, t1) in r.normal() {
            if !eval_rformula(post, s1, t1, &bounds.dom)? {
                return Ok(cex(FailReason::PostViolated {
                    left: s1.clone(),
                    right: t1.clone(),
                }));
            }
        }
        if r.exhausted && inconclusive.is_none() {
            inconclusive = Some(Inconclusive {
                reason: InconclusiveReason::FuelExhausted,
                left: s.clone(),
                right: t.clone(),
            });
        }
    }
    Ok(inconclusive.map_or(Verdict::HoldsBounded, Verdict::Inconclusive))
}

fn has_havoc(c: &Command) -> bool {
    match c {
        Command::Havoc(_) => true,
        Command::Seq(a, b) | Command::If(_, a, b) => has_havoc(a) || has_havoc(b),
        Command::While(l) => has_havoc(&l.body),
        _ => false,
    }
}

fn outside(s: &Store, dom: &Domain) -> bool {
    s.iter()
        .any(|(_, v)| matches!(v, Value::Int(_)) && !dom.contains(v))
}

/// Forall-exists validity of `{pre} c ~ d {post}` within the bounds: every
/// left outcome has some right outcome satisfying the postcondition.
pub fn check_ae(
    c: &Command,
    d: &Command,
    pre: &RelFormula,
    post: &RelFormula,
    vars: &[Var],
    bounds: &Bounds,
) -> EvalResultOf<Verdict> {
    let mut extra = command_vars(c);
    extra.extend(command_vars(d));
    let stores = initial_stores(vars, &extra, bounds);
    let mut left: Vec<Option<EvalResult<Outcome>>> = vec![None; stores.len()];
    let mut right: Vec<Option<EvalResult<Outcome>>> = vec![None; stores.len()];
    let d_havocs = has_havoc(d);
    let mut inconclusive = None;
    let mut note = |reason, s: &Store, t: &Store| {
        if inconclusive.is_none() {
            inconclusive = Some(Inconclusive {
                reason,
                left: s.clone(),
                right: t.clone(),
            });
        }
    };
    for (i, j) in pairs(&stores) {
        let (s, t) = (&stores[i], &stores[j]);
        if !eval_rformula(pre, s, t, &bounds.dom)? {
            continue;
        }
        if left[i].is_none() {
            left[i] = Some(eval_cmd(c, s, &bounds.dom, bounds.fuel)?);
        }
        if right[j].is_none() {
            right[j] = Some(eval_cmd(d, t, &bounds.dom, bounds.fuel)?);
        }
        let (l, r) = (left[i].as_ref().unwrap(), right[j].as_ref().unwrap());
        let cex = |reason| {
            Verdict::Fails(Counterexample {
                left: s.clone(),
                right: t.clone(),
                reason,
            })
        };
        if l.fails() {
            let at = l.fail_at.clone().expect("failure point");
            return Ok(cex(FailReason::LeftFails { left: at.left }));
        }
        for s1 in l.normal() {
            let mut found = false;
            for t1 in r.normal() {
                if eval_rformula(post, s1, t1, &bounds.dom)? {
                    found = true;
                    break;
                }
            }
            if found {
                continue;
            }
            if r.exhausted || (d_havocs && outside(s1, &bounds.dom)) {
                note(InconclusiveReason::WitnessBound, s, t);
            } else {
                return Ok(cex(FailReason::NoWitness { left: s1.clone() }));
            }
        }
        if l.exhausted {
            note(InconclusiveReason::FuelExhausted, s, t);
        }
    }
    Ok(inconclusive.map_or(Verdict::HoldsBounded, Verdict::Inconclusive))
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("bi-command is not well-formed: {}", join(.0))]
    NotWellFormed(Vec<WfViolation>),
    #[error("bi-command is not framed: {}", join(.0))]
    NotFramed(Vec<FrameViolation>),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremCheck {
    /// Forall-forall verdict for the instrumented bi-command.
    pub instrumented: Verdict,
    /// Forall-exists verdict for the projections, computed only when the
    /// instrumented bi-command holds.
    pub projections: Option<Verdict>,
}

impl TheoremCheck {
    /// The instrumented alignment holds but the projections fail.
    pub fn violated(&self) -> bool {
        self.instrumented.holds() && matches!(self.projections, Some(Verdict::Fails(_)))
    }
}

/// If the instrumented alignment is valid, its projections must satisfy the
/// forall-exists specification.
pub fn check_main_theorem(
    b: &Bicom,
    pre: &RelFormula,
    post: &RelFormula,
    vars: &[Var],
    bounds: &Bounds,
) -> Result<TheoremCheck, OracleError> {
    wellformed(b).map_err(OracleError::NotWellFormed)?;
    let frame = bframe_violations(b, vars);
    if !frame.is_empty() {
        return Err(OracleError::NotFramed(frame));
    }
    let instrumented = check_aa(&chk(b, vars)?, pre, post, vars, bounds)?;
    let projections = if instrumented.holds() {
        Some(check_ae(&left_proj(b), &right_proj(b), pre, post, vars, bounds)?)
    } else {
        None
    };
    Ok(TheoremCheck {
        instrumented,
        projections,
    })
}

/// For every pair of initial stores, whether every bounded run of `b`
/// avoids failure and ends in `post`. `None` when fuel ran out first.
pub fn wlp_table(
    b: &Bicom,
    post: &RelFormula,
    vars: &[Var],
    bounds: &Bounds,
) -> EvalResultOf<Vec<(Store, Store, Option<bool>)>> {
    let stores = initial_stores(vars, &bicom_vars(b), bounds);
    let mut out = Vec::with_capacity(stores.len() * stores.len());
    for (i, j) in pairs(&stores) {
        let (s, t) = (&stores[i], &stores[j]);
        let r = eval_bicom(b, s, t, &bounds.dom, bounds.fuel)?;
        let mut ok = !r.fails();
        if ok {
            for (s1, t1) in r.normal() {
                if !eval_rformula(post, s1, t1, &bounds.dom)? {
                    ok = false;
                    break;
                }
            }
        }
        let cell = if !ok {
            Some(false)
        } else if r.exhausted {
            None
        } else {
            Some(true)
        };
        out.push((s.clone(), t.clone(), cell));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y")]
    }

    #[test]
    fn store_enumeration() {
        let bounds = Bounds::new(Domain::new(0, 2), 4).with_init(Var::int("y"), Domain::new(1, 1));
        let stores = initial_stores(&vs(), &BTreeSet::from([Var::int("$v")]), &bounds);
        assert_eq!(stores.len(), 3);
        assert_eq!(stores[0].to_string(), "{$v=0, x=0, y=1}");
    }

    #[test]
    fn aa_counterexample() {
        let b = parse_bicom("< x := x + 1 | y := y + 2 >", &vs()).unwrap();
        let pre = parse_rformula("x =:= y", &vs()).unwrap();
        let post = parse_rformula("x =:= y", &vs()).unwrap();
        assert!(check_aa(&b, &pre, &post, &vs(), &Bounds::default()).unwrap().fails());
        let post = parse_rformula("*<| x *<] + 1 = [> y |>", &vs()).unwrap();
        assert!(check_aa(&b, &pre, &post, &vs(), &Bounds::default()).unwrap().holds());
    }

    #[test]
    fn ae_uses_right_nondeterminism() {
        let c = parse_command("hav x", &vs()).unwrap();
        let d = parse_command("hav y", &vs()).unwrap();
        let post = parse_rformula("x =:= y", &vs()).unwrap();
        let t = RelFormula::Bool(true);
        assert!(check_ae(&c, &d, &t, &post, &vs(), &Bounds::default()).unwrap().holds());
        let d = parse_command("hav y; y := 2 * y", &vs()).unwrap();
        let v = check_ae(&c, &d, &t, &post, &vs(), &Bounds::default()).unwrap();
        let Verdict::Fails(cex) = v else { panic!("{v}") };
        assert_eq!(cex.reason, FailReason::NoWitness { left: cex.left.with(Var::int("x"), Value::Int(-1)) });
    }

    #[test]
    fn ae_witness_outside_domain_is_inconclusive() {
        let c = parse_command("x := x + 5", &vs()).unwrap();
        let d = parse_command("hav y", &vs()).unwrap();
        let post = parse_rformula("x =:= y", &vs()).unwrap();
        let v = check_ae(&c, &d, &RelFormula::Bool(true), &post, &vs(), &Bounds::default()).unwrap();
        assert!(matches!(
            v,
            Verdict::Inconclusive(Inconclusive { reason: InconclusiveReason::WitnessBound, .. })
        ));
    }

    #[test]
    fn wlp_table_marks_exhaustion() {
        let b = parse_bicom("< while x > 0 vnt x do skip done | skip >", &vs()).unwrap();
        let table = wlp_table(&b, &RelFormula::Bool(true), &vs(), &Bounds::new(Domain::new(0, 1), 3)).unwrap();
        assert_eq!(table.len(), 16);
        for (s, _, cell) in table {
            let expect = if s.get(Var::int("x")) == Some(Value::Int(0)) { Some(true) } else { None };
            assert_eq!(cell, expect);
        }
    }
}
