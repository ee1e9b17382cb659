//! Bounded big-step semantics of commands and bi-commands.
//!
//! Evaluation is set-based: all states reachable at a program point are
//! processed together, each carrying the loop fuel left on its path. Havoc
//! ranges over a finite [`Domain`]; a path that needs more loop iterations
//! than its fuel is cut off and marks the result as exhausted.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::assertions::{eval_relexpr, eval_rformula, eval_uformula};
use crate::structure::{bileft, biright};
use crate::syntax::*;
use crate::translate::ProductCommand;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn sort(self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
        }
    }

    pub fn default_of(sort: Sort) -> Value {
        match sort {
            Sort::Int => Value::Int(0),
            Sort::Bool => Value::Bool(false),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("variable {0} has no value")]
    Unbound(String),
    #[error("ill-sorted expression")]
    IllSorted,
}

pub type EvalResultOf<T> = Result<T, EvalError>;

/// Finite integer range used for havoc and quantifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    pub lo: i64,
    pub hi: i64,
}

impl Domain {
    pub fn new(lo: i64, hi: i64) -> Domain {
        Domain { lo, hi }
    }

    pub fn values(&self, sort: Sort) -> Vec<Value> {
        match sort {
            Sort::Int => (self.lo..=self.hi).map(Value::Int).collect(),
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        }
    }

    pub fn contains(&self, v: Value) -> bool {
        match v {
            Value::Int(n) => self.lo <= n && n <= self.hi,
            Value::Bool(_) => true,
        }
    }
}

impl Default for Domain {
    fn default() -> Domain {
        Domain { lo: -2, hi: 2 }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// A finite map from variables to values, kept sorted by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Store {
    slots: Vec<(Var, Value)>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn get(&self, x: Var) -> Option<Value> {
        self.slots
            .binary_search_by(|(y, _)| y.cmp(&x))
            .ok()
            .map(|i| self.slots[i].1)
    }

    pub fn lookup(&self, x: Var) -> EvalResultOf<Value> {
        self.get(x)
            .ok_or_else(|| EvalError::Unbound(x.name().to_string()))
    }

    pub fn set(&mut self, x: Var, v: Value) {
        match self.slots.binary_search_by(|(y, _)| y.cmp(&x)) {
            Ok(i) => self.slots[i].1 = v,
            Err(i) => self.slots.insert(i, (x, v)),
        }
    }

    pub fn with(&self, x: Var, v: Value) -> Store {
        let mut s = self.clone();
        s.set(x, v);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Value)> + '_ {
        self.slots.iter().copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.slots.iter().map(|(x, _)| *x)
    }

    /// Entries ordered by name, for display.
    pub fn sorted_by_name(&self) -> Vec<(Var, Value)> {
        let mut v = self.slots.clone();
        v.sort_by_key(|(x, _)| x.name());
        v
    }

    /// Keep only the given variables.
    pub fn restrict(&self, vars: &[Var]) -> Store {
        Store {
            slots: self
                .slots
                .iter()
                .copied()
                .filter(|(x, _)| vars.contains(x))
                .collect(),
        }
    }
}

impl FromIterator<(Var, Value)> for Store {
    fn from_iter<I: IntoIterator<Item = (Var, Value)>>(iter: I) -> Store {
        let mut s = Store::new();
        for (x, v) in iter {
            s.set(x, v);
        }
        s
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .sorted_by_name()
            .into_iter()
            .map(|(x, v)| format!("{x}={v}"))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

fn int(v: Value) -> EvalResultOf<i64> {
    match v {
        Value::Int(n) => Ok(n),
        Value::Bool(_) => Err(EvalError::IllSorted),
    }
}

fn boolean(v: Value) -> EvalResultOf<bool> {
    match v {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => Err(EvalError::IllSorted),
    }
}

/// Integer arithmetic with Euclidean division: the remainder lies in `[0, |d|)`.
pub fn arith(op: BinOp, a: i64, b: i64) -> EvalResultOf<i64> {
    let r = match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::Div | BinOp::Mod if b == 0 => return Err(EvalError::DivByZero),
        BinOp::Div => a.checked_div_euclid(b),
        BinOp::Mod => a.checked_rem_euclid(b),
        _ => return Err(EvalError::IllSorted),
    };
    r.ok_or(EvalError::Overflow)
}

pub fn compare(op: BinOp, a: Value, b: Value) -> EvalResultOf<bool> {
    Ok(match op {
        BinOp::Eq => a == b,
        BinOp::Ne => a != b,
        BinOp::Lt => int(a)? < int(b)?,
        BinOp::Le => int(a)? <= int(b)?,
        BinOp::Gt => int(a)? > int(b)?,
        BinOp::Ge => int(a)? >= int(b)?,
        _ => return Err(EvalError::IllSorted),
    })
}

pub fn eval_expr(e: &Expr, s: &Store) -> EvalResultOf<Value> {
    match e {
        Expr::Int(n) => Ok(Value::Int(*n)),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Var(x) => s.lookup(*x),
        Expr::Unary(UnOp::Neg, a) => {
            let n = int(eval_expr(a, s)?)?;
            n.checked_neg().map(Value::Int).ok_or(EvalError::Overflow)
        }
        Expr::Unary(UnOp::Not, a) => Ok(Value::Bool(!boolean(eval_expr(a, s)?)?)),
        Expr::Binary(BinOp::And, a, b) => Ok(Value::Bool(
            boolean(eval_expr(a, s)?)? && boolean(eval_expr(b, s)?)?,
        )),
        Expr::Binary(BinOp::Or, a, b) => Ok(Value::Bool(
            boolean(eval_expr(a, s)?)? || boolean(eval_expr(b, s)?)?,
        )),
        Expr::Binary(op, a, b) => {
            let (va, vb) = (eval_expr(a, s)?, eval_expr(b, s)?);
            if op.is_arith() {
                Ok(Value::Int(arith(*op, int(va)?, int(vb)?)?))
            } else {
                Ok(Value::Bool(compare(*op, va, vb)?))
            }
        }
    }
}

pub fn eval_bool(e: &Expr, s: &Store) -> EvalResultOf<bool> {
    boolean(eval_expr(e, s)?)
}

pub fn eval_int(e: &Expr, s: &Store) -> EvalResultOf<i64> {
    int(eval_expr(e, s)?)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Normal(Store),
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BiOutcome {
    Normal(Store, Store),
    Fail,
}

/// Outcomes reachable within the fuel bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalResult<O> {
    pub outcomes: BTreeSet<O>,
    /// Some path ran out of fuel, so `outcomes` may be incomplete.
    pub exhausted: bool,
    /// Number of times a filtered havoc or assume admitted no value.
    pub blocked: usize,
    pub fail_at: Option<FailState>,
}

impl<O: Ord> EvalResult<O> {
    pub fn is_complete(&self) -> bool {
        !self.exhausted
    }
}

impl EvalResult<Outcome> {
    pub fn fails(&self) -> bool {
        self.outcomes.contains(&Outcome::Fail)
    }

    pub fn normal(&self) -> impl Iterator<Item = &Store> {
        self.outcomes.iter().filter_map(|o| match o {
            Outcome::Normal(s) => Some(s),
            Outcome::Fail => None,
        })
    }
}

impl EvalResult<BiOutcome> {
    pub fn fails(&self) -> bool {
        self.outcomes.contains(&BiOutcome::Fail)
    }

    pub fn normal(&self) -> impl Iterator<Item = (&Store, &Store)> {
        self.outcomes.iter().filter_map(|o| match o {
            BiOutcome::Normal(s, t) => Some((s, t)),
            BiOutcome::Fail => None,
        })
    }
}

type States = BTreeSet<(Store, u32)>;
type BiStates = BTreeSet<(Store, Store, u32)>;

/// Where a failure arose: the store (or pair of stores) in which the failing
/// step started. Unary runs only set `left`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FailState {
    pub left: Store,
    pub right: Option<Store>,
}

struct Run<'a> {
    dom: &'a Domain,
    failed: bool,
    /// Smallest failure point, so the report does not depend on evaluation order.
    fail_at: Option<FailState>,
    /// Inside an embed: which side the current command runs on and the
    /// other side's store.
    embed: Option<(Side, Store)>,
    exhausted: bool,
    blocked: usize,
}

impl<'a> Run<'a> {
    fn new(dom: &'a Domain) -> Run<'a> {
        Run {
            dom,
            failed: false,
            fail_at: None,
            embed: None,
            exhausted: false,
            blocked: 0,
        }
    }

    fn fail(&mut self, left: Store, right: Option<Store>) {
        self.failed = true;
        let point = FailState { left, right };
        if self.fail_at.as_ref().is_none_or(|p| point < *p) {
            self.fail_at = Some(point);
        }
    }

    fn fail_cmd(&mut self, s: Store) {
        match self.embed.clone() {
            None => self.fail(s, None),
            Some((Side::Left, t)) => self.fail(s, Some(t)),
            Some((Side::Right, s0)) => self.fail(s0, Some(s)),
        }
    }

    /// Split states on a loop test, spending fuel on those that iterate.
    fn spend(&mut self, fuel: u32) -> Option<u32> {
        if fuel == 0 {
            self.exhausted = true;
            None
        } else {
            Some(fuel - 1)
        }
    }

    fn cmd(&mut self, c: &Command, input: States) -> EvalResultOf<States> {
        if input.is_empty() {
            return Ok(input);
        }
        match c {
            Command::Skip => Ok(input),
            Command::Assign(x, e) => input
                .into_iter()
                .map(|(s, f)| Ok((s.with(*x, eval_expr(e, &s)?), f)))
                .collect(),
            Command::Havoc(x) => {
                let values = self.dom.values(x.sort());
                Ok(input
                    .into_iter()
                    .flat_map(|(s, f)| values.iter().map(move |v| (s.with(*x, *v), f)))
                    .collect())
            }
            Command::Assert(p) => {
                let mut out = States::new();
                for (s, f) in input {
                    if eval_uformula(p, &s, self.dom)? {
                        out.insert((s, f));
                    } else {
                        self.fail_cmd(s);
                    }
                }
                Ok(out)
            }
            Command::Seq(a, b) => {
                let mid = self.cmd(a, input)?;
                self.cmd(b, mid)
            }
            Command::If(e, a, b) => {
                let (mut yes, mut no) = (States::new(), States::new());
                for (s, f) in input {
                    if eval_bool(e, &s)? {
                        yes.insert((s, f));
                    } else {
                        no.insert((s, f));
                    }
                }
                let mut out = self.cmd(a, yes)?;
                out.extend(self.cmd(b, no)?);
                Ok(out)
            }
            Command::While(l) => {
                let mut out = States::new();
                let mut current = input;
                while !current.is_empty() {
                    let mut next = States::new();
                    for (s, f) in current {
                        if eval_bool(&l.test, &s)? {
                            if let Some(f) = self.spend(f) {
                                next.insert((s, f));
                            }
                        } else {
                            out.insert((s, f));
                        }
                    }
                    current = self.cmd(&l.body, next)?;
                }
                Ok(out)
            }
        }
    }

    fn bicom(&mut self, b: &Bicom, input: BiStates) -> EvalResultOf<BiStates> {
        if input.is_empty() {
            return Ok(input);
        }
        match b {
            Bicom::Embed(c, d) => {
                let mut out = BiStates::new();
                for (s, t, f) in input {
                    self.embed = Some((Side::Left, t.clone()));
                    let lefts = self.cmd(c, States::from([(s, f)]));
                    for (s1, f1) in lefts? {
                        self.embed = Some((Side::Right, s1.clone()));
                        let rights = self.cmd(d, States::from([(t.clone(), f1)]));
                        for (t1, f2) in rights? {
                            out.insert((s1.clone(), t1, f2));
                        }
                    }
                }
                self.embed = None;
                Ok(out)
            }
            Bicom::Assert(p) => {
                let mut out = BiStates::new();
                for (s, t, f) in input {
                    if eval_rformula(p, &s, &t, self.dom)? {
                        out.insert((s, t, f));
                    } else {
                        self.fail(s, Some(t));
                    }
                }
                Ok(out)
            }
            Bicom::Havf(x, p) => {
                let values = self.dom.values(x.sort());
                let mut out = BiStates::new();
                for (s, t, f) in input {
                    let mut admitted = false;
                    let mut values = values.clone();
                    if x.is_generated() {
                        if let Some(n) = pinned(*x, p, &s, &t)? {
                            if !values.contains(&Value::Int(n)) {
                                values.push(Value::Int(n));
                            }
                        }
                    }
                    for v in &values {
                        let t1 = t.with(*x, *v);
                        if eval_rformula(p, &s, &t1, self.dom)? {
                            out.insert((s.clone(), t1, f));
                            admitted = true;
                        }
                    }
                    if !admitted {
                        self.blocked += 1;
                    }
                }
                Ok(out)
            }
            Bicom::Seq(a, b) => {
                let mid = self.bicom(a, input)?;
                self.bicom(b, mid)
            }
            Bicom::If { left, right, arms } => {
                let mut parts: [BiStates; 4] = Default::default();
                for (s, t, f) in input {
                    let l = eval_bool(left, &s)?;
                    let r = eval_bool(right, &t)?;
                    let k = match (l, r) {
                        (true, true) => 0,
                        (true, false) => 1,
                        (false, true) => 2,
                        (false, false) => 3,
                    };
                    parts[k].insert((s, t, f));
                }
                let mut out = BiStates::new();
                for (arm, part) in arms.iter().zip(parts) {
                    out.extend(self.bicom(arm, part)?);
                }
                Ok(out)
            }
            Bicom::While(l) => {
                let left_body = bileft(&l.body);
                let right_body = biright(&l.body);
                let mut out = BiStates::new();
                let mut current = input;
                while !current.is_empty() {
                    let (mut lonly, mut ronly, mut joint) =
                        (BiStates::new(), BiStates::new(), BiStates::new());
                    for (s, t, f) in current {
                        let e = eval_bool(&l.left, &s)?;
                        let e1 = eval_bool(&l.right, &t)?;
                        let group = if e && eval_rformula(&l.left_align, &s, &t, self.dom)? {
                            &mut lonly
                        } else if e1 && eval_rformula(&l.right_align, &s, &t, self.dom)? {
                            &mut ronly
                        } else if e && e1 {
                            &mut joint
                        } else if e || e1 {
                            self.fail(s, Some(t));
                            continue;
                        } else {
                            out.insert((s, t, f));
                            continue;
                        };
                        if let Some(f) = self.spend(f) {
                            group.insert((s, t, f));
                        }
                    }
                    current = self.bicom(&left_body, lonly)?;
                    current.extend(self.bicom(&right_body, ronly)?);
                    current.extend(self.bicom(&l.body, joint)?);
                }
                Ok(out)
            }
        }
    }

    fn product(&mut self, c: &ProductCommand, input: States) -> EvalResultOf<States> {
        if input.is_empty() {
            return Ok(input);
        }
        match c {
            ProductCommand::Skip => Ok(input),
            ProductCommand::Assign(x, e) => input
                .into_iter()
                .map(|(s, f)| Ok((s.with(*x, eval_expr(e, &s)?), f)))
                .collect(),
            ProductCommand::Havoc(x) => {
                let values = self.dom.values(x.sort());
                Ok(input
                    .into_iter()
                    .flat_map(|(s, f)| values.iter().map(move |v| (s.with(*x, *v), f)))
                    .collect())
            }
            ProductCommand::Assert(p) | ProductCommand::Assume(p) => {
                let assume = matches!(c, ProductCommand::Assume(_));
                let mut out = States::new();
                for (s, f) in input {
                    if eval_uformula(p, &s, self.dom)? {
                        out.insert((s, f));
                    } else if assume {
                        self.blocked += 1;
                    } else {
                        self.fail(s, None);
                    }
                }
                Ok(out)
            }
            ProductCommand::Seq(items) => {
                let mut current = input;
                for item in items {
                    current = self.product(item, current)?;
                }
                Ok(current)
            }
            ProductCommand::If(e, a, b) => {
                let (mut yes, mut no) = (States::new(), States::new());
                for (s, f) in input {
                    if eval_bool(e, &s)? {
                        yes.insert((s, f));
                    } else {
                        no.insert((s, f));
                    }
                }
                let mut out = self.product(a, yes)?;
                out.extend(self.product(b, no)?);
                Ok(out)
            }
            ProductCommand::While(test, body) => {
                let mut out = States::new();
                let mut current = input;
                while !current.is_empty() {
                    let mut next = States::new();
                    for (s, f) in current {
                        if eval_bool(test, &s)? {
                            if let Some(f) = self.spend(f) {
                                next.insert((s, f));
                            }
                        } else {
                            out.insert((s, f));
                        }
                    }
                    current = self.product(body, next)?;
                }
                Ok(out)
            }
        }
    }
}

fn finish(run: Run<'_>, states: States) -> EvalResult<Outcome> {
    let mut outcomes: BTreeSet<Outcome> = states.into_iter().map(|(s, _)| Outcome::Normal(s)).collect();
    if run.failed {
        outcomes.insert(Outcome::Fail);
    }
    EvalResult {
        outcomes,
        exhausted: run.exhausted,
        blocked: run.blocked,
        fail_at: run.fail_at,
    }
}

/// The value a snapshot filter `[> x |> = e` fixes for `x`. Snapshots record
/// variants, which may leave the enumeration domain.
fn pinned(x: Var, p: &RelFormula, s: &Store, t: &Store) -> EvalResultOf<Option<i64>> {
    match p {
        RelFormula::Cmp(BinOp::Eq, RelExpr::Right(Expr::Var(y)), e) if *y == x => {
            Ok(Some(eval_relexpr(e, s, t)?))
        }
        RelFormula::And(a, b) => Ok(pinned(x, a, s, t)?.or(pinned(x, b, s, t)?)),
        _ => Ok(None),
    }
}

/// All outcomes of `c` from `s` whose paths take at most `fuel` loop iterations.
pub fn eval_cmd(c: &Command, s: &Store, dom: &Domain, fuel: u32) -> EvalResultOf<EvalResult<Outcome>> {
    let mut run = Run::new(dom);
    let states = run.cmd(c, States::from([(s.clone(), fuel)]))?;
    Ok(finish(run, states))
}

pub fn eval_bicom(
    b: &Bicom,
    s: &Store,
    t: &Store,
    dom: &Domain,
    fuel: u32,
) -> EvalResultOf<EvalResult<BiOutcome>> {
    let mut run = Run::new(dom);
    let states = run.bicom(b, BiStates::from([(s.clone(), t.clone(), fuel)]))?;
    let mut outcomes: BTreeSet<BiOutcome> = states
        .into_iter()
        .map(|(s, t, _)| BiOutcome::Normal(s, t))
        .collect();
    if run.failed {
        outcomes.insert(BiOutcome::Fail);
    }
    Ok(EvalResult {
        outcomes,
        exhausted: run.exhausted,
        blocked: run.blocked,
        fail_at: run.fail_at,
    })
}

pub fn eval_product(
    c: &ProductCommand,
    s: &Store,
    dom: &Domain,
    fuel: u32,
) -> EvalResultOf<EvalResult<Outcome>> {
    let mut run = Run::new(dom);
    let states = run.product(c, States::from([(s.clone(), fuel)]))?;
    Ok(finish(run, states))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y"), Var::boolean("b")]
    }

    fn store(x: i64, y: i64) -> Store {
        [(Var::int("x"), Value::Int(x)), (Var::int("y"), Value::Int(y))]
            .into_iter()
            .collect()
    }

    #[test]
    fn euclidean_division() {
        assert_eq!(arith(BinOp::Div, -7, 2), Ok(-4));
        assert_eq!(arith(BinOp::Mod, -7, 2), Ok(1));
        assert_eq!(arith(BinOp::Div, 7, -2), Ok(-3));
        assert_eq!(arith(BinOp::Mod, 7, -2), Ok(1));
        assert_eq!(arith(BinOp::Mod, -7, -2), Ok(1));
        assert_eq!(arith(BinOp::Div, 1, 0), Err(EvalError::DivByZero));
        assert_eq!(arith(BinOp::Add, i64::MAX, 1), Err(EvalError::Overflow));
    }

    #[test]
    fn havoc_and_assert() {
        let c = parse_command("hav x; assert { x > 0 }", &vars()).unwrap();
        let r = eval_cmd(&c, &store(0, 0), &Domain::new(-1, 1), 4).unwrap();
        assert!(r.fails());
        assert_eq!(r.normal().count(), 1);
        assert!(!r.exhausted);
    }

    #[test]
    fn fuel_counts_iterations_per_path() {
        let c = parse_command("while x > 0 do x := x - 1 done", &vars()).unwrap();
        let dom = Domain::default();
        let r = eval_cmd(&c, &store(3, 0), &dom, 3).unwrap();
        assert!(!r.exhausted);
        assert_eq!(r.outcomes, BTreeSet::from([Outcome::Normal(store(0, 0))]));
        let r = eval_cmd(&c, &store(3, 0), &dom, 2).unwrap();
        assert!(r.exhausted);
        assert!(r.outcomes.is_empty());
    }

    #[test]
    fn divergent_loop_is_exhausted_not_failed() {
        let c = parse_command("while true do skip done", &vars()).unwrap();
        let r = eval_cmd(&c, &store(0, 0), &Domain::default(), 8).unwrap();
        assert!(r.exhausted && r.outcomes.is_empty());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let c = parse_command("x := 1 div y", &vars()).unwrap();
        assert_eq!(
            eval_cmd(&c, &store(0, 0), &Domain::default(), 1),
            Err(EvalError::DivByZero)
        );
    }

    #[test]
    fn filtered_havoc_blocks_when_nothing_qualifies() {
        let b = parse_bicom("havF y { x =:= 2 * y }", &vars()).unwrap();
        let dom = Domain::default();
        let r = eval_bicom(&b, &store(1, 0), &store(0, 0), &dom, 1).unwrap();
        assert!(r.outcomes.is_empty());
        assert_eq!(r.blocked, 1);
        let r = eval_bicom(&b, &store(2, 0), &store(0, 0), &dom, 1).unwrap();
        assert_eq!(
            r.outcomes,
            BTreeSet::from([BiOutcome::Normal(store(2, 0), store(0, 1))])
        );
    }

    #[test]
    fn embed_fails_only_after_left_terminates() {
        let vs = vars();
        let b = parse_bicom("< while true do skip done | assert { false } >", &vs).unwrap();
        let r = eval_bicom(&b, &store(0, 0), &store(0, 0), &Domain::default(), 4).unwrap();
        assert!(!r.fails());
        assert!(r.exhausted);
        let b = parse_bicom("< skip | assert { false } >", &vs).unwrap();
        let r = eval_bicom(&b, &store(0, 0), &store(0, 0), &Domain::default(), 4).unwrap();
        assert!(r.fails());
    }

    #[test]
    fn biwhile_fails_on_misalignment() {
        let vs = vars();
        let b = parse_bicom("while x > 0 | y > 0 do |_ x := x - 1; y := y - 1 _| done", &vs).unwrap();
        let dom = Domain::default();
        let r = eval_bicom(&b, &store(2, 2), &store(2, 2), &dom, 8).unwrap();
        assert_eq!(
            r.outcomes,
            BTreeSet::from([BiOutcome::Normal(store(0, 0), store(0, 0))])
        );
        let r = eval_bicom(&b, &store(2, 1), &store(0, 1), &dom, 8).unwrap();
        assert!(r.fails());
    }

    #[test]
    fn snapshot_havf_reaches_values_outside_the_domain() {
        let e = Var::int("$E");
        let filter = |v: Var| {
            RelFormula::cmp(
                BinOp::Eq,
                RelExpr::right_var(v),
                RelExpr::bin(BinOp::Sub, RelExpr::left_var(Var::int("x")), RelExpr::Int(5)),
            )
        };
        let b = Bicom::Havf(e, filter(e));
        let r = eval_bicom(&b, &store(1, 0), &store(0, 0), &Domain::new(-1, 1), 4).unwrap();
        let want = store(0, 0).with(e, Value::Int(-4));
        assert_eq!(r.outcomes, BTreeSet::from([BiOutcome::Normal(store(1, 0), want)]));
        // User variables keep to the domain.
        let b = Bicom::Havf(Var::int("y"), filter(Var::int("y")));
        let r = eval_bicom(&b, &store(1, 0), &store(0, 0), &Domain::new(-1, 1), 4).unwrap();
        assert!(r.outcomes.is_empty());
        assert_eq!(r.blocked, 1);
    }

    #[test]
    fn biwhile_left_only_iterations() {
        let vs = vars();
        let b = parse_bicom(
            "while x > 0 | x > 0 algn *<| x > 1 *<] | false do |_ x := x - 1 _| done",
            &vs,
        )
        .unwrap();
        // Left runs alone while its x exceeds 1, then both sides step together.
        let r = eval_bicom(&b, &store(2, 0), &store(1, 0), &Domain::default(), 8).unwrap();
        assert_eq!(
            r.outcomes,
            BTreeSet::from([BiOutcome::Normal(store(0, 0), store(0, 0))])
        );
    }
}
