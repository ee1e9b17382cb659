//! SMT-LIB emission and an external solver driver.
//!
//! Each obligation is checked by asserting its negation over integer
//! arithmetic. `sat` means the obligation has a counterexample, which is
//! read back from the model and replayed on the concrete semantics.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::process::{Command as Process, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::assertions::{eval_rformula, fv_uformula};
use crate::semantics::{Domain, EvalResultOf, Store, Value};
use crate::syntax::*;
use crate::translate::{embed_product, split};

use super::Obligation;

/// Environment variable holding the solver command line.
pub const SOLVER_ENV: &str = "BIVER_SOLVER";
pub const DEFAULT_SOLVER: &str = "z3 -in";

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("cannot start solver `{cmd}`: {source}")]
    Launch {
        cmd: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    pub fn new(command: &str, timeout: Duration) -> SolverConfig {
        SolverConfig {
            command: command.split_whitespace().map(str::to_string).collect(),
            timeout,
        }
    }

    /// `$BIVER_SOLVER` if set, otherwise `z3 -in`.
    pub fn from_env(timeout: Duration) -> SolverConfig {
        let cmd = std::env::var(SOLVER_ENV).unwrap_or_else(|_| DEFAULT_SOLVER.to_string());
        SolverConfig::new(&cmd, timeout)
    }

    /// Whether the solver can be started at all.
    pub fn available(&self) -> bool {
        run_solver(self, "(check-sat)\n").is_ok()
    }
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig::from_env(Duration::from_secs(10))
    }
}

pub type Model = BTreeMap<String, Value>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverAnswer {
    /// The negated obligation is unsatisfiable: the obligation is valid.
    Unsat,
    Sat(Model),
    Unknown(String),
}

fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_$.~!@%^&*+-/<>=?".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn smt_sort(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::Bool => "Bool",
    }
}

fn int_lit(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

pub fn expr_smt(e: &Expr) -> String {
    match e {
        Expr::Int(n) => int_lit(*n),
        Expr::Bool(b) => b.to_string(),
        Expr::Var(x) => symbol(x.name()),
        Expr::Unary(UnOp::Neg, a) => format!("(- {})", expr_smt(a)),
        Expr::Unary(UnOp::Not, a) => format!("(not {})", expr_smt(a)),
        Expr::Binary(BinOp::Ne, a, b) => format!("(not (= {} {}))", expr_smt(a), expr_smt(b)),
        Expr::Binary(op, a, b) => {
            let f = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "div",
                BinOp::Mod => "mod",
                BinOp::Eq => "=",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::And => "and",
                BinOp::Or => "or",
                BinOp::Ne => unreachable!(),
            };
            format!("({f} {} {})", expr_smt(a), expr_smt(b))
        }
    }
}

pub fn uformula_smt(p: &UFormula) -> String {
    match p {
        UFormula::Atom(e) => expr_smt(e),
        UFormula::Not(a) => format!("(not {})", uformula_smt(a)),
        UFormula::And(a, b) => format!("(and {} {})", uformula_smt(a), uformula_smt(b)),
        UFormula::Or(a, b) => format!("(or {} {})", uformula_smt(a), uformula_smt(b)),
        UFormula::Implies(a, b) => format!("(=> {} {})", uformula_smt(a), uformula_smt(b)),
        UFormula::Iff(a, b) => format!("(= {} {})", uformula_smt(a), uformula_smt(b)),
        UFormula::Forall(x, a) => format!(
            "(forall (({} {})) {})",
            symbol(x.name()),
            smt_sort(x.sort()),
            uformula_smt(a)
        ),
        UFormula::Exists(x, a) => format!(
            "(exists (({} {})) {})",
            symbol(x.name()),
            smt_sort(x.sort()),
            uformula_smt(a)
        ),
    }
}

/// A complete script checking validity of `p`.
pub fn script(p: &RelFormula) -> String {
    let u = embed_product(p);
    let mut out = String::from("(set-logic ALL)\n");
    for x in fv_uformula(&u) {
        out.push_str(&format!(
            "(declare-const {} {})\n",
            symbol(x.name()),
            smt_sort(x.sort())
        ));
    }
    out.push_str(&format!("(assert (not {}))\n(check-sat)\n(get-model)\n", uformula_smt(&u)));
    out
}

/// Run the solver on a script, killing it after the timeout.
pub fn run_solver(cfg: &SolverConfig, script: &str) -> Result<SolverAnswer, SolverError> {
    let (prog, args) = cfg.command.split_first().ok_or(SolverError::EmptyCommand)?;
    let mut child = Process::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|source| SolverError::Launch {
            cmd: cfg.command.join(" "),
            source,
        })?;
    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        // A solver that exits early closes the pipe; its answer is still read below.
        let _ = stdin.write_all(script.as_bytes());
    }
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + cfg.timeout;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            let _ = reader.join();
            return Ok(SolverAnswer::Unknown("timeout".to_string()));
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    let out = reader.join().unwrap_or_default();
    Ok(parse_answer(&out))
}

pub fn parse_answer(out: &str) -> SolverAnswer {
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    let Some(first) = lines.next() else {
        return SolverAnswer::Unknown("no output".to_string());
    };
    match first {
        "unsat" => SolverAnswer::Unsat,
        "sat" => {
            let rest: Vec<&str> = lines.collect();
            SolverAnswer::Sat(parse_model(&rest.join("\n")))
        }
        "unknown" => SolverAnswer::Unknown("unknown".to_string()),
        other => SolverAnswer::Unknown(other.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(src: &str) -> Vec<Sexp> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                if stack.len() > 1 {
                    let done = stack.pop().unwrap();
                    stack.last_mut().unwrap().push(Sexp::List(done));
                }
            }
            '|' => {
                let mut s = String::new();
                for d in chars.by_ref() {
                    if d == '|' {
                        break;
                    }
                    s.push(d);
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            '"' => {
                for d in chars.by_ref() {
                    if d == '"' {
                        break;
                    }
                }
            }
            ';' => {
                for d in chars.by_ref() {
                    if d == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = c.to_string();
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
        }
    }
    while stack.len() > 1 {
        let done = stack.pop().unwrap();
        stack.last_mut().unwrap().push(Sexp::List(done));
    }
    stack.pop().unwrap()
}

fn sexp_value(e: &Sexp) -> Option<Value> {
    match e {
        Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
        Sexp::Atom(a) => a.parse().ok().map(Value::Int),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(m), x] if m == "-" => match sexp_value(x)? {
                Value::Int(n) => Some(Value::Int(n.checked_neg()?)),
                Value::Bool(_) => None,
            },
            _ => None,
        },
    }
}

fn collect_defs(e: &Sexp, out: &mut Model) {
    if let Sexp::List(items) = e {
        if let [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), _sort, value] = items.as_slice() {
            if kw == "define-fun" && args.is_empty() {
                if let Some(v) = sexp_value(value) {
                    out.insert(name.clone(), v);
                }
                return;
            }
        }
        for item in items {
            collect_defs(item, out);
        }
    }
}

/// Constant definitions in a `get-model` response. Values the parser does
/// not understand are skipped.
pub fn parse_model(src: &str) -> Model {
    let mut out = Model::new();
    for e in parse_sexps(src) {
        collect_defs(&e, &mut out);
    }
    out
}

/// Left and right stores for the free variables of `p` read from a model.
/// Variables the model leaves out get their default value.
pub fn model_stores(p: &RelFormula, model: &Model) -> (Store, Store) {
    let u = embed_product(p);
    let merged: Store = fv_uformula(&u)
        .into_iter()
        .map(|x| {
            let v = model
                .get(x.name())
                .copied()
                .filter(|v| v.sort() == x.sort())
                .unwrap_or_else(|| Value::default_of(x.sort()));
            (x, v)
        })
        .collect();
    split(&merged)
}

/// Evaluate the obligation at the model's stores. Quantifiers range over
/// `dom` widened to cover every model value.
pub fn replay(p: &RelFormula, model: &Model, dom: &Domain) -> EvalResultOf<(Store, Store, bool)> {
    let (s, t) = model_stores(p, model);
    let mut lo = dom.lo;
    let mut hi = dom.hi;
    for v in s.iter().chain(t.iter()).map(|(_, v)| v) {
        if let Value::Int(n) = v {
            lo = lo.min(n);
            hi = hi.max(n);
        }
    }
    let holds = eval_rformula(p, &s, &t, &Domain::new(lo, hi))?;
    Ok((s, t, holds))
}

#[derive(Clone, Debug)]
pub struct ObligationResult {
    pub obligation: Obligation,
    pub answer: SolverAnswer,
    /// For `sat` answers: the counterexample stores and whether the
    /// obligation still holds there on the concrete semantics.
    pub replay: Option<(Store, Store, bool)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmtVerdict {
    Verified,
    Refuted,
    Unknown,
}

/// Solve each obligation in order.
pub fn check_obligations(
    obligations: &[Obligation],
    cfg: &SolverConfig,
    dom: &Domain,
) -> Result<(SmtVerdict, Vec<ObligationResult>), SolverError> {
    let mut results = Vec::with_capacity(obligations.len());
    for ob in obligations {
        let answer = run_solver(cfg, &script(&ob.formula))?;
        let replay = match &answer {
            SolverAnswer::Sat(m) => replay(&ob.formula, m, dom).ok(),
            _ => None,
        };
        results.push(ObligationResult {
            obligation: ob.clone(),
            answer,
            replay,
        });
    }
    let verdict = if results.iter().all(|r| r.answer == SolverAnswer::Unsat) {
        SmtVerdict::Verified
    } else if results.iter().any(|r| matches!(r.answer, SolverAnswer::Sat(_))) {
        SmtVerdict::Refuted
    } else {
        SmtVerdict::Unknown
    };
    Ok((verdict, results))
}

/// Names declared by a script, for tests and diagnostics.
pub fn declared(script: &str) -> BTreeSet<String> {
    parse_sexps(script)
        .into_iter()
        .filter_map(|e| match e {
            Sexp::List(items) => match items.as_slice() {
                [Sexp::Atom(kw), Sexp::Atom(name), _] if kw == "declare-const" => Some(name.clone()),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y"), Var::boolean("b")]
    }

    #[test]
    fn emits_negated_obligation() {
        let p = parse_rformula("forall x|. exists |y. x =:= 2 * y", &vs()).unwrap();
        let s = script(&p);
        assert!(s.contains("(assert (not (forall ((l_x Int)) (exists ((r_y Int)) (= l_x (* 2 r_y))))))"), "{s}");
        assert!(declared(&s).is_empty());
        let q = parse_rformula("x =:= y /\\ [> b |> /\\ *<| x <> -3 *<]", &vs()).unwrap();
        let s = script(&q);
        assert_eq!(
            declared(&s),
            BTreeSet::from(["l_x".to_string(), "r_b".to_string(), "r_y".to_string()])
        );
        assert!(s.contains("(not (= l_x (- 3)))"), "{s}");
    }

    #[test]
    fn parses_z3_model() {
        let out = "sat\n(\n  (define-fun r_y () Int\n    (- 2))\n  (define-fun l_x () Int\n    1)\n  (define-fun r_b () Bool\n    true)\n)\n";
        let SolverAnswer::Sat(m) = parse_answer(out) else {
            panic!("expected sat")
        };
        assert_eq!(m["r_y"], Value::Int(-2));
        assert_eq!(m["l_x"], Value::Int(1));
        assert_eq!(m["r_b"], Value::Bool(true));
        assert_eq!(parse_answer("unsat\n(error \"model is not available\")"), SolverAnswer::Unsat);
        assert!(matches!(parse_answer(""), SolverAnswer::Unknown(_)));
    }

    #[test]
    fn replay_confirms_counterexample() {
        let p = parse_rformula("x =:= y", &vs()).unwrap();
        let m = Model::from([("l_x".to_string(), Value::Int(1)), ("r_y".to_string(), Value::Int(7))]);
        let (s, t, holds) = replay(&p, &m, &Domain::default()).unwrap();
        assert!(!holds);
        assert_eq!(s.to_string(), "{x=1}");
        assert_eq!(t.to_string(), "{y=7}");
    }

    #[test]
    fn missing_solver_is_a_launch_error() {
        let cfg = SolverConfig::new("/nonexistent/solver", Duration::from_secs(1));
        assert!(matches!(run_solver(&cfg, "(check-sat)"), Err(SolverError::Launch { .. })));
        assert!(!cfg.available());
    }
}
