//! Evaluation, free variables and substitution for unary and relational
//! assertions.

use std::collections::BTreeSet;

use crate::semantics::{arith, compare, eval_bool, eval_expr, Domain, EvalResultOf, Store, Value};
use crate::syntax::*;

pub fn eval_uformula(p: &UFormula, s: &Store, dom: &Domain) -> EvalResultOf<bool> {
    Ok(match p {
        UFormula::Atom(e) => eval_bool(e, s)?,
        UFormula::Not(a) => !eval_uformula(a, s, dom)?,
        UFormula::And(a, b) => eval_uformula(a, s, dom)? && eval_uformula(b, s, dom)?,
        UFormula::Or(a, b) => eval_uformula(a, s, dom)? || eval_uformula(b, s, dom)?,
        UFormula::Implies(a, b) => !eval_uformula(a, s, dom)? || eval_uformula(b, s, dom)?,
        UFormula::Iff(a, b) => eval_uformula(a, s, dom)? == eval_uformula(b, s, dom)?,
        UFormula::Forall(x, a) => {
            for v in dom.values(x.sort()) {
                if !eval_uformula(a, &s.with(*x, v), dom)? {
                    return Ok(false);
                }
            }
            true
        }
        UFormula::Exists(x, a) => {
            for v in dom.values(x.sort()) {
                if eval_uformula(a, &s.with(*x, v), dom)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

pub fn eval_relexpr(e: &RelExpr, s: &Store, t: &Store) -> EvalResultOf<i64> {
    let as_int = |v: Value| match v {
        Value::Int(n) => Ok(n),
        Value::Bool(_) => Err(crate::semantics::EvalError::IllSorted),
    };
    match e {
        RelExpr::Left(e) => as_int(eval_expr(e, s)?),
        RelExpr::Right(e) => as_int(eval_expr(e, t)?),
        RelExpr::Int(n) => Ok(*n),
        RelExpr::Neg(a) => eval_relexpr(a, s, t)?
            .checked_neg()
            .ok_or(crate::semantics::EvalError::Overflow),
        RelExpr::Binary(op, a, b) => arith(*op, eval_relexpr(a, s, t)?, eval_relexpr(b, s, t)?),
    }
}

/// Truth of `p` at the pair (left store `s`, right store `t`).
pub fn eval_rformula(p: &RelFormula, s: &Store, t: &Store, dom: &Domain) -> EvalResultOf<bool> {
    Ok(match p {
        RelFormula::Bool(b) => *b,
        RelFormula::Left(u) => eval_uformula(u, s, dom)?,
        RelFormula::Right(u) => eval_uformula(u, t, dom)?,
        RelFormula::Cmp(op, a, b) => compare(
            *op,
            Value::Int(eval_relexpr(a, s, t)?),
            Value::Int(eval_relexpr(b, s, t)?),
        )?,
        RelFormula::Agree(a, b) => eval_expr(a, s)? == eval_expr(b, t)?,
        RelFormula::Not(a) => !eval_rformula(a, s, t, dom)?,
        RelFormula::And(a, b) => eval_rformula(a, s, t, dom)? && eval_rformula(b, s, t, dom)?,
        RelFormula::Or(a, b) => eval_rformula(a, s, t, dom)? || eval_rformula(b, s, t, dom)?,
        RelFormula::Implies(a, b) => {
            !eval_rformula(a, s, t, dom)? || eval_rformula(b, s, t, dom)?
        }
        RelFormula::Iff(a, b) => eval_rformula(a, s, t, dom)? == eval_rformula(b, s, t, dom)?,
        RelFormula::Forall(side, x, a) => {
            for v in dom.values(x.sort()) {
                let holds = match side {
                    Side::Left => eval_rformula(a, &s.with(*x, v), t, dom)?,
                    Side::Right => eval_rformula(a, s, &t.with(*x, v), dom)?,
                };
                if !holds {
                    return Ok(false);
                }
            }
            true
        }
        RelFormula::Exists(side, x, a) => {
            for v in dom.values(x.sort()) {
                let holds = match side {
                    Side::Left => eval_rformula(a, &s.with(*x, v), t, dom)?,
                    Side::Right => eval_rformula(a, s, &t.with(*x, v), dom)?,
                };
                if holds {
                    return Ok(true);
                }
            }
            false
        }
    })
}

// ---- free variables ----

pub fn fv_expr_into(e: &Expr, out: &mut BTreeSet<Var>) {
    match e {
        Expr::Int(_) | Expr::Bool(_) => {}
        Expr::Var(x) => {
            out.insert(*x);
        }
        Expr::Unary(_, a) => fv_expr_into(a, out),
        Expr::Binary(_, a, b) => {
            fv_expr_into(a, out);
            fv_expr_into(b, out);
        }
    }
}

pub fn fv_expr(e: &Expr) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    fv_expr_into(e, &mut out);
    out
}

pub fn fv_uformula(p: &UFormula) -> BTreeSet<Var> {
    match p {
        UFormula::Atom(e) => fv_expr(e),
        UFormula::Not(a) => fv_uformula(a),
        UFormula::And(a, b) | UFormula::Or(a, b) | UFormula::Implies(a, b) | UFormula::Iff(a, b) => {
            let mut out = fv_uformula(a);
            out.extend(fv_uformula(b));
            out
        }
        UFormula::Forall(x, a) | UFormula::Exists(x, a) => {
            let mut out = fv_uformula(a);
            out.remove(x);
            out
        }
    }
}

pub fn fv_relexpr(e: &RelExpr, side: Side) -> BTreeSet<Var> {
    match e {
        RelExpr::Left(e) if side == Side::Left => fv_expr(e),
        RelExpr::Right(e) if side == Side::Right => fv_expr(e),
        RelExpr::Left(_) | RelExpr::Right(_) | RelExpr::Int(_) => BTreeSet::new(),
        RelExpr::Neg(a) => fv_relexpr(a, side),
        RelExpr::Binary(_, a, b) => {
            let mut out = fv_relexpr(a, side);
            out.extend(fv_relexpr(b, side));
            out
        }
    }
}

/// Free variables of `p` read from the given side's store.
pub fn fv_side(p: &RelFormula, side: Side) -> BTreeSet<Var> {
    match p {
        RelFormula::Bool(_) => BTreeSet::new(),
        RelFormula::Left(u) if side == Side::Left => fv_uformula(u),
        RelFormula::Right(u) if side == Side::Right => fv_uformula(u),
        RelFormula::Left(_) | RelFormula::Right(_) => BTreeSet::new(),
        RelFormula::Cmp(_, a, b) => {
            let mut out = fv_relexpr(a, side);
            out.extend(fv_relexpr(b, side));
            out
        }
        RelFormula::Agree(a, b) => match side {
            Side::Left => fv_expr(a),
            Side::Right => fv_expr(b),
        },
        RelFormula::Not(a) => fv_side(a, side),
        RelFormula::And(a, b)
        | RelFormula::Or(a, b)
        | RelFormula::Implies(a, b)
        | RelFormula::Iff(a, b) => {
            let mut out = fv_side(a, side);
            out.extend(fv_side(b, side));
            out
        }
        RelFormula::Forall(s, x, a) | RelFormula::Exists(s, x, a) => {
            let mut out = fv_side(a, side);
            if *s == side {
                out.remove(x);
            }
            out
        }
    }
}

pub fn fv_left(p: &RelFormula) -> Vec<Var> {
    fv_side(p, Side::Left).into_iter().collect()
}

pub fn fv_right(p: &RelFormula) -> Vec<Var> {
    fv_side(p, Side::Right).into_iter().collect()
}

/// Every variable name occurring in `p`, bound or free, on either side.
fn names_into_u(p: &UFormula, out: &mut BTreeSet<Var>) {
    match p {
        UFormula::Atom(e) => fv_expr_into(e, out),
        UFormula::Not(a) => names_into_u(a, out),
        UFormula::And(a, b) | UFormula::Or(a, b) | UFormula::Implies(a, b) | UFormula::Iff(a, b) => {
            names_into_u(a, out);
            names_into_u(b, out);
        }
        UFormula::Forall(x, a) | UFormula::Exists(x, a) => {
            out.insert(*x);
            names_into_u(a, out);
        }
    }
}

fn names_into_re(e: &RelExpr, out: &mut BTreeSet<Var>) {
    match e {
        RelExpr::Left(e) | RelExpr::Right(e) => fv_expr_into(e, out),
        RelExpr::Int(_) => {}
        RelExpr::Neg(a) => names_into_re(a, out),
        RelExpr::Binary(_, a, b) => {
            names_into_re(a, out);
            names_into_re(b, out);
        }
    }
}

fn names_into_r(p: &RelFormula, out: &mut BTreeSet<Var>) {
    match p {
        RelFormula::Bool(_) => {}
        RelFormula::Left(u) | RelFormula::Right(u) => names_into_u(u, out),
        RelFormula::Cmp(_, a, b) => {
            names_into_re(a, out);
            names_into_re(b, out);
        }
        RelFormula::Agree(a, b) => {
            fv_expr_into(a, out);
            fv_expr_into(b, out);
        }
        RelFormula::Not(a) => names_into_r(a, out),
        RelFormula::And(a, b)
        | RelFormula::Or(a, b)
        | RelFormula::Implies(a, b)
        | RelFormula::Iff(a, b) => {
            names_into_r(a, out);
            names_into_r(b, out);
        }
        RelFormula::Forall(_, x, a) | RelFormula::Exists(_, x, a) => {
            out.insert(*x);
            names_into_r(a, out);
        }
    }
}

/// A `$q<n>` variable of the given sort whose name is not in `avoid`.
fn fresh(sort: Sort, avoid: &BTreeSet<Var>) -> Var {
    let taken: BTreeSet<&str> = avoid.iter().map(|v| v.name()).collect();
    (0..)
        .map(|n| format!("{RESERVED_PREFIX}q{n}"))
        .find(|name| !taken.contains(name.as_str()))
        .map(|name| Var::new(&name, sort))
        .expect("unbounded supply of names")
}

// ---- substitution ----

pub fn subst_expr(e: &Expr, x: Var, r: &Expr) -> Expr {
    match e {
        Expr::Var(y) if *y == x => r.clone(),
        Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => e.clone(),
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(subst_expr(a, x, r))),
        Expr::Binary(op, a, b) => Expr::bin(*op, subst_expr(a, x, r), subst_expr(b, x, r)),
    }
}

/// Capture-avoiding `p[r/x]`.
pub fn subst_uformula(p: &UFormula, x: Var, r: &Expr) -> UFormula {
    let rfv = fv_expr(r);
    subst_u(p, x, r, &rfv)
}

fn subst_u(p: &UFormula, x: Var, r: &Expr, rfv: &BTreeSet<Var>) -> UFormula {
    let go = |a: &UFormula| Box::new(subst_u(a, x, r, rfv));
    match p {
        UFormula::Atom(e) => UFormula::Atom(subst_expr(e, x, r)),
        UFormula::Not(a) => UFormula::Not(go(a)),
        UFormula::And(a, b) => UFormula::And(go(a), go(b)),
        UFormula::Or(a, b) => UFormula::Or(go(a), go(b)),
        UFormula::Implies(a, b) => UFormula::Implies(go(a), go(b)),
        UFormula::Iff(a, b) => UFormula::Iff(go(a), go(b)),
        UFormula::Forall(y, a) | UFormula::Exists(y, a) => {
            let forall = matches!(p, UFormula::Forall(..));
            let rebuild = |y: Var, body: UFormula| {
                if forall {
                    UFormula::Forall(y, Box::new(body))
                } else {
                    UFormula::Exists(y, Box::new(body))
                }
            };
            if *y == x || !fv_uformula(a).contains(&x) {
                return p.clone();
            }
            if rfv.contains(y) {
                let mut avoid = rfv.clone();
                names_into_u(a, &mut avoid);
                avoid.insert(x);
                let y1 = fresh(y.sort(), &avoid);
                let renamed = subst_u(a, *y, &Expr::Var(y1), &BTreeSet::from([y1]));
                return rebuild(y1, subst_u(&renamed, x, r, rfv));
            }
            rebuild(*y, subst_u(a, x, r, rfv))
        }
    }
}

fn subst_relexpr(e: &RelExpr, side: Side, x: Var, r: &Expr) -> RelExpr {
    match e {
        RelExpr::Left(e) if side == Side::Left => RelExpr::Left(subst_expr(e, x, r)),
        RelExpr::Right(e) if side == Side::Right => RelExpr::Right(subst_expr(e, x, r)),
        RelExpr::Left(_) | RelExpr::Right(_) | RelExpr::Int(_) => e.clone(),
        RelExpr::Neg(a) => RelExpr::Neg(Box::new(subst_relexpr(a, side, x, r))),
        RelExpr::Binary(op, a, b) => RelExpr::bin(
            *op,
            subst_relexpr(a, side, x, r),
            subst_relexpr(b, side, x, r),
        ),
    }
}

/// Capture-avoiding substitution of the `side` copy of `x` by `r`, which is
/// evaluated in that side's store.
pub fn subst_side(p: &RelFormula, side: Side, x: Var, r: &Expr) -> RelFormula {
    let rfv = fv_expr(r);
    subst_r(p, side, x, r, &rfv)
}

pub fn subst_left(p: &RelFormula, x: Var, r: &Expr) -> RelFormula {
    subst_side(p, Side::Left, x, r)
}

pub fn subst_right(p: &RelFormula, x: Var, r: &Expr) -> RelFormula {
    subst_side(p, Side::Right, x, r)
}

fn subst_r(p: &RelFormula, side: Side, x: Var, r: &Expr, rfv: &BTreeSet<Var>) -> RelFormula {
    let go = |a: &RelFormula| Box::new(subst_r(a, side, x, r, rfv));
    match p {
        RelFormula::Bool(_) => p.clone(),
        RelFormula::Left(u) if side == Side::Left => RelFormula::Left(subst_u(u, x, r, rfv)),
        RelFormula::Right(u) if side == Side::Right => RelFormula::Right(subst_u(u, x, r, rfv)),
        RelFormula::Left(_) | RelFormula::Right(_) => p.clone(),
        RelFormula::Cmp(op, a, b) => RelFormula::Cmp(
            *op,
            subst_relexpr(a, side, x, r),
            subst_relexpr(b, side, x, r),
        ),
        RelFormula::Agree(a, b) => match side {
            Side::Left => RelFormula::Agree(subst_expr(a, x, r), b.clone()),
            Side::Right => RelFormula::Agree(a.clone(), subst_expr(b, x, r)),
        },
        RelFormula::Not(a) => RelFormula::Not(go(a)),
        RelFormula::And(a, b) => RelFormula::And(go(a), go(b)),
        RelFormula::Or(a, b) => RelFormula::Or(go(a), go(b)),
        RelFormula::Implies(a, b) => RelFormula::Implies(go(a), go(b)),
        RelFormula::Iff(a, b) => RelFormula::Iff(go(a), go(b)),
        RelFormula::Forall(qside, y, a) | RelFormula::Exists(qside, y, a) => {
            let forall = matches!(p, RelFormula::Forall(..));
            let rebuild = |y: Var, body: RelFormula| {
                if forall {
                    RelFormula::Forall(*qside, y, Box::new(body))
                } else {
                    RelFormula::Exists(*qside, y, Box::new(body))
                }
            };
            if *qside != side {
                return rebuild(*y, subst_r(a, side, x, r, rfv));
            }
            if *y == x || !fv_side(a, side).contains(&x) {
                return p.clone();
            }
            if rfv.contains(y) {
                let mut avoid = rfv.clone();
                names_into_r(a, &mut avoid);
                avoid.insert(x);
                let y1 = fresh(y.sort(), &avoid);
                let renamed = subst_r(a, side, *y, &Expr::Var(y1), &BTreeSet::from([y1]));
                return rebuild(y1, subst_r(&renamed, side, x, r, rfv));
            }
            rebuild(*y, subst_r(a, side, x, r, rfv))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Value;

    fn vs() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y"), Var::int("z")]
    }

    fn st(pairs: &[(&str, i64)]) -> Store {
        pairs
            .iter()
            .map(|(n, v)| (Var::int(n), Value::Int(*v)))
            .collect()
    }

    #[test]
    fn one_sided_quantifiers() {
        let p = parse_rformula("exists |y. x =:= 2 * y", &vs()).unwrap();
        let dom = Domain::default();
        assert!(eval_rformula(&p, &st(&[("x", 2)]), &st(&[("y", 0)]), &dom).unwrap());
        assert!(!eval_rformula(&p, &st(&[("x", 1)]), &st(&[("y", 0)]), &dom).unwrap());
    }

    #[test]
    fn free_variables_by_side() {
        let p = parse_rformula("forall |y. x =:= y /\\ [> z > 0 |> /\\ *<| y *<] < 3", &vs()).unwrap();
        assert_eq!(fv_left(&p), vec![Var::int("x"), Var::int("y")]);
        assert_eq!(fv_right(&p), vec![Var::int("z")]);
    }

    #[test]
    fn substitution_renames_captured_binder() {
        let p = parse_rformula("exists |y. [> x + y = 0 |>", &vs()).unwrap();
        let r = parse_expr("y + 1", &vs()).unwrap();
        let q = subst_right(&p, Var::int("x"), &r);
        match &q {
            RelFormula::Exists(Side::Right, b, _) => assert_ne!(*b, Var::int("y")),
            other => panic!("unexpected {other}"),
        }
        // Semantics: q holds at t iff p holds at t[x := y + 1].
        let dom = Domain::new(-3, 3);
        for y in -2..=2 {
            let t = st(&[("x", 0), ("y", y)]);
            let t1 = st(&[("x", y + 1), ("y", y)]);
            let s = st(&[]);
            assert_eq!(
                eval_rformula(&q, &s, &t, &dom).unwrap(),
                eval_rformula(&p, &s, &t1, &dom).unwrap()
            );
        }
    }

    #[test]
    fn substitution_respects_sides() {
        let p = parse_rformula("x =:= x", &vs()).unwrap();
        let q = subst_left(&p, Var::int("x"), &Expr::Int(5));
        assert_eq!(q.to_string(), "5 =:= x");
        let q = subst_right(&p, Var::int("x"), &Expr::Int(5));
        assert_eq!(q.to_string(), "x =:= 5");
    }
}
