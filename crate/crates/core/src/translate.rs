//! Sequential product of a bi-command over renamed copies of the variables.
//!
//! Left variables become `l_x`, right variables `r_x`. The product command
//! has an `assume` that blocks executions, which encodes filtered havoc.

use std::fmt;

use thiserror::Error;

use crate::semantics::Store;
use crate::syntax::*;

pub const LEFT_PREFIX: &str = "l_";
pub const RIGHT_PREFIX: &str = "r_";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProductCommand {
    Skip,
    Assign(Var, Expr),
    Havoc(Var),
    Assert(UFormula),
    Assume(UFormula),
    Seq(Vec<ProductCommand>),
    If(Expr, Box<ProductCommand>, Box<ProductCommand>),
    While(Expr, Box<ProductCommand>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("alignment condition of loop at {} is quantified", show_path(.path))]
    QuantifiedAlignment { path: Path },
}

fn prefix(side: Side) -> &'static str {
    match side {
        Side::Left => LEFT_PREFIX,
        Side::Right => RIGHT_PREFIX,
    }
}

pub fn rename_var(x: Var, side: Side) -> Var {
    x.prefixed(prefix(side))
}

pub fn rename_expr(e: &Expr, side: Side) -> Expr {
    match e {
        Expr::Int(_) | Expr::Bool(_) => e.clone(),
        Expr::Var(x) => Expr::Var(rename_var(*x, side)),
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(rename_expr(a, side))),
        Expr::Binary(op, a, b) => Expr::bin(*op, rename_expr(a, side), rename_expr(b, side)),
    }
}

pub fn rename_uformula(p: &UFormula, side: Side) -> UFormula {
    let r = |q: &UFormula| Box::new(rename_uformula(q, side));
    match p {
        UFormula::Atom(e) => UFormula::Atom(rename_expr(e, side)),
        UFormula::Not(a) => UFormula::Not(r(a)),
        UFormula::And(a, b) => UFormula::And(r(a), r(b)),
        UFormula::Or(a, b) => UFormula::Or(r(a), r(b)),
        UFormula::Implies(a, b) => UFormula::Implies(r(a), r(b)),
        UFormula::Iff(a, b) => UFormula::Iff(r(a), r(b)),
        UFormula::Forall(x, a) => UFormula::Forall(rename_var(*x, side), r(a)),
        UFormula::Exists(x, a) => UFormula::Exists(rename_var(*x, side), r(a)),
    }
}

pub fn rename_command(c: &Command, side: Side) -> ProductCommand {
    match c {
        Command::Skip => ProductCommand::Skip,
        Command::Assign(x, e) => ProductCommand::Assign(rename_var(*x, side), rename_expr(e, side)),
        Command::Havoc(x) => ProductCommand::Havoc(rename_var(*x, side)),
        Command::Assert(p) => ProductCommand::Assert(rename_uformula(p, side)),
        Command::Seq(..) => {
            let mut items = Vec::new();
            flatten_cmd(c, side, &mut items);
            ProductCommand::Seq(items)
        }
        Command::If(e, a, b) => ProductCommand::If(
            rename_expr(e, side),
            Box::new(rename_command(a, side)),
            Box::new(rename_command(b, side)),
        ),
        Command::While(l) => ProductCommand::While(
            rename_expr(&l.test, side),
            Box::new(rename_command(&l.body, side)),
        ),
    }
}

fn flatten_cmd(c: &Command, side: Side, out: &mut Vec<ProductCommand>) {
    match c {
        Command::Seq(a, b) => {
            flatten_cmd(a, side, out);
            flatten_cmd(b, side, out);
        }
        c => out.push(rename_command(c, side)),
    }
}

pub fn relexpr_to_expr(e: &RelExpr) -> Expr {
    match e {
        RelExpr::Left(e) => rename_expr(e, Side::Left),
        RelExpr::Right(e) => rename_expr(e, Side::Right),
        RelExpr::Int(n) => Expr::Int(*n),
        RelExpr::Neg(a) => Expr::neg(relexpr_to_expr(a)),
        RelExpr::Binary(op, a, b) => Expr::bin(*op, relexpr_to_expr(a), relexpr_to_expr(b)),
    }
}

/// A relational formula as a unary formula over the renamed variables.
pub fn embed_product(p: &RelFormula) -> UFormula {
    let r = |q: &RelFormula| Box::new(embed_product(q));
    match p {
        RelFormula::Bool(b) => UFormula::Atom(Expr::Bool(*b)),
        RelFormula::Left(u) => rename_uformula(u, Side::Left),
        RelFormula::Right(u) => rename_uformula(u, Side::Right),
        RelFormula::Cmp(op, a, b) => {
            UFormula::Atom(Expr::bin(*op, relexpr_to_expr(a), relexpr_to_expr(b)))
        }
        RelFormula::Agree(a, b) => UFormula::Atom(Expr::bin(
            BinOp::Eq,
            rename_expr(a, Side::Left),
            rename_expr(b, Side::Right),
        )),
        RelFormula::Not(a) => UFormula::Not(r(a)),
        RelFormula::And(a, b) => UFormula::And(r(a), r(b)),
        RelFormula::Or(a, b) => UFormula::Or(r(a), r(b)),
        RelFormula::Implies(a, b) => UFormula::Implies(r(a), r(b)),
        RelFormula::Iff(a, b) => UFormula::Iff(r(a), r(b)),
        RelFormula::Forall(side, x, a) => UFormula::Forall(rename_var(*x, *side), r(a)),
        RelFormula::Exists(side, x, a) => UFormula::Exists(rename_var(*x, *side), r(a)),
    }
}

/// A quantifier-free formula as a boolean expression.
pub fn uformula_to_expr(p: &UFormula) -> Option<Expr> {
    Some(match p {
        UFormula::Atom(e) => e.clone(),
        UFormula::Not(a) => Expr::not(uformula_to_expr(a)?),
        UFormula::And(a, b) => Expr::bin(BinOp::And, uformula_to_expr(a)?, uformula_to_expr(b)?),
        UFormula::Or(a, b) => Expr::bin(BinOp::Or, uformula_to_expr(a)?, uformula_to_expr(b)?),
        UFormula::Implies(a, b) => Expr::bin(
            BinOp::Or,
            Expr::not(uformula_to_expr(a)?),
            uformula_to_expr(b)?,
        ),
        UFormula::Iff(a, b) => Expr::bin(BinOp::Eq, uformula_to_expr(a)?, uformula_to_expr(b)?),
        UFormula::Forall(..) | UFormula::Exists(..) => return None,
    })
}

fn and(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Bool(true), _) => b,
        (_, Expr::Bool(true)) => a,
        _ => Expr::bin(BinOp::And, a, b),
    }
}

fn push_flat(c: ProductCommand, out: &mut Vec<ProductCommand>) {
    match c {
        ProductCommand::Seq(items) => out.extend(items),
        ProductCommand::Skip => {}
        c => out.push(c),
    }
}

/// The product program of a bi-command.
pub fn to_unary(b: &Bicom) -> Result<ProductCommand, TranslateError> {
    to_unary_at(b, &mut Vec::new())
}

fn to_unary_at(b: &Bicom, path: &mut Path) -> Result<ProductCommand, TranslateError> {
    let child = |i: usize, b: &Bicom, path: &mut Path| {
        path.push(i);
        let r = to_unary_at(b, path);
        path.pop();
        r
    };
    Ok(match b {
        Bicom::Embed(c, d) => {
            let mut items = Vec::new();
            push_flat(rename_command(c, Side::Left), &mut items);
            push_flat(rename_command(d, Side::Right), &mut items);
            seq_or_skip(items)
        }
        Bicom::Assert(p) => ProductCommand::Assert(embed_product(p)),
        Bicom::Havf(x, p) => ProductCommand::Seq(vec![
            ProductCommand::Havoc(rename_var(*x, Side::Right)),
            ProductCommand::Assume(embed_product(p)),
        ]),
        Bicom::Seq(a, b) => {
            let mut items = Vec::new();
            push_flat(child(0, a, path)?, &mut items);
            push_flat(child(1, b, path)?, &mut items);
            seq_or_skip(items)
        }
        Bicom::If { left, right, arms } => {
            let el = rename_expr(left, Side::Left);
            let er = rename_expr(right, Side::Right);
            let mut t = Vec::with_capacity(4);
            for (i, arm) in arms.iter().enumerate() {
                t.push(Box::new(child(i, arm, path)?));
            }
            let [t1, t2, t3, t4]: [Box<ProductCommand>; 4] = t.try_into().expect("four arms");
            ProductCommand::If(
                el,
                Box::new(ProductCommand::If(er.clone(), t1, t2)),
                Box::new(ProductCommand::If(er, t3, t4)),
            )
        }
        Bicom::While(l) => {
            let quantified = || TranslateError::QuantifiedAlignment { path: path.clone() };
            let la = uformula_to_expr(&embed_product(&l.left_align)).ok_or_else(quantified)?;
            let ra = uformula_to_expr(&embed_product(&l.right_align)).ok_or_else(quantified)?;
            let el = rename_expr(&l.left, Side::Left);
            let er = rename_expr(&l.right, Side::Right);
            path.push(0);
            let left = to_unary_at(&crate::structure::bileft(&l.body), path);
            let right = to_unary_at(&crate::structure::biright(&l.body), path);
            let joint = to_unary_at(&l.body, path);
            path.pop();
            let stuck = ProductCommand::Assert(UFormula::ff());
            let dispatch = ProductCommand::If(
                and(el.clone(), la),
                Box::new(left?),
                Box::new(ProductCommand::If(
                    and(er.clone(), ra),
                    Box::new(right?),
                    Box::new(ProductCommand::If(
                        Expr::bin(BinOp::And, el.clone(), er.clone()),
                        Box::new(joint?),
                        Box::new(stuck),
                    )),
                )),
            );
            ProductCommand::While(Expr::bin(BinOp::Or, el, er), Box::new(dispatch))
        }
    })
}

fn seq_or_skip(mut items: Vec<ProductCommand>) -> ProductCommand {
    match items.len() {
        0 => ProductCommand::Skip,
        1 => items.pop().unwrap(),
        _ => ProductCommand::Seq(items),
    }
}

/// Combine a left and a right store into one product store.
pub fn merge(s: &Store, t: &Store) -> Store {
    s.iter()
        .map(|(x, v)| (rename_var(x, Side::Left), v))
        .chain(t.iter().map(|(x, v)| (rename_var(x, Side::Right), v)))
        .collect()
}

/// Inverse of `merge`. Variables without a side prefix are dropped.
pub fn split(s: &Store) -> (Store, Store) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (x, v) in s.iter() {
        if let Some(name) = x.name().strip_prefix(LEFT_PREFIX) {
            left.push((Var::new(name, x.sort()), v));
        } else if let Some(name) = x.name().strip_prefix(RIGHT_PREFIX) {
            right.push((Var::new(name, x.sort()), v));
        }
    }
    (left.into_iter().collect(), right.into_iter().collect())
}

fn product_into(c: &ProductCommand, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match c {
        ProductCommand::Skip => out.push_str(&format!("{pad}skip")),
        ProductCommand::Assign(x, e) => out.push_str(&format!("{pad}{x} := {e}")),
        ProductCommand::Havoc(x) => out.push_str(&format!("{pad}hav {x}")),
        ProductCommand::Assert(p) => out.push_str(&format!("{pad}assert {{ {p} }}")),
        ProductCommand::Assume(p) => out.push_str(&format!("{pad}assume {{ {p} }}")),
        ProductCommand::Seq(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(";\n");
                }
                if matches!(item, ProductCommand::Seq(_)) {
                    out.push_str(&format!("{pad}(\n"));
                    product_into(item, indent + 1, out);
                    out.push_str(&format!("\n{pad})"));
                } else {
                    product_into(item, indent, out);
                }
            }
        }
        ProductCommand::If(e, a, b) => {
            out.push_str(&format!("{pad}if {e} then\n"));
            product_into(a, indent + 1, out);
            out.push_str(&format!("\n{pad}else\n"));
            product_into(b, indent + 1, out);
            out.push_str(&format!("\n{pad}fi"));
        }
        ProductCommand::While(e, body) => {
            out.push_str(&format!("{pad}while {e} do\n"));
            product_into(body, indent + 1, out);
            out.push_str(&format!("\n{pad}done"));
        }
    }
}

impl fmt::Display for ProductCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        product_into(self, 0, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{eval_bicom, eval_product, BiOutcome, Domain, Outcome, Value};

    fn vs() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y")]
    }

    fn store(x: i64, y: i64) -> Store {
        [(Var::int("x"), Value::Int(x)), (Var::int("y"), Value::Int(y))]
            .into_iter()
            .collect()
    }

    #[test]
    fn merge_split_roundtrip() {
        let (s, t) = (store(1, 2), store(-1, 0));
        let m = merge(&s, &t);
        assert_eq!(m.to_string(), "{l_x=1, l_y=2, r_x=-1, r_y=0}");
        assert_eq!(split(&m), (s, t));
    }

    #[test]
    fn agreement_renames_both_sides() {
        let p = parse_rformula("x =:= y /\\ exists |x. [> x > y |>", &vs()).unwrap();
        assert_eq!(
            embed_product(&p).to_string(),
            "l_x = r_y /\\ (exists r_x. r_x > r_y)"
        );
    }

    #[test]
    fn havf_becomes_assume() {
        let b = parse_bicom("< hav x | skip >; havF y { x =:= y }", &vs()).unwrap();
        let p = to_unary(&b).unwrap();
        assert_eq!(p.to_string(), "hav l_x;\nhav r_y;\nassume { l_x = r_y }");
    }

    #[test]
    fn biwhile_matches_direct_semantics() {
        let b = parse_bicom(
            "while x > 0 | y > 0 algn *<| x > y *<] | [> y > x |> do |_ x := x - 1; y := y - 1 _| done",
            &vs(),
        )
        .unwrap();
        let p = to_unary(&b).unwrap();
        let dom = Domain::default();
        for (x, y) in [(2, 0), (0, 2), (2, 2), (1, 2)] {
            let s = store(x, 0);
            let t = store(0, y);
            let direct = eval_bicom(&b, &s, &t, &dom, 8).unwrap();
            let via = eval_product(&p, &merge(&s, &t), &dom, 8).unwrap();
            let mapped: std::collections::BTreeSet<BiOutcome> = via
                .outcomes
                .iter()
                .map(|o| match o {
                    Outcome::Normal(m) => {
                        let (a, b) = split(m);
                        BiOutcome::Normal(a, b)
                    }
                    Outcome::Fail => BiOutcome::Fail,
                })
                .collect();
            assert_eq!(mapped, direct.outcomes);
            assert_eq!(via.exhausted, direct.exhausted);
        }
    }

    #[test]
    fn quantified_alignment_rejected() {
        let b = parse_bicom(
            "|_ skip _|; while x > 0 | y > 0 algn exists x|. *<| x > 0 *<] | false do |_ x := x - 1 _| done",
            &vs(),
        )
        .unwrap();
        assert_eq!(
            to_unary(&b),
            Err(TranslateError::QuantifiedAlignment { path: vec![1] })
        );
    }
}
