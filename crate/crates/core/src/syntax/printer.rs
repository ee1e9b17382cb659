//! Concrete-syntax printing. Output re-parses to the same tree.

use std::fmt::{self, Write};

use super::ast::*;

fn binop_token(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "div",
        BinOp::Mod => "mod",
        BinOp::Eq => "=",
        BinOp::Ne => "<>",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::And => "&&",
        BinOp::Or => "||",
    }
}

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
    }
}

fn paren(s: String, wrap: bool) -> String {
    if wrap {
        format!("({s})")
    } else {
        s
    }
}

/// `gt_paren` wraps every `>` comparison; used where a bare `>` would close
/// an embed.
fn expr_at(e: &Expr, min: u8, gt_paren: bool) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Bool(b) => b.to_string(),
        Expr::Var(x) => x.name().to_string(),
        Expr::Unary(op, a) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            let inner = match (op, a.as_ref()) {
                (UnOp::Neg, Expr::Int(n)) => format!("({n})"),
                _ => expr_at(a, 6, gt_paren),
            };
            paren(format!("{sym}{inner}"), min > 6)
        }
        Expr::Binary(op, a, b) => {
            let p = binop_prec(*op);
            let (lmin, rmin) = if op.is_comparison() { (p + 1, p + 1) } else { (p, p + 1) };
            let s = format!(
                "{} {} {}",
                expr_at(a, lmin, gt_paren),
                binop_token(*op),
                expr_at(b, rmin, gt_paren)
            );
            paren(s, min > p || (gt_paren && *op == BinOp::Gt))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&expr_at(self, 0, false))
    }
}

fn uformula_at(p: &UFormula, min: u8) -> String {
    match p {
        UFormula::Atom(e) => expr_at(e, 0, false),
        UFormula::Not(a) => paren(format!("not {}", uformula_at(a, 5)), min > 5),
        UFormula::And(a, b) => paren(
            format!("{} /\\ {}", uformula_at(a, 4), uformula_at(b, 5)),
            min > 4,
        ),
        UFormula::Or(a, b) => paren(
            format!("{} \\/ {}", uformula_at(a, 3), uformula_at(b, 4)),
            min > 3,
        ),
        UFormula::Implies(a, b) => paren(
            format!("{} -> {}", uformula_at(a, 3), uformula_at(b, 2)),
            min > 2,
        ),
        UFormula::Iff(a, b) => paren(
            format!("{} <-> {}", uformula_at(a, 2), uformula_at(b, 1)),
            min > 1,
        ),
        UFormula::Forall(x, a) => paren(format!("forall {x}. {}", uformula_at(a, 0)), min > 0),
        UFormula::Exists(x, a) => paren(format!("exists {x}. {}", uformula_at(a, 0)), min > 0),
    }
}

impl fmt::Display for UFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&uformula_at(self, 0))
    }
}

fn relexpr_at(e: &RelExpr, min: u8) -> String {
    match e {
        RelExpr::Int(n) => n.to_string(),
        RelExpr::Left(e) => format!("*<| {e} *<]"),
        RelExpr::Right(e) => format!("[> {e} |>"),
        RelExpr::Neg(a) => {
            let inner = match a.as_ref() {
                RelExpr::Int(n) => format!("({n})"),
                _ => relexpr_at(a, 6),
            };
            paren(format!("-{inner}"), min > 6)
        }
        RelExpr::Binary(op, a, b) => {
            let p = binop_prec(*op);
            paren(
                format!(
                    "{} {} {}",
                    relexpr_at(a, p),
                    binop_token(*op),
                    relexpr_at(b, p + 1)
                ),
                min > p,
            )
        }
    }
}

impl fmt::Display for RelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&relexpr_at(self, 0))
    }
}

fn quantifier(forall: bool, side: Side, x: Var) -> String {
    let q = if forall { "forall" } else { "exists" };
    match side {
        Side::Left => format!("{q} {x}|."),
        Side::Right => format!("{q} |{x}."),
    }
}

fn rformula_at(p: &RelFormula, min: u8) -> String {
    match p {
        RelFormula::Bool(b) => b.to_string(),
        RelFormula::Left(u) => format!("*<| {u} *<]"),
        RelFormula::Right(u) => format!("[> {u} |>"),
        RelFormula::Cmp(op, a, b) => paren(
            format!("{} {} {}", relexpr_at(a, 4), binop_token(*op), relexpr_at(b, 4)),
            min > 6,
        ),
        RelFormula::Agree(a, b) => paren(format!("{a} =:= {b}"), min > 6),
        RelFormula::Not(a) => paren(format!("not {}", rformula_at(a, 5)), min > 5),
        RelFormula::And(a, b) => paren(
            format!("{} /\\ {}", rformula_at(a, 4), rformula_at(b, 5)),
            min > 4,
        ),
        RelFormula::Or(a, b) => paren(
            format!("{} \\/ {}", rformula_at(a, 3), rformula_at(b, 4)),
            min > 3,
        ),
        RelFormula::Implies(a, b) => paren(
            format!("{} -> {}", rformula_at(a, 3), rformula_at(b, 2)),
            min > 2,
        ),
        RelFormula::Iff(a, b) => paren(
            format!("{} <-> {}", rformula_at(a, 2), rformula_at(b, 1)),
            min > 1,
        ),
        RelFormula::Forall(side, x, a) => paren(
            format!("{} {}", quantifier(true, *side, *x), rformula_at(a, 0)),
            min > 0,
        ),
        RelFormula::Exists(side, x, a) => paren(
            format!("{} {}", quantifier(false, *side, *x), rformula_at(a, 0)),
            min > 0,
        ),
    }
}

impl fmt::Display for RelFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&rformula_at(self, 0))
    }
}

pub(crate) fn command_str(c: &Command, gt_paren: bool) -> String {
    match c {
        Command::Skip => "skip".to_string(),
        Command::Assign(x, e) => format!("{x} := {}", expr_at(e, 0, gt_paren)),
        Command::Havoc(x) => format!("hav {x}"),
        Command::Assert(p) => format!("assert {{ {p} }}"),
        Command::Seq(a, b) => {
            let first = command_str(a, gt_paren);
            let first = paren(first, matches!(a.as_ref(), Command::Seq(..)));
            format!("{first}; {}", command_str(b, gt_paren))
        }
        Command::If(e, a, b) => format!(
            "if {e} then {} else {} fi",
            command_str(a, gt_paren),
            command_str(b, gt_paren)
        ),
        Command::While(l) => {
            let mut s = format!("while {}", l.test);
            if let Some(v) = &l.variant {
                write!(s, " vnt {v}").unwrap();
            }
            if let Some(i) = &l.invariant {
                write!(s, " inv {i}").unwrap();
            }
            write!(s, " do {} done", command_str(&l.body, gt_paren)).unwrap();
            s
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&command_str(self, false))
    }
}

fn bicom_into(b: &Bicom, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match b {
        Bicom::Embed(c, d) if c == d => {
            write!(out, "{pad}|_ {} _|", command_str(c, false)).unwrap();
        }
        Bicom::Embed(c, d) => {
            write!(
                out,
                "{pad}< {} | {} >",
                command_str(c, false),
                command_str(d, true)
            )
            .unwrap();
        }
        Bicom::Assert(p) => write!(out, "{pad}assert {{ {p} }}").unwrap(),
        Bicom::Havf(x, p) => write!(out, "{pad}havF {x} {{ {p} }}").unwrap(),
        Bicom::Seq(a, rest) => {
            if let Bicom::Seq(..) = a.as_ref() {
                writeln!(out, "{pad}(").unwrap();
                bicom_into(a, indent + 1, out);
                write!(out, "\n{pad})").unwrap();
            } else {
                bicom_into(a, indent, out);
            }
            out.push_str(";\n");
            bicom_into(rest, indent, out);
        }
        Bicom::If { left, right, arms } => {
            write!(out, "{pad}if {left} | {right}").unwrap();
            for (kw, arm) in ["thth", "thel", "elth", "elel"].iter().zip(arms.iter()) {
                writeln!(out, "\n{pad}{kw}").unwrap();
                bicom_into(arm, indent + 1, out);
            }
            write!(out, "\n{pad}fi").unwrap();
        }
        Bicom::While(l) => {
            write!(out, "{pad}while {} | {}", l.left, l.right).unwrap();
            let default_align = RelFormula::Bool(false);
            if l.left_align != default_align || l.right_align != default_align {
                write!(out, " algn {} | {}", l.left_align, l.right_align).unwrap();
            }
            if let Some(v) = &l.variant {
                write!(out, " vnt {v}").unwrap();
            }
            if let Some(i) = &l.invariant {
                write!(out, " inv {i}").unwrap();
            }
            out.push_str(" do\n");
            bicom_into(&l.body, indent + 1, out);
            write!(out, "\n{pad}done").unwrap();
        }
    }
}

impl fmt::Display for Bicom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        bicom_into(self, 0, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decls: Vec<String> = self
            .vars
            .iter()
            .map(|v| format!("{}: {}", v.name(), v.sort()))
            .collect();
        writeln!(f, "vars {};", decls.join(", "))?;
        if let Some(c) = &self.left {
            writeln!(f, "left {{ {c} }}")?;
        }
        if let Some(c) = &self.right {
            writeln!(f, "right {{ {c} }}")?;
        }
        let mut body = String::new();
        bicom_into(&self.bicom, 1, &mut body);
        writeln!(f, "bicom {{\n{body}\n}}")?;
        let kind = match self.spec.kind {
            SpecKind::ForallExists => "ae",
            SpecKind::ForallForall => "aa",
        };
        writeln!(f, "spec {kind}")?;
        writeln!(f, "pre {{ {} }}", self.spec.pre)?;
        writeln!(f, "post {{ {} }}", self.spec.post)
    }
}
