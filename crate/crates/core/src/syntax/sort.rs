//! Sort checking for programmatically built syntax. The parser performs the
//! same checks as it builds nodes so it can attach source positions.

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("operator {op:?} expects {expected} operands, found {found}")]
    Operand {
        op: String,
        expected: Sort,
        found: Sort,
    },
    #[error("operands of {op:?} have different sorts")]
    Mismatch { op: String },
    #[error("expected a {expected} expression, found {found}")]
    Expected { expected: Sort, found: Sort },
    #[error("assignment to {var} of a {found} expression")]
    Assign { var: String, found: Sort },
    #[error("{op:?} is not allowed in {context}")]
    Operator { op: String, context: &'static str },
}

pub type SortResult<T> = Result<T, SortError>;

fn expect(expected: Sort, found: Sort) -> SortResult<()> {
    if expected == found {
        Ok(())
    } else {
        Err(SortError::Expected { expected, found })
    }
}

pub fn unary_sort(op: UnOp, arg: Sort) -> SortResult<Sort> {
    let want = match op {
        UnOp::Neg => Sort::Int,
        UnOp::Not => Sort::Bool,
    };
    if arg != want {
        return Err(SortError::Operand {
            op: format!("{op:?}"),
            expected: want,
            found: arg,
        });
    }
    Ok(want)
}

pub fn binary_sort(op: BinOp, a: Sort, b: Sort) -> SortResult<Sort> {
    let operand = |want: Sort| -> SortResult<()> {
        for s in [a, b] {
            if s != want {
                return Err(SortError::Operand {
                    op: format!("{op:?}"),
                    expected: want,
                    found: s,
                });
            }
        }
        Ok(())
    };
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
            operand(Sort::Int)?;
            Ok(Sort::Int)
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            operand(Sort::Int)?;
            Ok(Sort::Bool)
        }
        BinOp::Eq | BinOp::Ne => {
            if a != b {
                return Err(SortError::Mismatch {
                    op: format!("{op:?}"),
                });
            }
            Ok(Sort::Bool)
        }
        BinOp::And | BinOp::Or => {
            operand(Sort::Bool)?;
            Ok(Sort::Bool)
        }
    }
}

pub fn sort_of(e: &Expr) -> SortResult<Sort> {
    match e {
        Expr::Int(_) => Ok(Sort::Int),
        Expr::Bool(_) => Ok(Sort::Bool),
        Expr::Var(x) => Ok(x.sort()),
        Expr::Unary(op, a) => unary_sort(*op, sort_of(a)?),
        Expr::Binary(op, a, b) => binary_sort(*op, sort_of(a)?, sort_of(b)?),
    }
}

pub fn check_expr(e: &Expr, want: Sort) -> SortResult<()> {
    expect(want, sort_of(e)?)
}

pub fn check_uformula(p: &UFormula) -> SortResult<()> {
    match p {
        UFormula::Atom(e) => check_expr(e, Sort::Bool),
        UFormula::Not(p) | UFormula::Forall(_, p) | UFormula::Exists(_, p) => check_uformula(p),
        UFormula::And(p, q)
        | UFormula::Or(p, q)
        | UFormula::Implies(p, q)
        | UFormula::Iff(p, q) => {
            check_uformula(p)?;
            check_uformula(q)
        }
    }
}

pub fn check_relexpr(e: &RelExpr) -> SortResult<()> {
    match e {
        RelExpr::Left(e) | RelExpr::Right(e) => check_expr(e, Sort::Int),
        RelExpr::Int(_) => Ok(()),
        RelExpr::Neg(a) => check_relexpr(a),
        RelExpr::Binary(op, a, b) => {
            if !op.is_arith() {
                return Err(SortError::Operator {
                    op: format!("{op:?}"),
                    context: "relational expressions",
                });
            }
            check_relexpr(a)?;
            check_relexpr(b)
        }
    }
}

pub fn check_rformula(p: &RelFormula) -> SortResult<()> {
    match p {
        RelFormula::Bool(_) => Ok(()),
        RelFormula::Left(u) | RelFormula::Right(u) => check_uformula(u),
        RelFormula::Cmp(op, a, b) => {
            if !op.is_comparison() {
                return Err(SortError::Operator {
                    op: format!("{op:?}"),
                    context: "relational comparisons",
                });
            }
            check_relexpr(a)?;
            check_relexpr(b)
        }
        RelFormula::Agree(a, b) => {
            if sort_of(a)? != sort_of(b)? {
                return Err(SortError::Mismatch {
                    op: "=:=".to_string(),
                });
            }
            Ok(())
        }
        RelFormula::Not(p) | RelFormula::Forall(_, _, p) | RelFormula::Exists(_, _, p) => {
            check_rformula(p)
        }
        RelFormula::And(p, q)
        | RelFormula::Or(p, q)
        | RelFormula::Implies(p, q)
        | RelFormula::Iff(p, q) => {
            check_rformula(p)?;
            check_rformula(q)
        }
    }
}

pub fn check_command(c: &Command) -> SortResult<()> {
    match c {
        Command::Skip | Command::Havoc(_) => Ok(()),
        Command::Assign(x, e) => {
            let found = sort_of(e)?;
            if found != x.sort() {
                return Err(SortError::Assign {
                    var: x.name().to_string(),
                    found,
                });
            }
            Ok(())
        }
        Command::Assert(p) => check_uformula(p),
        Command::Seq(a, b) => {
            check_command(a)?;
            check_command(b)
        }
        Command::If(e, a, b) => {
            check_expr(e, Sort::Bool)?;
            check_command(a)?;
            check_command(b)
        }
        Command::While(l) => {
            check_expr(&l.test, Sort::Bool)?;
            if let Some(v) = &l.variant {
                check_expr(v, Sort::Int)?;
            }
            if let Some(i) = &l.invariant {
                check_uformula(i)?;
            }
            check_command(&l.body)
        }
    }
}

pub fn check_bicom(b: &Bicom) -> SortResult<()> {
    match b {
        Bicom::Embed(c, d) => {
            check_command(c)?;
            check_command(d)
        }
        Bicom::Assert(p) | Bicom::Havf(_, p) => check_rformula(p),
        Bicom::Seq(a, b) => {
            check_bicom(a)?;
            check_bicom(b)
        }
        Bicom::If { left, right, arms } => {
            check_expr(left, Sort::Bool)?;
            check_expr(right, Sort::Bool)?;
            arms.iter().try_for_each(check_bicom)
        }
        Bicom::While(l) => {
            check_expr(&l.left, Sort::Bool)?;
            check_expr(&l.right, Sort::Bool)?;
            check_rformula(&l.left_align)?;
            check_rformula(&l.right_align)?;
            if let Some(v) = &l.variant {
                check_relexpr(v)?;
            }
            if let Some(i) = &l.invariant {
                check_rformula(i)?;
            }
            check_bicom(&l.body)
        }
    }
}

pub fn check_problem(p: &Problem) -> SortResult<()> {
    if let Some(c) = &p.left {
        check_command(c)?;
    }
    if let Some(c) = &p.right {
        check_command(c)?;
    }
    check_bicom(&p.bicom)?;
    check_rformula(&p.spec.pre)?;
    check_rformula(&p.spec.post)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_of_bools_is_rejected() {
        let b = Var::boolean("b");
        let e = Expr::bin(BinOp::Lt, Expr::Var(b), Expr::Bool(true));
        assert!(sort_of(&e).is_err());
        let e = Expr::bin(BinOp::Eq, Expr::Var(b), Expr::Bool(true));
        assert_eq!(sort_of(&e), Ok(Sort::Bool));
    }

    #[test]
    fn assignment_sort_must_match() {
        let x = Var::int("x");
        assert!(check_command(&Command::Assign(x, Expr::Bool(true))).is_err());
        assert!(check_command(&Command::Assign(x, Expr::Int(3))).is_ok());
    }
}
