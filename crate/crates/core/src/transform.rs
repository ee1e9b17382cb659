//! Instrumentation that turns a forall-exists alignment into a forall-forall
//! proof obligation: filtered havocs get an existence check, and right-side
//! loop iterations must decrease their variant.
//!
//! Snapshot variables are named from a tag and the structural path of the
//! loop they belong to, so the instrumentation commutes with the
//! bi-projections: `biright(chk(b)) == chk(biright(b))`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::structure::{modvars, modvars_r};
use crate::syntax::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("loop at {} has no variant", show_path(.path))]
    MissingVariant { path: Path },
}

/// Snapshot roles in generated names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotTag {
    /// Unary loop variant.
    Variant,
    /// Bi-loop variant value before the iteration.
    BiVariant,
    /// Whether the iteration is right-only.
    RightOnly,
}

impl SnapshotTag {
    fn tag(self) -> &'static str {
        match self {
            SnapshotTag::Variant => "v",
            SnapshotTag::BiVariant => "E",
            SnapshotTag::RightOnly => "ro",
        }
    }
}

/// `$<tag>` followed by `_<i>` for each index on the loop's path.
pub fn gensym(tag: SnapshotTag, path: &[usize]) -> String {
    let mut name = format!("{RESERVED_PREFIX}{}", tag.tag());
    for i in path {
        name.push('_');
        name.push_str(&i.to_string());
    }
    name
}

fn snapshot(tag: SnapshotTag, path: &[usize], sort: Sort, avoid: &BTreeSet<&str>) -> Var {
    let mut name = gensym(tag, path);
    while avoid.contains(name.as_str()) {
        name.push('_');
    }
    Var::new(&name, sort)
}

fn names<'a>(a: &'a [Var], b: &'a [Var]) -> BTreeSet<&'static str> {
    a.iter().chain(b).map(|v| v.name()).collect()
}

/// Add variant checks to every loop of a right-side command.
pub fn uchk(c: &Command, avoid: &[Var]) -> Result<Command, TransformError> {
    uchk_at(c, avoid, &mut Vec::new())
}

fn uchk_at(c: &Command, avoid: &[Var], path: &mut Path) -> Result<Command, TransformError> {
    let child = |i: usize, c: &Command, path: &mut Path| {
        path.push(i);
        let r = uchk_at(c, avoid, path);
        path.pop();
        r
    };
    Ok(match c {
        Command::Seq(a, b) => Command::seq(child(0, a, path)?, child(1, b, path)?),
        Command::If(e, a, b) => Command::ite(e.clone(), child(0, a, path)?, child(1, b, path)?),
        Command::While(l) => {
            let variant = l
                .variant
                .clone()
                .ok_or_else(|| TransformError::MissingVariant { path: path.clone() })?;
            let body = child(0, &l.body, path)?;
            let x = snapshot(
                SnapshotTag::Variant,
                path,
                Sort::Int,
                &names(avoid, &modvars(&body)),
            );
            let decrease = UFormula::and(
                UFormula::Atom(Expr::bin(BinOp::Le, Expr::Int(0), variant.clone())),
                UFormula::Atom(Expr::bin(BinOp::Lt, variant.clone(), Expr::Var(x))),
            );
            let body = Command::seq_all([
                Command::Assign(x, variant.clone()),
                body,
                Command::Assert(decrease),
            ]);
            Command::while_loop(l.test.clone(), Some(variant), l.invariant.clone(), body)
        }
        c => c.clone(),
    })
}

/// The forall-forall instrumentation of a bi-command.
pub fn chk(b: &Bicom, avoid: &[Var]) -> Result<Bicom, TransformError> {
    chk_at(b, avoid, &mut Vec::new())
}

fn chk_at(b: &Bicom, avoid: &[Var], path: &mut Path) -> Result<Bicom, TransformError> {
    let child = |i: usize, b: &Bicom, path: &mut Path| {
        path.push(i);
        let r = chk_at(b, avoid, path);
        path.pop();
        r
    };
    Ok(match b {
        Bicom::Embed(c, d) => {
            path.push(1);
            let d = uchk_at(d, avoid, path);
            path.pop();
            Bicom::Embed(c.clone(), d?)
        }
        Bicom::Assert(_) => b.clone(),
        Bicom::Havf(x, p) => Bicom::seq(
            Bicom::Assert(RelFormula::Exists(Side::Right, *x, Box::new(p.clone()))),
            b.clone(),
        ),
        Bicom::Seq(a, b) => Bicom::seq(child(0, a, path)?, child(1, b, path)?),
        Bicom::If { left, right, arms } => {
            let mut out = Vec::with_capacity(4);
            for (i, arm) in arms.iter().enumerate() {
                out.push(child(i, arm, path)?);
            }
            Bicom::ite(
                left.clone(),
                right.clone(),
                out.try_into().expect("four arms"),
            )
        }
        Bicom::While(l) => {
            let variant = l
                .variant
                .clone()
                .ok_or_else(|| TransformError::MissingVariant { path: path.clone() })?;
            let body = child(0, &l.body, path)?;
            let taken = names(avoid, &modvars_r(&body));
            let x1 = snapshot(SnapshotTag::BiVariant, path, Sort::Int, &taken);
            let mut taken = taken;
            taken.insert(x1.name());
            let x2 = snapshot(SnapshotTag::RightOnly, path, Sort::Bool, &taken);

            let right_only = RelFormula::and(RelFormula::right_expr(l.right.clone()), l.right_align.clone());
            let decrease = RelFormula::and(
                RelFormula::cmp(BinOp::Le, RelExpr::Int(0), variant.clone()),
                RelFormula::cmp(BinOp::Lt, variant.clone(), RelExpr::right_var(x1)),
            );
            let body = Bicom::seq_all([
                Bicom::Havf(
                    x1,
                    RelFormula::cmp(BinOp::Eq, RelExpr::right_var(x1), variant.clone()),
                ),
                Bicom::Havf(
                    x2,
                    RelFormula::iff(RelFormula::right_expr(Expr::Var(x2)), right_only),
                ),
                body,
                Bicom::Assert(RelFormula::implies(
                    RelFormula::right_expr(Expr::Var(x2)),
                    decrease,
                )),
            ]);
            Bicom::while_loop(BiLoop {
                body,
                variant: Some(variant),
                ..(**l).clone()
            })
        }
    })
}

/// Variables the instrumentation must not reuse: the declared universe.
pub fn default_avoid(p: &Problem) -> Vec<Var> {
    p.vars.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{biright, bileft, bieq};

    fn vs() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y")]
    }

    #[test]
    fn havf_gets_existence_check() {
        let b = parse_bicom("havF y { x =:= y }", &vs()).unwrap();
        let c = chk(&b, &vs()).unwrap();
        assert_eq!(
            c.to_string(),
            "assert { exists |y. x =:= y };\nhavF y { x =:= y }"
        );
    }

    #[test]
    fn unary_variant_check() {
        let c = parse_command("while y > 0 vnt y do y := y - 1 done", &vs()).unwrap();
        let u = uchk(&c, &vs()).unwrap();
        assert_eq!(
            u.to_string(),
            "while y > 0 vnt y do $v := y; y := y - 1; assert { 0 <= y /\\ y < $v } done"
        );
        let missing = parse_command("skip; while y > 0 do y := y - 1 done", &vs()).unwrap();
        assert_eq!(
            uchk(&missing, &vs()),
            Err(TransformError::MissingVariant { path: vec![1] })
        );
    }

    #[test]
    fn biloop_snapshots() {
        let b = parse_bicom(
            "|_ skip _|; while x > 0 | y > 0 algn false | [> y > x |> vnt [> y |> do |_ x := x - 1; y := y - 1 _| done",
            &vs(),
        )
        .unwrap();
        let c = chk(&b, &vs()).unwrap();
        let text = c.to_string();
        assert!(text.contains("havF $E_1 { [> $E_1 |> = [> y |> }"), "{text}");
        assert!(text.contains("havF $ro_1 { [> $ro_1 |> <-> [> y > 0 |> /\\ [> y > x |> }"), "{text}");
        assert!(text.contains("assert { [> $ro_1 |> -> 0 <= [> y |> /\\ [> y |> < [> $E_1 |> }"), "{text}");
        assert_eq!(chk(&biright(&b), &vs()).unwrap(), biright(&c));
        assert!(bieq(&bileft(&c), &chk(&bileft(&b), &vs()).unwrap()));
    }

    #[test]
    fn snapshot_names_avoid_collisions() {
        let taken = Var::int("$v");
        let c = parse_command("while y > 0 vnt y do y := y - 1 done", &vs()).unwrap();
        let u = uchk(&c, &[taken]).unwrap();
        assert!(u.to_string().contains("$v_ := y"));
    }
}
