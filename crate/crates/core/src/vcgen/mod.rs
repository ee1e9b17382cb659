//! Weakest-precondition verification conditions for bi-commands.
//!
//! Preconditions are kept as a list of labelled conjuncts so that a failing
//! obligation can be traced back to the assertion, invariant or
//! postcondition it protects. Loops contribute side obligations that are
//! collected separately.

pub mod smt;

use std::fmt;

use thiserror::Error;

use crate::assertions::subst_side;
use crate::structure::{bileft, biright};
use crate::syntax::*;
use crate::transform::{chk, default_avoid, TransformError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VcError {
    #[error("loop at {} has no invariant", show_path(.path))]
    MissingInvariant { path: Path },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// What a conjunct protects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GoalKind {
    Post,
    /// Invariant of a bi-loop.
    Invariant,
    /// Invariant of a unary loop.
    UnaryInvariant,
    Assert,
    /// Existence check added in front of a filtered havoc.
    HavfExists,
    /// Some side of a bi-loop can always make progress.
    Alignment,
}

impl fmt::Display for GoalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoalKind::Post => "post",
            GoalKind::Invariant => "invariant",
            GoalKind::UnaryInvariant => "unary-invariant",
            GoalKind::Assert => "assert",
            GoalKind::HavfExists => "havf-exists",
            GoalKind::Alignment => "alignment",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Goal {
    pub kind: GoalKind,
    pub path: Path,
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GoalKind::Post => f.write_str("post"),
            k => write!(f, "{k}@{}", show_path(&self.path)),
        }
    }
}

/// Which rule produced an obligation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OriginKind {
    /// The precondition implies the computed weakest precondition.
    Entry,
    /// Bi-loop exit.
    G1,
    /// Left-only iteration.
    G2,
    /// Right-only iteration.
    G3,
    /// Joint iteration.
    G4,
    /// Alignment progress.
    G5,
    /// Unary loop preserves its invariant.
    LoopPreserve,
    /// Unary loop exit.
    LoopExit,
}

impl fmt::Display for OriginKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OriginKind::Entry => "entry",
            OriginKind::G1 => "G1",
            OriginKind::G2 => "G2",
            OriginKind::G3 => "G3",
            OriginKind::G4 => "G4",
            OriginKind::G5 => "G5",
            OriginKind::LoopPreserve => "loop-preserve",
            OriginKind::LoopExit => "loop-exit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Origin {
    pub kind: OriginKind,
    pub path: Path,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OriginKind::Entry => f.write_str("entry"),
            k => write!(f, "{k}@{}", show_path(&self.path)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjunct {
    pub goal: Goal,
    pub formula: RelFormula,
}

/// A closed proof obligation: `formula` must be valid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub origin: Origin,
    pub goal: Goal,
    pub formula: RelFormula,
}

impl Obligation {
    /// Short label such as `G3@1 -> invariant@1`.
    pub fn label(&self) -> String {
        format!("{} -> {}", self.origin, self.goal)
    }
}

#[derive(Clone, Debug)]
pub struct Vc {
    /// Weakest precondition, split by goal.
    pub pre: Vec<Conjunct>,
    /// Side obligations from loops.
    pub side: Vec<Obligation>,
}

impl Vc {
    pub fn pre_formula(&self) -> RelFormula {
        RelFormula::and_all(self.pre.iter().map(|c| c.formula.clone()))
    }
}

fn and(a: RelFormula, b: RelFormula) -> RelFormula {
    match (&a, &b) {
        (RelFormula::Bool(true), _) => b,
        (_, RelFormula::Bool(true)) => a,
        (RelFormula::Bool(false), _) | (_, RelFormula::Bool(false)) => RelFormula::Bool(false),
        _ => RelFormula::and(a, b),
    }
}

fn or(a: RelFormula, b: RelFormula) -> RelFormula {
    match (&a, &b) {
        (RelFormula::Bool(false), _) => b,
        (_, RelFormula::Bool(false)) => a,
        (RelFormula::Bool(true), _) | (_, RelFormula::Bool(true)) => RelFormula::Bool(true),
        _ => RelFormula::or(a, b),
    }
}

fn implies(a: RelFormula, b: RelFormula) -> RelFormula {
    match (&a, &b) {
        (RelFormula::Bool(true), _) => b,
        (_, RelFormula::Bool(true)) => RelFormula::Bool(true),
        _ => RelFormula::implies(a, b),
    }
}

fn embed(side: Side, p: &UFormula) -> RelFormula {
    match side {
        Side::Left => RelFormula::Left(p.clone()),
        Side::Right => RelFormula::Right(p.clone()),
    }
}

fn test(side: Side, e: &Expr) -> RelFormula {
    embed(side, &UFormula::Atom(e.clone()))
}

struct Gen {
    side: Vec<Obligation>,
}

fn guard(conj: Vec<Conjunct>, g: &RelFormula) -> impl Iterator<Item = Conjunct> + '_ {
    conj.into_iter().map(move |c| Conjunct {
        formula: implies(g.clone(), c.formula),
        goal: c.goal,
    })
}

impl Gen {
    fn oblige(&mut self, kind: OriginKind, path: &Path, hyp: &RelFormula, conj: Vec<Conjunct>) {
        for c in conj {
            self.side.push(Obligation {
                origin: Origin { kind, path: path.clone() },
                formula: implies(hyp.clone(), c.formula),
                goal: c.goal,
            });
        }
    }

    fn cmd(&mut self, c: &Command, side: Side, q: Vec<Conjunct>, path: &mut Path) -> Result<Vec<Conjunct>, VcError> {
        Ok(match c {
            Command::Skip => q,
            Command::Assign(x, e) => q
                .into_iter()
                .map(|c| Conjunct {
                    formula: subst_side(&c.formula, side, *x, e),
                    goal: c.goal,
                })
                .collect(),
            Command::Havoc(x) => q
                .into_iter()
                .map(|c| Conjunct {
                    formula: RelFormula::Forall(side, *x, Box::new(c.formula)),
                    goal: c.goal,
                })
                .collect(),
            Command::Assert(p) => {
                let mut out = vec![Conjunct {
                    goal: Goal { kind: GoalKind::Assert, path: path.clone() },
                    formula: embed(side, p),
                }];
                out.extend(q);
                out
            }
            Command::Seq(a, b) => {
                path.push(1);
                let q = self.cmd(b, side, q, path);
                path.pop();
                path.push(0);
                let q = self.cmd(a, side, q?, path);
                path.pop();
                q?
            }
            Command::If(e, a, b) => {
                let g = test(side, e);
                path.push(0);
                let qa = self.cmd(a, side, q.clone(), path);
                path.pop();
                path.push(1);
                let qb = self.cmd(b, side, q, path);
                path.pop();
                let mut out: Vec<Conjunct> = guard(qa?, &g).collect();
                out.extend(guard(qb?, &RelFormula::not(g.clone())));
                out
            }
            Command::While(l) => {
                let inv = l
                    .invariant
                    .as_ref()
                    .ok_or_else(|| VcError::MissingInvariant { path: path.clone() })?;
                let i = embed(side, inv);
                let g = test(side, &l.test);
                let me = vec![Conjunct {
                    goal: Goal { kind: GoalKind::UnaryInvariant, path: path.clone() },
                    formula: i.clone(),
                }];
                path.push(0);
                let body = self.cmd(&l.body, side, me.clone(), path);
                path.pop();
                self.oblige(OriginKind::LoopPreserve, path, &and(i.clone(), g.clone()), body?);
                self.oblige(OriginKind::LoopExit, path, &and(i, RelFormula::not(g)), q);
                me
            }
        })
    }

    fn child(&mut self, i: usize, b: &Bicom, q: Vec<Conjunct>, path: &mut Path) -> Result<Vec<Conjunct>, VcError> {
        path.push(i);
        let r = self.bicom(b, q, path);
        path.pop();
        r
    }

    fn bicom(&mut self, b: &Bicom, q: Vec<Conjunct>, path: &mut Path) -> Result<Vec<Conjunct>, VcError> {
        Ok(match b {
            Bicom::Embed(c, d) => {
                path.push(1);
                let q = self.cmd(d, Side::Right, q, path);
                path.pop();
                path.push(0);
                let q = self.cmd(c, Side::Left, q?, path);
                path.pop();
                q?
            }
            Bicom::Assert(p) => {
                let mut out = vec![Conjunct {
                    goal: Goal { kind: GoalKind::Assert, path: path.clone() },
                    formula: p.clone(),
                }];
                out.extend(q);
                out
            }
            Bicom::Havf(x, p) => q
                .into_iter()
                .map(|c| Conjunct {
                    formula: RelFormula::Forall(
                        Side::Right,
                        *x,
                        Box::new(implies(p.clone(), c.formula)),
                    ),
                    goal: c.goal,
                })
                .collect(),
            Bicom::Seq(a, b) => {
                let q = self.child(1, b, q, path)?;
                let mut q = self.child(0, a, q, path)?;
                if let Bicom::Assert(RelFormula::Exists(Side::Right, x, p)) = a.as_ref() {
                    if matches!(b.as_ref(), Bicom::Havf(y, p2) if y == x && p2 == p.as_ref()) {
                        q[0].goal.kind = GoalKind::HavfExists;
                    }
                }
                q
            }
            Bicom::If { left, right, arms } => {
                let l = test(Side::Left, left);
                let r = test(Side::Right, right);
                let guards = [
                    and(l.clone(), r.clone()),
                    and(l.clone(), RelFormula::not(r.clone())),
                    and(RelFormula::not(l.clone()), r.clone()),
                    and(RelFormula::not(l), RelFormula::not(r)),
                ];
                let mut out = Vec::new();
                for (i, (arm, g)) in arms.iter().zip(&guards).enumerate() {
                    let qa = self.child(i, arm, q.clone(), path)?;
                    out.extend(guard(qa, g));
                }
                out
            }
            Bicom::While(l) => {
                let i = l
                    .invariant
                    .clone()
                    .ok_or_else(|| VcError::MissingInvariant { path: path.clone() })?;
                let el = test(Side::Left, &l.left);
                let er = test(Side::Right, &l.right);
                let me = vec![Conjunct {
                    goal: Goal { kind: GoalKind::Invariant, path: path.clone() },
                    formula: i.clone(),
                }];
                let left_step = and(el.clone(), l.left_align.clone());
                let right_step = and(er.clone(), l.right_align.clone());

                self.oblige(
                    OriginKind::G1,
                    path,
                    &and(i.clone(), and(RelFormula::not(el.clone()), RelFormula::not(er.clone()))),
                    q,
                );
                if l.left_align != RelFormula::Bool(false) {
                    let body = self.child(0, &bileft(&l.body), me.clone(), path)?;
                    self.oblige(OriginKind::G2, path, &and(i.clone(), left_step.clone()), body);
                }
                if l.right_align != RelFormula::Bool(false) {
                    let body = self.child(0, &biright(&l.body), me.clone(), path)?;
                    let hyp = and(i.clone(), and(right_step.clone(), RelFormula::not(left_step.clone())));
                    self.oblige(OriginKind::G3, path, &hyp, body);
                }
                let body = self.child(0, &l.body, me.clone(), path)?;
                let hyp = and(
                    i.clone(),
                    and(
                        and(el.clone(), er.clone()),
                        and(
                            RelFormula::not(l.left_align.clone()),
                            RelFormula::not(l.right_align.clone()),
                        ),
                    ),
                );
                self.oblige(OriginKind::G4, path, &hyp, body);
                let progress = or(
                    RelFormula::Agree(l.left.clone(), l.right.clone()),
                    or(left_step, right_step),
                );
                self.side.push(Obligation {
                    origin: Origin { kind: OriginKind::G5, path: path.clone() },
                    goal: Goal { kind: GoalKind::Alignment, path: path.clone() },
                    formula: implies(i, progress),
                });
                me
            }
        })
    }
}

/// Verification condition of `b` against postcondition `post`.
pub fn vc_bicom(b: &Bicom, post: &RelFormula) -> Result<Vc, VcError> {
    let mut g = Gen { side: Vec::new() };
    let q = vec![Conjunct {
        goal: Goal { kind: GoalKind::Post, path: Vec::new() },
        formula: post.clone(),
    }];
    let pre = g.bicom(b, q, &mut Vec::new())?;
    Ok(Vc { pre, side: g.side })
}

/// Verification condition of a unary command run on one side.
pub fn vc_command(c: &Command, side: Side, post: &RelFormula) -> Result<Vc, VcError> {
    let mut g = Gen { side: Vec::new() };
    let q = vec![Conjunct {
        goal: Goal { kind: GoalKind::Post, path: Vec::new() },
        formula: post.clone(),
    }];
    let pre = g.cmd(c, side, q, &mut Vec::new())?;
    Ok(Vc { pre, side: g.side })
}

/// The bi-command whose forall-forall validity establishes the problem's
/// specification: the alignment itself for `aa`, its instrumentation for `ae`.
pub fn checked_bicom(p: &Problem) -> Result<Bicom, VcError> {
    Ok(match p.spec.kind {
        SpecKind::ForallForall => p.bicom.clone(),
        SpecKind::ForallExists => chk(&p.bicom, &default_avoid(p))?,
    })
}

/// All obligations for the problem, entry conditions first.
pub fn obligations(p: &Problem) -> Result<Vec<Obligation>, VcError> {
    let b = checked_bicom(p)?;
    let vc = vc_bicom(&b, &p.spec.post)?;
    let mut out: Vec<Obligation> = vc
        .pre
        .into_iter()
        .map(|c| Obligation {
            origin: Origin { kind: OriginKind::Entry, path: Vec::new() },
            formula: implies(p.spec.pre.clone(), c.formula),
            goal: c.goal,
        })
        .collect();
    out.extend(vc.side);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y")]
    }

    #[test]
    fn assignment_substitutes_on_its_side() {
        let b = parse_bicom("< x := x + 1 | y := 2 >", &vs()).unwrap();
        let post = parse_rformula("x =:= y", &vs()).unwrap();
        let vc = vc_bicom(&b, &post).unwrap();
        assert_eq!(vc.pre_formula().to_string(), "x + 1 =:= 2");
        assert!(vc.side.is_empty());
    }

    #[test]
    fn havf_exists_is_labelled() {
        let p = parse_problem(
            "vars x: int, y: int; bicom { < hav x | skip >; havF y { x =:= y } } spec ae pre { true } post { x =:= y }",
        )
        .unwrap();
        let obs = obligations(&p).unwrap();
        let labels: Vec<String> = obs.iter().map(|o| o.label()).collect();
        assert_eq!(labels, ["entry -> havf-exists@1.0", "entry -> post"]);
        assert_eq!(
            obs[0].formula.to_string(),
            "forall x|. exists |y. x =:= y"
        );
    }

    #[test]
    fn biloop_obligations() {
        let b = parse_bicom(
            "while x > 0 | y > 0 algn false | [> y > x |> inv x =:= y do |_ x := x - 1; y := y - 1 _| done",
            &vs(),
        )
        .unwrap();
        let vc = vc_bicom(&b, &RelFormula::Bool(true)).unwrap();
        let kinds: Vec<OriginKind> = vc.side.iter().map(|o| o.origin.kind).collect();
        assert_eq!(kinds, [OriginKind::G1, OriginKind::G3, OriginKind::G4, OriginKind::G5]);
        assert_eq!(vc.pre_formula().to_string(), "x =:= y");
    }

    #[test]
    fn lockstep_alignment_obligation() {
        let b = parse_bicom("while x > 0 | y > 0 inv x =:= y do |_ x := x - 1; y := y - 1 _| done", &vs()).unwrap();
        let vc = vc_bicom(&b, &RelFormula::Bool(true)).unwrap();
        let g5 = vc.side.iter().find(|o| o.origin.kind == OriginKind::G5).unwrap();
        assert_eq!(g5.formula.to_string(), "x =:= y -> x > 0 =:= y > 0");
    }

    #[test]
    fn missing_invariant() {
        let c = parse_command("skip; while x > 0 do x := x - 1 done", &vs()).unwrap();
        let err = vc_command(&c, Side::Left, &RelFormula::Bool(true)).unwrap_err();
        assert_eq!(err, VcError::MissingInvariant { path: vec![1] });
    }
}
