//! Syntactic operations: projections, sizes, equational normal forms,
//! well-formedness and framing.

use std::collections::BTreeSet;
use std::fmt;

use crate::assertions::{fv_expr, fv_relexpr, fv_side, fv_uformula};
use crate::syntax::*;

/// A right-only relational expression as a plain expression.
pub fn right_only(e: &RelExpr) -> Option<Expr> {
    Some(match e {
        RelExpr::Left(_) => return None,
        RelExpr::Right(e) => e.clone(),
        RelExpr::Int(n) => Expr::Int(*n),
        RelExpr::Neg(a) => Expr::neg(right_only(a)?),
        RelExpr::Binary(op, a, b) => Expr::bin(*op, right_only(a)?, right_only(b)?),
    })
}

pub fn left_proj(b: &Bicom) -> Command {
    match b {
        Bicom::Embed(c, _) => c.clone(),
        Bicom::Assert(_) | Bicom::Havf(..) => Command::Skip,
        Bicom::Seq(a, b) => Command::seq(left_proj(a), left_proj(b)),
        Bicom::If { left, arms, .. } => {
            Command::ite(left.clone(), left_proj(&arms[0]), left_proj(&arms[2]))
        }
        Bicom::While(l) => Command::while_loop(l.left.clone(), None, None, left_proj(&l.body)),
    }
}

/// The right projection keeps a loop variant when it mentions only the right store.
pub fn right_proj(b: &Bicom) -> Command {
    match b {
        Bicom::Embed(_, d) => d.clone(),
        Bicom::Assert(_) => Command::Skip,
        Bicom::Havf(x, _) => Command::Havoc(*x),
        Bicom::Seq(a, b) => Command::seq(right_proj(a), right_proj(b)),
        Bicom::If { right, arms, .. } => {
            Command::ite(right.clone(), right_proj(&arms[0]), right_proj(&arms[1]))
        }
        Bicom::While(l) => Command::while_loop(
            l.right.clone(),
            l.variant.as_ref().and_then(right_only),
            None,
            right_proj(&l.body),
        ),
    }
}

/// Run only the left side of `b`.
pub fn bileft(b: &Bicom) -> Bicom {
    Bicom::Embed(left_proj(b), Command::Skip)
}

/// Run only the right side of `b`, keeping its assertions and filtered havocs.
pub fn biright(b: &Bicom) -> Bicom {
    match b {
        Bicom::Embed(_, d) => Bicom::Embed(Command::Skip, d.clone()),
        Bicom::Assert(_) | Bicom::Havf(..) => b.clone(),
        Bicom::Seq(a, b) => Bicom::seq(biright(a), biright(b)),
        Bicom::If { right, arms, .. } => Bicom::ite(
            Expr::Bool(true),
            right.clone(),
            [
                biright(&arms[0]),
                biright(&arms[1]),
                biright(&arms[2]),
                biright(&arms[3]),
            ],
        ),
        Bicom::While(l) => Bicom::while_loop(BiLoop {
            left: Expr::Bool(false),
            right: l.right.clone(),
            left_align: RelFormula::Bool(false),
            right_align: l.right_align.clone(),
            variant: l.variant.clone(),
            invariant: l.invariant.clone(),
            body: biright(&l.body),
        }),
    }
}

pub fn size_cmd(c: &Command) -> usize {
    match c {
        Command::Skip => 0,
        Command::Assign(..) | Command::Havoc(_) | Command::Assert(_) => 1,
        Command::Seq(a, b) | Command::If(_, a, b) => 1 + size_cmd(a) + size_cmd(b),
        Command::While(l) => 1 + size_cmd(&l.body),
    }
}

pub fn size_bicom(b: &Bicom) -> usize {
    match b {
        Bicom::Embed(c, d) => 1 + size_cmd(c) + size_cmd(d),
        Bicom::Assert(_) | Bicom::Havf(..) => 1,
        Bicom::Seq(a, b) => 1 + size_bicom(a) + size_bicom(b),
        Bicom::If { arms, .. } => 1 + arms.iter().map(size_bicom).sum::<usize>(),
        Bicom::While(l) => 1 + size_bicom(&l.body),
    }
}

// ---- command equivalence ----

fn flatten_cmd(c: Command, out: &mut Vec<Command>) {
    match c {
        Command::Skip => {}
        Command::Seq(a, b) => {
            flatten_cmd(*a, out);
            flatten_cmd(*b, out);
        }
        c => out.push(c),
    }
}

/// Normal form under the unit laws of `skip`, `if true`, `while false` and
/// associativity of sequencing. Loop annotations are kept.
pub fn kat_normal(c: &Command) -> Command {
    match c {
        Command::Seq(a, b) => {
            let mut items = Vec::new();
            flatten_cmd(kat_normal(a), &mut items);
            flatten_cmd(kat_normal(b), &mut items);
            Command::seq_all(items)
        }
        Command::If(Expr::Bool(true), a, _) => kat_normal(a),
        Command::If(e, a, b) => Command::ite(e.clone(), kat_normal(a), kat_normal(b)),
        Command::While(l) if l.test == Expr::Bool(false) => Command::Skip,
        Command::While(l) => Command::while_loop(
            l.test.clone(),
            l.variant.clone(),
            l.invariant.clone(),
            kat_normal(&l.body),
        ),
        c => c.clone(),
    }
}

fn erase_annotations(c: &Command) -> Command {
    match c {
        Command::Seq(a, b) => Command::seq(erase_annotations(a), erase_annotations(b)),
        Command::If(e, a, b) => Command::ite(e.clone(), erase_annotations(a), erase_annotations(b)),
        Command::While(l) => {
            Command::while_loop(l.test.clone(), None, None, erase_annotations(&l.body))
        }
        c => c.clone(),
    }
}

/// Command equivalence. Loop variants and invariants are ignored.
pub fn kateq(c: &Command, d: &Command) -> bool {
    erase_annotations(&kat_normal(c)) == erase_annotations(&kat_normal(d))
}

// ---- bi-command equivalence ----

fn bi_atoms(b: &Bicom, out: &mut Vec<Bicom>) {
    match b {
        Bicom::Embed(c, d) => {
            let mut left = Vec::new();
            flatten_cmd(erase_annotations(&kat_normal(c)), &mut left);
            out.extend(left.into_iter().map(|c| Bicom::Embed(c, Command::Skip)));
            let mut right = Vec::new();
            flatten_cmd(erase_annotations(&kat_normal(d)), &mut right);
            out.extend(right.into_iter().map(|d| Bicom::Embed(Command::Skip, d)));
        }
        Bicom::Assert(_) | Bicom::Havf(..) => out.push(b.clone()),
        Bicom::While(l) => out.push(Bicom::while_loop(BiLoop {
            body: bi_normal(&l.body),
            ..(**l).clone()
        })),
        Bicom::Seq(a, b) => {
            bi_atoms(a, out);
            bi_atoms(b, out);
        }
        Bicom::If { left, right, arms } => {
            let norm = |a: &Bicom| {
                let mut v = Vec::new();
                bi_atoms(a, &mut v);
                Bicom::seq_all(v)
            };
            out.push(Bicom::ite(
                left.clone(),
                right.clone(),
                [norm(&arms[0]), norm(&arms[1]), norm(&arms[2]), norm(&arms[3])],
            ));
        }
    }
}

/// Normal form splitting embeds into one-sided steps, applied under bi-if
/// and bi-while.
pub fn bi_normal(b: &Bicom) -> Bicom {
    let mut atoms = Vec::new();
    bi_atoms(b, &mut atoms);
    Bicom::seq_all(atoms)
}

pub fn bieq(a: &Bicom, b: &Bicom) -> bool {
    bi_normal(a) == bi_normal(b)
}

// ---- well-formedness ----

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfViolation {
    pub path: Path,
    pub detail: String,
}

impl fmt::Display for WfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bi-if at {}: {}", show_path(&self.path), self.detail)
    }
}

fn wf_into(b: &Bicom, path: &mut Path, out: &mut Vec<WfViolation>) {
    match b {
        Bicom::Embed(..) | Bicom::Assert(_) | Bicom::Havf(..) => {}
        Bicom::Seq(a, b) => {
            for (i, child) in [a, b].into_iter().enumerate() {
                path.push(i);
                wf_into(child, path, out);
                path.pop();
            }
        }
        Bicom::While(l) => {
            path.push(0);
            wf_into(&l.body, path, out);
            path.pop();
        }
        Bicom::If { arms, .. } => {
            let names = ["thth", "thel", "elth", "elel"];
            let checks: [(usize, usize, bool); 4] =
                [(0, 1, true), (2, 3, true), (0, 2, false), (1, 3, false)];
            for (i, j, left) in checks {
                let (p, q) = if left {
                    (left_proj(&arms[i]), left_proj(&arms[j]))
                } else {
                    (right_proj(&arms[i]), right_proj(&arms[j]))
                };
                if !kateq(&p, &q) {
                    out.push(WfViolation {
                        path: path.clone(),
                        detail: format!(
                            "{} projections of {} and {} differ: {p} vs {q}",
                            if left { "left" } else { "right" },
                            names[i],
                            names[j]
                        ),
                    });
                }
            }
            for (i, arm) in arms.iter().enumerate() {
                path.push(i);
                wf_into(arm, path, out);
                path.pop();
            }
        }
    }
}

/// Every bi-if's arms agree on the projections they share.
pub fn wellformed(b: &Bicom) -> Result<(), Vec<WfViolation>> {
    let mut out = Vec::new();
    wf_into(b, &mut Vec::new(), &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

// ---- modified variables and framing ----

fn push_unique(out: &mut Vec<Var>, x: Var) {
    if !out.contains(&x) {
        out.push(x);
    }
}

fn modvars_into(c: &Command, out: &mut Vec<Var>) {
    match c {
        Command::Skip | Command::Assert(_) => {}
        Command::Assign(x, _) | Command::Havoc(x) => push_unique(out, *x),
        Command::Seq(a, b) | Command::If(_, a, b) => {
            modvars_into(a, out);
            modvars_into(b, out);
        }
        Command::While(l) => modvars_into(&l.body, out),
    }
}

/// Assigned or havocked variables, in order of first occurrence.
pub fn modvars(c: &Command) -> Vec<Var> {
    let mut out = Vec::new();
    modvars_into(c, &mut out);
    out
}

fn modvars_r_into(b: &Bicom, out: &mut Vec<Var>) {
    match b {
        Bicom::Embed(_, d) => modvars_into(d, out),
        Bicom::Assert(_) => {}
        Bicom::Havf(x, _) => push_unique(out, *x),
        Bicom::Seq(a, b) => {
            modvars_r_into(a, out);
            modvars_r_into(b, out);
        }
        Bicom::If { arms, .. } => arms.iter().for_each(|a| modvars_r_into(a, out)),
        Bicom::While(l) => modvars_r_into(&l.body, out),
    }
}

/// Variables a bi-command may modify in the right store.
pub fn modvars_r(b: &Bicom) -> Vec<Var> {
    let mut out = Vec::new();
    modvars_r_into(b, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameViolation {
    pub path: Path,
    pub var: Var,
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} is outside the frame",
            self.var,
            show_path(&self.path)
        )
    }
}

struct Framer<'a> {
    vs: &'a [Var],
    path: Path,
    out: Vec<FrameViolation>,
}

impl Framer<'_> {
    fn need(&mut self, vars: impl IntoIterator<Item = Var>) {
        for x in vars {
            if !self.vs.contains(&x) {
                self.out.push(FrameViolation {
                    path: self.path.clone(),
                    var: x,
                });
            }
        }
    }

    fn child<T: ?Sized>(&mut self, i: usize, t: &T, f: fn(&mut Self, &T)) {
        self.path.push(i);
        f(self, t);
        self.path.pop();
    }

    fn cmd(&mut self, c: &Command) {
        match c {
            Command::Skip => {}
            Command::Assign(x, e) => {
                self.need([*x]);
                self.need(fv_expr(e));
            }
            Command::Havoc(x) => self.need([*x]),
            Command::Assert(p) => self.need(fv_uformula(p)),
            Command::Seq(a, b) => {
                self.child(0, a.as_ref(), Self::cmd);
                self.child(1, b.as_ref(), Self::cmd);
            }
            Command::If(e, a, b) => {
                self.need(fv_expr(e));
                self.child(0, a.as_ref(), Self::cmd);
                self.child(1, b.as_ref(), Self::cmd);
            }
            Command::While(l) => {
                self.need(fv_expr(&l.test));
                if let Some(v) = &l.variant {
                    self.need(fv_expr(v));
                }
                self.child(0, &l.body, Self::cmd);
            }
        }
    }

    fn rformula(&mut self, p: &RelFormula) {
        self.need(fv_side(p, Side::Left));
        self.need(fv_side(p, Side::Right));
    }

    fn bicom(&mut self, b: &Bicom) {
        match b {
            Bicom::Embed(c, d) => {
                self.child(0, c, Self::cmd);
                self.child(1, d, Self::cmd);
            }
            Bicom::Assert(p) => self.rformula(p),
            Bicom::Havf(x, p) => {
                self.need([*x]);
                self.rformula(p);
            }
            Bicom::Seq(a, b) => {
                self.child(0, a.as_ref(), Self::bicom);
                self.child(1, b.as_ref(), Self::bicom);
            }
            Bicom::If { left, right, arms } => {
                self.need(fv_expr(left));
                self.need(fv_expr(right));
                for (i, arm) in arms.iter().enumerate() {
                    self.child(i, arm, Self::bicom);
                }
            }
            Bicom::While(l) => {
                self.need(fv_expr(&l.left));
                self.need(fv_expr(&l.right));
                self.rformula(&l.left_align);
                self.rformula(&l.right_align);
                if let Some(v) = &l.variant {
                    self.need(fv_relexpr(v, Side::Left));
                    self.need(fv_relexpr(v, Side::Right));
                }
                self.child(0, &l.body, Self::bicom);
            }
        }
    }
}

pub fn cframe_violations(c: &Command, vs: &[Var]) -> Vec<FrameViolation> {
    let mut f = Framer {
        vs,
        path: Vec::new(),
        out: Vec::new(),
    };
    f.cmd(c);
    f.out
}

pub fn bframe_violations(b: &Bicom, vs: &[Var]) -> Vec<FrameViolation> {
    let mut f = Framer {
        vs,
        path: Vec::new(),
        out: Vec::new(),
    };
    f.bicom(b);
    f.out
}

/// `c` reads and writes only variables in `vs`.
pub fn cframe(c: &Command, vs: &[Var]) -> bool {
    cframe_violations(c, vs).is_empty()
}

pub fn bframe(b: &Bicom, vs: &[Var]) -> bool {
    bframe_violations(b, vs).is_empty()
}

/// All variables mentioned anywhere in `b`, including generated ones.
pub fn bicom_vars(b: &Bicom) -> BTreeSet<Var> {
    let mut all = BTreeSet::new();
    collect_bicom_vars(b, &mut all);
    all
}

fn collect_cmd_vars(c: &Command, out: &mut BTreeSet<Var>) {
    match c {
        Command::Skip => {}
        Command::Assign(x, e) => {
            out.insert(*x);
            out.extend(fv_expr(e));
        }
        Command::Havoc(x) => {
            out.insert(*x);
        }
        Command::Assert(p) => out.extend(fv_uformula(p)),
        Command::Seq(a, b) => {
            collect_cmd_vars(a, out);
            collect_cmd_vars(b, out);
        }
        Command::If(e, a, b) => {
            out.extend(fv_expr(e));
            collect_cmd_vars(a, out);
            collect_cmd_vars(b, out);
        }
        Command::While(l) => {
            out.extend(fv_expr(&l.test));
            if let Some(v) = &l.variant {
                out.extend(fv_expr(v));
            }
            collect_cmd_vars(&l.body, out);
        }
    }
}

pub fn command_vars(c: &Command) -> BTreeSet<Var> {
    let mut all = BTreeSet::new();
    collect_cmd_vars(c, &mut all);
    all
}

fn collect_bicom_vars(b: &Bicom, out: &mut BTreeSet<Var>) {
    let rel = |p: &RelFormula, out: &mut BTreeSet<Var>| {
        out.extend(fv_side(p, Side::Left));
        out.extend(fv_side(p, Side::Right));
    };
    match b {
        Bicom::Embed(c, d) => {
            collect_cmd_vars(c, out);
            collect_cmd_vars(d, out);
        }
        Bicom::Assert(p) => rel(p, out),
        Bicom::Havf(x, p) => {
            out.insert(*x);
            rel(p, out);
        }
        Bicom::Seq(a, b) => {
            collect_bicom_vars(a, out);
            collect_bicom_vars(b, out);
        }
        Bicom::If { left, right, arms } => {
            out.extend(fv_expr(left));
            out.extend(fv_expr(right));
            arms.iter().for_each(|a| collect_bicom_vars(a, out));
        }
        Bicom::While(l) => {
            out.extend(fv_expr(&l.left));
            out.extend(fv_expr(&l.right));
            rel(&l.left_align, out);
            rel(&l.right_align, out);
            if let Some(v) = &l.variant {
                out.extend(fv_relexpr(v, Side::Left));
                out.extend(fv_relexpr(v, Side::Right));
            }
            collect_bicom_vars(&l.body, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs() -> Vec<Var> {
        vec![Var::int("x"), Var::int("y"), Var::int("z")]
    }

    fn cmd(s: &str) -> Command {
        parse_command(s, &vs()).unwrap()
    }

    fn bi(s: &str) -> Bicom {
        parse_bicom(s, &vs()).unwrap()
    }

    #[test]
    fn projections_of_filtered_havoc() {
        let b = bi("< hav x | skip >; havF y { x =:= y }");
        assert!(kateq(&left_proj(&b), &cmd("hav x")));
        assert!(kateq(&right_proj(&b), &cmd("hav y")));
    }

    #[test]
    fn kat_laws() {
        assert!(kateq(&cmd("skip; x := 1; skip"), &cmd("x := 1")));
        assert!(kateq(&cmd("if true then x := 1 else y := 2 fi"), &cmd("x := 1")));
        assert!(kateq(&cmd("while false do x := 1 done; y := 2"), &cmd("y := 2")));
        assert!(kateq(&cmd("(x := 1; y := 1); z := 1"), &cmd("x := 1; (y := 1; z := 1)")));
        assert!(!kateq(&cmd("x := 1; y := 1"), &cmd("y := 1; x := 1")));
        assert!(kateq(
            &cmd("while x > 0 vnt x do x := x - 1 done"),
            &cmd("while x > 0 do skip; x := x - 1 done")
        ));
    }

    #[test]
    fn bieq_splits_embeds() {
        assert!(bieq(&bi("< x := 1 | y := 2 >"), &bi("< x := 1 | skip >; < skip | y := 2 >")));
        assert!(bieq(&bi("< x := 1; y := 1 | skip >"), &bi("< x := 1 | skip >; < y := 1 | skip >")));
        assert!(bieq(&bi("|_ skip _|; assert { true }"), &bi("assert { true }")));
        assert!(!bieq(&bi("< skip | y := 2 >; < x := 1 | skip >"), &bi("< x := 1 | y := 2 >")));
    }

    #[test]
    fn sizes() {
        assert_eq!(size_cmd(&cmd("x := 1; if x > 0 then skip else hav y fi")), 4);
        assert_eq!(size_bicom(&bi("< hav x | skip >; havF y { x =:= y }")), 4);
        let b = bi("while x > 0 | x > 0 do |_ x := x - 1 _| done");
        assert_eq!(size_bicom(&b), 4);
    }

    #[test]
    fn wellformedness_reports_the_offending_pair() {
        let good = bi("if x > 0 | x > 0 thth |_ y := 1 _| thel < y := 1 | skip > elth < skip | y := 1 > elel |_ skip _| fi");
        assert!(wellformed(&good).is_ok());
        let bad = bi("if x > 0 | x > 0 thth |_ y := 1 _| thel |_ skip _| elth |_ skip _| elel |_ skip _| fi");
        let errs = wellformed(&bad).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs[0].detail.contains("thth and thel"));
    }

    #[test]
    fn biright_keeps_havf_and_variant() {
        let b = bi("while x > 0 | y > 0 algn *<| x > 1 *<] | [> y > 1 |> vnt [> y |> do < x := x - 1 | y := y - 1 >; havF z { z =:= z } done");
        let r = biright(&b);
        assert!(kateq(&right_proj(&r), &right_proj(&b)));
        assert!(kateq(&left_proj(&r), &Command::Skip));
        match &r {
            Bicom::While(l) => {
                assert_eq!(l.left, Expr::Bool(false));
                assert_eq!(l.left_align, RelFormula::Bool(false));
                assert!(l.variant.is_some());
            }
            other => panic!("unexpected {other}"),
        }
        match right_proj(&b) {
            Command::While(l) => assert_eq!(l.variant, Some(Expr::Var(Var::int("y")))),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn framing() {
        let b = bi("< x := y | skip >; havF z { x =:= z }");
        assert!(bframe(&b, &vs()));
        assert!(!bframe(&b, &[Var::int("x"), Var::int("z")]));
        let v = bframe_violations(&b, &[Var::int("x"), Var::int("z")]);
        assert_eq!(v[0].var, Var::int("y"));
        assert_eq!(v[0].path, vec![0, 0]);
        assert_eq!(modvars_r(&b), vec![Var::int("z")]);
        assert_eq!(modvars(&cmd("x := 1; hav y; x := 2")), vec![Var::int("x"), Var::int("y")]);
    }
}
