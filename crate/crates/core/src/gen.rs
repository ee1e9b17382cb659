//! Random programs, formulas and bi-commands for property testing.
//!
//! Generated code stays inside the operational fragment the oracle handles
//! well: divisors are nonzero literals, multiplication has a literal
//! operand, and every loop carries a variant.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::structure::{bileft, biright, left_proj, right_proj};
use crate::syntax::*;

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub vars: Vec<Var>,
    pub depth: u32,
    pub loops: bool,
    pub quantifiers: bool,
    /// Allow assertions inside commands and bi-commands.
    pub asserts: bool,
}

impl GenConfig {
    pub fn new(vars: Vec<Var>) -> GenConfig {
        assert!(vars.iter().any(|v| v.sort() == Sort::Int), "need an int variable");
        GenConfig {
            vars,
            depth: 4,
            loops: true,
            quantifiers: true,
            asserts: true,
        }
    }

    pub fn loop_free(mut self) -> GenConfig {
        self.loops = false;
        self
    }

    pub fn quantifier_free(mut self) -> GenConfig {
        self.quantifiers = false;
        self
    }

    pub fn depth(mut self, depth: u32) -> GenConfig {
        self.depth = depth;
        self
    }
}

/// A random variable list with 1 to `max` entries, at least one of sort int.
pub fn random_vars<R: Rng>(rng: &mut R, max: usize) -> Vec<Var> {
    let n = rng.gen_range(1..=max.max(1));
    let names = ["x", "y", "z"];
    let mut out = vec![Var::int(names[0])];
    for name in names.iter().take(n).skip(1) {
        if rng.gen_bool(0.25) {
            out.push(Var::boolean(&format!("b{name}")));
        } else {
            out.push(Var::int(name));
        }
    }
    out
}

pub struct Gen<'a, R> {
    pub rng: &'a mut R,
    pub cfg: &'a GenConfig,
}

const CMP: [BinOp; 6] = [BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge];

impl<'a, R: Rng> Gen<'a, R> {
    pub fn new(rng: &'a mut R, cfg: &'a GenConfig) -> Gen<'a, R> {
        Gen { rng, cfg }
    }

    fn of_sort(&self, sort: Sort) -> Vec<Var> {
        self.cfg.vars.iter().copied().filter(|v| v.sort() == sort).collect()
    }

    fn var(&mut self) -> Var {
        *self.cfg.vars.choose(self.rng).unwrap()
    }

    fn int_var(&mut self) -> Var {
        *self.of_sort(Sort::Int).choose(self.rng).unwrap()
    }

    fn lit(&mut self) -> i64 {
        self.rng.gen_range(-2..=2)
    }

    pub fn expr_int(&mut self, d: u32) -> Expr {
        if d == 0 || self.rng.gen_bool(0.4) {
            return if self.rng.gen_bool(0.6) {
                Expr::Var(self.int_var())
            } else {
                Expr::Int(self.lit())
            };
        }
        match self.rng.gen_range(0..6) {
            0 => Expr::bin(BinOp::Add, self.expr_int(d - 1), self.expr_int(d - 1)),
            1 => Expr::bin(BinOp::Sub, self.expr_int(d - 1), self.expr_int(d - 1)),
            2 => Expr::bin(BinOp::Mul, Expr::Int(self.rng.gen_range(-1..=2)), self.expr_int(d - 1)),
            3 => Expr::bin(BinOp::Div, self.expr_int(d - 1), Expr::Int(*[2, 3, -2].choose(self.rng).unwrap())),
            4 => Expr::bin(BinOp::Mod, self.expr_int(d - 1), Expr::Int(*[2, 3].choose(self.rng).unwrap())),
            _ => Expr::neg(self.expr_int(d - 1)),
        }
    }

    pub fn expr_bool(&mut self, d: u32) -> Expr {
        let bools = self.of_sort(Sort::Bool);
        if d == 0 || self.rng.gen_bool(0.3) {
            return match self.rng.gen_range(0..4) {
                0 if !bools.is_empty() => Expr::Var(*bools.choose(self.rng).unwrap()),
                1 => Expr::Bool(self.rng.gen_bool(0.5)),
                _ => {
                    let op = *CMP.choose(self.rng).unwrap();
                    Expr::bin(op, self.expr_int(0), self.expr_int(0))
                }
            };
        }
        match self.rng.gen_range(0..5) {
            0 | 1 => {
                let op = *CMP.choose(self.rng).unwrap();
                Expr::bin(op, self.expr_int(d - 1), self.expr_int(d - 1))
            }
            2 => Expr::bin(BinOp::And, self.expr_bool(d - 1), self.expr_bool(d - 1)),
            3 => Expr::bin(BinOp::Or, self.expr_bool(d - 1), self.expr_bool(d - 1)),
            _ => Expr::not(self.expr_bool(d - 1)),
        }
    }

    pub fn expr_of(&mut self, sort: Sort, d: u32) -> Expr {
        match sort {
            Sort::Int => self.expr_int(d),
            Sort::Bool => self.expr_bool(d),
        }
    }

    pub fn uformula(&mut self, d: u32) -> UFormula {
        if d == 0 || self.rng.gen_bool(0.35) {
            return UFormula::Atom(self.expr_bool(1));
        }
        let q = if self.cfg.quantifiers { 7 } else { 5 };
        match self.rng.gen_range(0..q) {
            0 => UFormula::not(self.uformula(d - 1)),
            1 => UFormula::and(self.uformula(d - 1), self.uformula(d - 1)),
            2 => UFormula::or(self.uformula(d - 1), self.uformula(d - 1)),
            3 => UFormula::implies(self.uformula(d - 1), self.uformula(d - 1)),
            4 => UFormula::iff(self.uformula(d - 1), self.uformula(d - 1)),
            5 => UFormula::Forall(self.var(), Box::new(self.uformula(d - 1))),
            _ => UFormula::Exists(self.var(), Box::new(self.uformula(d - 1))),
        }
    }

    pub fn relexpr(&mut self, d: u32) -> RelExpr {
        if d == 0 || self.rng.gen_bool(0.4) {
            return match self.rng.gen_range(0..5) {
                0 | 1 => RelExpr::Left(self.expr_int(1)),
                2 | 3 => RelExpr::Right(self.expr_int(1)),
                _ => RelExpr::Int(self.lit()),
            };
        }
        match self.rng.gen_range(0..4) {
            0 => RelExpr::bin(BinOp::Add, self.relexpr(d - 1), self.relexpr(d - 1)),
            1 => RelExpr::bin(BinOp::Sub, self.relexpr(d - 1), self.relexpr(d - 1)),
            2 => RelExpr::bin(BinOp::Mul, RelExpr::Int(self.rng.gen_range(-1..=2)), self.relexpr(d - 1)),
            _ => RelExpr::Neg(Box::new(self.relexpr(d - 1))),
        }
    }

    /// Agreement on one variable.
    pub fn agreement(&mut self) -> RelFormula {
        let x = self.var();
        RelFormula::Agree(Expr::Var(x), Expr::Var(x))
    }

    /// Agreement on every variable.
    pub fn full_agreement(&self) -> RelFormula {
        RelFormula::and_all(
            self.cfg
                .vars
                .iter()
                .map(|x| RelFormula::Agree(Expr::Var(*x), Expr::Var(*x))),
        )
    }

    pub fn rformula(&mut self, d: u32) -> RelFormula {
        if d == 0 || self.rng.gen_bool(0.3) {
            return match self.rng.gen_range(0..6) {
                0 => RelFormula::Bool(self.rng.gen_bool(0.7)),
                1 => RelFormula::Left(self.uformula(1)),
                2 => RelFormula::Right(self.uformula(1)),
                3 => self.agreement(),
                _ => {
                    let op = *CMP.choose(self.rng).unwrap();
                    RelFormula::cmp(op, self.relexpr(1), self.relexpr(1))
                }
            };
        }
        let q = if self.cfg.quantifiers { 7 } else { 5 };
        match self.rng.gen_range(0..q) {
            0 => RelFormula::not(self.rformula(d - 1)),
            1 => RelFormula::and(self.rformula(d - 1), self.rformula(d - 1)),
            2 => RelFormula::or(self.rformula(d - 1), self.rformula(d - 1)),
            3 => RelFormula::implies(self.rformula(d - 1), self.rformula(d - 1)),
            4 => RelFormula::iff(self.rformula(d - 1), self.rformula(d - 1)),
            5 => {
                let side = self.side();
                RelFormula::Forall(side, self.var(), Box::new(self.rformula(d - 1)))
            }
            _ => {
                let side = self.side();
                RelFormula::Exists(side, self.var(), Box::new(self.rformula(d - 1)))
            }
        }
    }

    fn side(&mut self) -> Side {
        if self.rng.gen_bool(0.5) {
            Side::Left
        } else {
            Side::Right
        }
    }

    fn assign(&mut self) -> Command {
        let x = self.var();
        let e = self.expr_of(x.sort(), 2);
        Command::Assign(x, e)
    }

    pub fn command(&mut self, d: u32) -> Command {
        if d == 0 || self.rng.gen_bool(0.3) {
            return match self.rng.gen_range(0..10) {
                0 => Command::Skip,
                1 | 2 => Command::Havoc(self.var()),
                3 if self.cfg.asserts => Command::Assert(self.uformula(1)),
                _ => self.assign(),
            };
        }
        let kinds = if self.cfg.loops { 5 } else { 4 };
        match self.rng.gen_range(0..kinds) {
            0 | 1 => Command::seq(self.command(d - 1), self.command(d - 1)),
            2 | 3 => Command::ite(self.expr_bool(1), self.command(d - 1), self.command(d - 1)),
            _ => self.unary_loop(d),
        }
    }

    /// Alignment conditions are quantifier-free so the product translation
    /// accepts them.
    fn alignment(&mut self) -> RelFormula {
        if self.rng.gen_bool(0.6) {
            return RelFormula::Bool(false);
        }
        loop {
            let f = self.rformula(1);
            if f.is_quantifier_free() {
                return f;
            }
        }
    }

    /// A loop that counts an int variable down, with that variable as variant.
    fn unary_loop(&mut self, d: u32) -> Command {
        let v = self.int_var();
        let test = if self.rng.gen_bool(0.7) {
            Expr::bin(BinOp::Gt, Expr::Var(v), Expr::Int(0))
        } else {
            self.expr_bool(1)
        };
        let mut body = self.command(d - 1);
        if self.rng.gen_bool(0.8) {
            body = Command::seq(body, Command::Assign(v, Expr::bin(BinOp::Sub, Expr::Var(v), Expr::Int(1))));
        }
        Command::while_loop(test, Some(Expr::Var(v)), None, body)
    }

    fn havf(&mut self) -> Bicom {
        let x = self.var();
        let filter = match self.rng.gen_range(0..4) {
            0 => RelFormula::Agree(Expr::Var(x), Expr::Var(x)),
            1 if x.sort() == Sort::Int => {
                let e = self.relexpr(1);
                RelFormula::cmp(BinOp::Eq, RelExpr::right_var(x), e)
            }
            2 => {
                let y = *self
                    .of_sort(x.sort())
                    .choose(self.rng)
                    .unwrap();
                RelFormula::Agree(Expr::Var(y), Expr::Var(x))
            }
            _ => self.rformula(1),
        };
        Bicom::Havf(x, filter)
    }

    pub fn bicom(&mut self, d: u32) -> Bicom {
        if d == 0 || self.rng.gen_bool(0.25) {
            return match self.rng.gen_range(0..8) {
                0 | 1 => {
                    let c = self.command(d.min(2));
                    Bicom::sync(c)
                }
                2 if self.cfg.asserts => Bicom::Assert(self.rformula(1)),
                3 | 4 => self.havf(),
                _ => {
                    let (c, e) = (self.command(d.min(2)), self.command(d.min(2)));
                    Bicom::Embed(c, e)
                }
            };
        }
        let kinds = if self.cfg.loops { 5 } else { 4 };
        match self.rng.gen_range(0..kinds) {
            0 | 1 => Bicom::seq(self.bicom(d - 1), self.bicom(d - 1)),
            2 | 3 => self.bi_if(d),
            _ => self.bi_loop(d),
        }
    }

    /// A four-way conditional whose mixed arms are built from the diagonal
    /// ones, so it is well-formed by construction.
    fn bi_if(&mut self, d: u32) -> Bicom {
        let b1 = self.bicom(d - 1);
        let b4 = self.bicom(d - 1);
        let embed_ok = has_variants(&right_proj(&b1)) && has_variants(&right_proj(&b4));
        let (b2, b3) = if embed_ok && self.rng.gen_bool(0.3) {
            (
                Bicom::Embed(left_proj(&b1), right_proj(&b4)),
                Bicom::Embed(left_proj(&b4), right_proj(&b1)),
            )
        } else {
            (
                Bicom::seq(bileft(&b1), biright(&b4)),
                Bicom::seq(bileft(&b4), biright(&b1)),
            )
        };
        let (left, right) = if self.rng.gen_bool(0.5) {
            let e = self.expr_bool(1);
            (e.clone(), e)
        } else {
            (self.expr_bool(1), self.expr_bool(1))
        };
        Bicom::ite(left, right, [b1, b2, b3, b4])
    }

    fn bi_loop(&mut self, d: u32) -> Bicom {
        let (v, w) = (self.int_var(), self.int_var());
        let gt0 = |x: Var| Expr::bin(BinOp::Gt, Expr::Var(x), Expr::Int(0));
        let (left, right) = if self.rng.gen_bool(0.7) {
            (gt0(v), gt0(w))
        } else {
            (self.expr_bool(1), self.expr_bool(1))
        };
        let left_align = self.alignment();
        let right_align = self.alignment();
        let mut body = self.bicom(d - 1);
        if self.rng.gen_bool(0.8) {
            let dec = |x: Var| Command::Assign(x, Expr::bin(BinOp::Sub, Expr::Var(x), Expr::Int(1)));
            body = Bicom::seq(body, Bicom::Embed(dec(v), dec(w)));
        }
        let variant = if self.rng.gen_bool(0.8) {
            RelExpr::right_var(w)
        } else {
            self.relexpr(1)
        };
        Bicom::while_loop(BiLoop {
            left,
            right,
            left_align,
            right_align,
            variant: Some(variant),
            invariant: None,
            body,
        })
    }

    /// A command equal to `c` under the unit and associativity laws.
    pub fn kat_variant(&mut self, c: &Command) -> Command {
        let inner = match c {
            Command::Seq(a, b) => {
                let (a, b) = (self.kat_variant(a), self.kat_variant(b));
                match (a, self.rng.gen_bool(0.3)) {
                    (Command::Seq(a1, a2), true) => Command::seq(*a1, Command::seq(*a2, b)),
                    (a, _) => Command::seq(a, b),
                }
            }
            Command::If(e, a, b) => Command::ite(e.clone(), self.kat_variant(a), self.kat_variant(b)),
            Command::While(l) => Command::while_loop(
                l.test.clone(),
                l.variant.clone(),
                l.invariant.clone(),
                self.kat_variant(&l.body),
            ),
            c => c.clone(),
        };
        match self.rng.gen_range(0..8) {
            0 => Command::seq(Command::Skip, inner),
            1 => Command::seq(inner, Command::Skip),
            2 => {
                let junk = self.command(1);
                Command::ite(Expr::Bool(true), inner, junk)
            }
            3 => {
                let junk = self.command(1);
                Command::seq(inner, Command::while_loop(Expr::Bool(false), None, None, junk))
            }
            _ => inner,
        }
    }

    /// A bi-command equal to `b` after splitting embeds into one-sided parts
    /// and applying the command laws inside them.
    pub fn bi_variant(&mut self, b: &Bicom) -> Bicom {
        match b {
            Bicom::Embed(c, d) => {
                let (c, d) = (self.kat_variant(c), self.kat_variant(d));
                match self.rng.gen_range(0..3) {
                    0 => Bicom::seq(Bicom::Embed(c, Command::Skip), Bicom::Embed(Command::Skip, d)),
                    1 => match c {
                        Command::Seq(c1, c2) => {
                            Bicom::seq(Bicom::Embed(*c1, Command::Skip), Bicom::Embed(*c2, d))
                        }
                        c => Bicom::Embed(c, d),
                    },
                    _ => Bicom::Embed(c, d),
                }
            }
            Bicom::Seq(a, rest) => {
                let (a, rest) = (self.bi_variant(a), self.bi_variant(rest));
                match (a, self.rng.gen_bool(0.3)) {
                    (Bicom::Seq(a1, a2), true) => Bicom::seq(*a1, Bicom::seq(*a2, rest)),
                    (a, _) => Bicom::seq(a, rest),
                }
            }
            Bicom::If { left, right, arms } => Bicom::ite(
                left.clone(),
                right.clone(),
                [
                    self.bi_variant(&arms[0]),
                    self.bi_variant(&arms[1]),
                    self.bi_variant(&arms[2]),
                    self.bi_variant(&arms[3]),
                ],
            ),
            Bicom::While(l) => Bicom::while_loop(BiLoop {
                body: self.bi_variant(&l.body),
                ..(**l).clone()
            }),
            b => b.clone(),
        }
    }
}

/// Right projections drop variants that mention the left store.
fn has_variants(c: &Command) -> bool {
    match c {
        Command::Seq(a, b) | Command::If(_, a, b) => has_variants(a) && has_variants(b),
        Command::While(l) => l.variant.is_some() && has_variants(&l.body),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{bieq, kateq, wellformed};
    use crate::syntax::sort::{check_bicom, check_command};
    use crate::transform::chk;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_terms_are_well_sorted_and_wellformed() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let vars = random_vars(&mut rng, 3);
            let cfg = GenConfig::new(vars);
            let mut g = Gen::new(&mut rng, &cfg);
            let c = g.command(4);
            check_command(&c).unwrap();
            let b = g.bicom(4);
            check_bicom(&b).unwrap();
            assert_eq!(wellformed(&b), Ok(()), "{b}");
            assert!(chk(&b, &cfg.vars).is_ok(), "{b}");
            assert!(kateq(&c, &g.kat_variant(&c)));
            assert!(bieq(&b, &g.bi_variant(&b)), "{b}");
        }
    }
}
