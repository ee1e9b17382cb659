use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
        })
    }
}

/// Names are interned process-wide so variables are `Copy` and compare by id.
struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

fn interner() -> &'static Mutex<Interner> {
    static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        Mutex::new(Interner {
            names: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

/// A program variable. The sort is part of identity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    id: u32,
    sort: Sort,
}

/// Prefix reserved for variables generated by the transformations.
pub const RESERVED_PREFIX: char = '$';

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        let mut table = interner().lock().unwrap_or_else(|e| e.into_inner());
        let id = match table.ids.get(name) {
            Some(&id) => id,
            None => {
                let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
                let id = table.names.len() as u32;
                table.names.push(leaked);
                table.ids.insert(leaked, id);
                id
            }
        };
        Var { id, sort }
    }

    pub fn int(name: &str) -> Var {
        Var::new(name, Sort::Int)
    }

    pub fn boolean(name: &str) -> Var {
        Var::new(name, Sort::Bool)
    }

    pub fn name(self) -> &'static str {
        let table = interner().lock().unwrap_or_else(|e| e.into_inner());
        table.names[self.id as usize]
    }

    pub fn sort(self) -> Sort {
        self.sort
    }

    pub fn is_generated(self) -> bool {
        self.name().starts_with(RESERVED_PREFIX)
    }

    /// Same sort, name with `prefix` prepended.
    pub fn prefixed(self, prefix: &str) -> Var {
        Var::new(&format!("{prefix}{}", self.name()), self.sort)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name(), self.sort)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(Var),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(x: Var) -> Expr {
        Expr::Var(x)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Unary(UnOp::Neg, Box::new(e))
    }
}

/// Unary assertions over one store.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum UFormula {
    Atom(Expr),
    Not(Box<UFormula>),
    And(Box<UFormula>, Box<UFormula>),
    Or(Box<UFormula>, Box<UFormula>),
    Implies(Box<UFormula>, Box<UFormula>),
    Iff(Box<UFormula>, Box<UFormula>),
    Forall(Var, Box<UFormula>),
    Exists(Var, Box<UFormula>),
}

impl UFormula {
    pub fn tt() -> UFormula {
        UFormula::Atom(Expr::Bool(true))
    }

    pub fn ff() -> UFormula {
        UFormula::Atom(Expr::Bool(false))
    }

    pub fn not(p: UFormula) -> UFormula {
        UFormula::Not(Box::new(p))
    }

    pub fn and(p: UFormula, q: UFormula) -> UFormula {
        UFormula::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: UFormula, q: UFormula) -> UFormula {
        UFormula::Or(Box::new(p), Box::new(q))
    }

    pub fn implies(p: UFormula, q: UFormula) -> UFormula {
        UFormula::Implies(Box::new(p), Box::new(q))
    }

    pub fn iff(p: UFormula, q: UFormula) -> UFormula {
        UFormula::Iff(Box::new(p), Box::new(q))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            UFormula::Atom(_) => true,
            UFormula::Not(p) => p.is_quantifier_free(),
            UFormula::And(p, q)
            | UFormula::Or(p, q)
            | UFormula::Implies(p, q)
            | UFormula::Iff(p, q) => p.is_quantifier_free() && q.is_quantifier_free(),
            UFormula::Forall(..) | UFormula::Exists(..) => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

/// Integer expressions over a pair of stores.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelExpr {
    Left(Expr),
    Right(Expr),
    Int(i64),
    Neg(Box<RelExpr>),
    /// Arithmetic operators only.
    Binary(BinOp, Box<RelExpr>, Box<RelExpr>),
}

impl RelExpr {
    pub fn bin(op: BinOp, a: RelExpr, b: RelExpr) -> RelExpr {
        RelExpr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn right_var(x: Var) -> RelExpr {
        RelExpr::Right(Expr::Var(x))
    }

    pub fn left_var(x: Var) -> RelExpr {
        RelExpr::Left(Expr::Var(x))
    }
}

/// Relational assertions over a pair of stores.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelFormula {
    Bool(bool),
    Left(UFormula),
    Right(UFormula),
    /// Comparison operators only.
    Cmp(BinOp, RelExpr, RelExpr),
    /// `e =:= e'`: the left value of `e` equals the right value of `e'`.
    Agree(Expr, Expr),
    Not(Box<RelFormula>),
    And(Box<RelFormula>, Box<RelFormula>),
    Or(Box<RelFormula>, Box<RelFormula>),
    Implies(Box<RelFormula>, Box<RelFormula>),
    Iff(Box<RelFormula>, Box<RelFormula>),
    Forall(Side, Var, Box<RelFormula>),
    Exists(Side, Var, Box<RelFormula>),
}

impl RelFormula {
    pub fn left_expr(e: Expr) -> RelFormula {
        RelFormula::Left(UFormula::Atom(e))
    }

    pub fn right_expr(e: Expr) -> RelFormula {
        RelFormula::Right(UFormula::Atom(e))
    }

    pub fn not(p: RelFormula) -> RelFormula {
        RelFormula::Not(Box::new(p))
    }

    pub fn and(p: RelFormula, q: RelFormula) -> RelFormula {
        RelFormula::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: RelFormula, q: RelFormula) -> RelFormula {
        RelFormula::Or(Box::new(p), Box::new(q))
    }

    pub fn implies(p: RelFormula, q: RelFormula) -> RelFormula {
        RelFormula::Implies(Box::new(p), Box::new(q))
    }

    pub fn iff(p: RelFormula, q: RelFormula) -> RelFormula {
        RelFormula::Iff(Box::new(p), Box::new(q))
    }

    pub fn cmp(op: BinOp, a: RelExpr, b: RelExpr) -> RelFormula {
        RelFormula::Cmp(op, a, b)
    }

    pub fn and_all(items: impl IntoIterator<Item = RelFormula>) -> RelFormula {
        let mut items: Vec<RelFormula> = items.into_iter().collect();
        match items.pop() {
            None => RelFormula::Bool(true),
            Some(last) => items
                .into_iter()
                .rev()
                .fold(last, |acc, p| RelFormula::and(p, acc)),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            RelFormula::Bool(_) | RelFormula::Cmp(..) | RelFormula::Agree(..) => true,
            RelFormula::Left(p) | RelFormula::Right(p) => p.is_quantifier_free(),
            RelFormula::Not(p) => p.is_quantifier_free(),
            RelFormula::And(p, q)
            | RelFormula::Or(p, q)
            | RelFormula::Implies(p, q)
            | RelFormula::Iff(p, q) => p.is_quantifier_free() && q.is_quantifier_free(),
            RelFormula::Forall(..) | RelFormula::Exists(..) => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Skip,
    Assign(Var, Expr),
    Havoc(Var),
    Assert(UFormula),
    Seq(Box<Command>, Box<Command>),
    If(Expr, Box<Command>, Box<Command>),
    While(Box<Loop>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loop {
    pub test: Expr,
    pub variant: Option<Expr>,
    pub invariant: Option<UFormula>,
    pub body: Command,
}

impl Command {
    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence; empty input gives `skip`.
    pub fn seq_all(items: impl IntoIterator<Item = Command>) -> Command {
        let mut items: Vec<Command> = items.into_iter().collect();
        match items.pop() {
            None => Command::Skip,
            Some(last) => items
                .into_iter()
                .rev()
                .fold(last, |acc, c| Command::seq(c, acc)),
        }
    }

    pub fn ite(e: Expr, a: Command, b: Command) -> Command {
        Command::If(e, Box::new(a), Box::new(b))
    }

    pub fn while_loop(
        test: Expr,
        variant: Option<Expr>,
        invariant: Option<UFormula>,
        body: Command,
    ) -> Command {
        Command::While(Box::new(Loop {
            test,
            variant,
            invariant,
            body,
        }))
    }
}

/// Bi-commands: pairs of programs with an explicit alignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bicom {
    Embed(Command, Command),
    Assert(RelFormula),
    /// Havoc the right copy of a variable, keeping only values satisfying the filter.
    Havf(Var, RelFormula),
    Seq(Box<Bicom>, Box<Bicom>),
    /// Arms in order: then/then, then/else, else/then, else/else.
    If {
        left: Expr,
        right: Expr,
        arms: Box<[Bicom; 4]>,
    },
    While(Box<BiLoop>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiLoop {
    pub left: Expr,
    pub right: Expr,
    pub left_align: RelFormula,
    pub right_align: RelFormula,
    pub variant: Option<RelExpr>,
    pub invariant: Option<RelFormula>,
    pub body: Bicom,
}

impl Bicom {
    pub fn seq(a: Bicom, b: Bicom) -> Bicom {
        Bicom::Seq(Box::new(a), Box::new(b))
    }

    pub fn seq_all(items: impl IntoIterator<Item = Bicom>) -> Bicom {
        let mut items: Vec<Bicom> = items.into_iter().collect();
        match items.pop() {
            None => Bicom::skip(),
            Some(last) => items
                .into_iter()
                .rev()
                .fold(last, |acc, b| Bicom::seq(b, acc)),
        }
    }

    pub fn skip() -> Bicom {
        Bicom::Embed(Command::Skip, Command::Skip)
    }

    /// `|_ c _|`
    pub fn sync(c: Command) -> Bicom {
        Bicom::Embed(c.clone(), c)
    }

    pub fn ite(left: Expr, right: Expr, arms: [Bicom; 4]) -> Bicom {
        Bicom::If {
            left,
            right,
            arms: Box::new(arms),
        }
    }

    pub fn while_loop(l: BiLoop) -> Bicom {
        Bicom::While(Box::new(l))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecKind {
    /// Every pair of executions satisfies the postcondition.
    ForallForall,
    /// Every left execution has a matching right execution.
    ForallExists,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Spec {
    pub kind: SpecKind,
    pub pre: RelFormula,
    pub post: RelFormula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub vars: Vec<Var>,
    pub left: Option<Command>,
    pub right: Option<Command>,
    pub bicom: Bicom,
    pub spec: Spec,
}

/// Child indices from the root of a bicom (and into embedded commands).
pub type Path = Vec<usize>;

pub fn show_path(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}
