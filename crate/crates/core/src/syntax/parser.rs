use std::collections::HashMap;

use thiserror::Error;

use super::ast::*;
use super::lexer::{lex, Pos, Tok, Token};
use super::sort::{self, SortError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: unexpected character '{ch}'")]
    Lex { pos: Pos, ch: char },
    #[error("{pos}: integer literal out of range")]
    IntRange { pos: Pos },
    #[error("{pos}: expected {expected}, found {found}")]
    Unexpected {
        pos: Pos,
        expected: String,
        found: String,
    },
    #[error("{pos}: undeclared variable '{name}'")]
    Undeclared { pos: Pos, name: String },
    #[error("{pos}: '{name}' uses the reserved '$' prefix")]
    Reserved { pos: Pos, name: String },
    #[error("{pos}: '{name}' is a keyword and cannot name a variable")]
    Keyword { pos: Pos, name: String },
    #[error("{pos}: variable '{name}' is declared twice")]
    Duplicate { pos: Pos, name: String },
    #[error("{pos}: {source}")]
    Sort { pos: Pos, source: SortError },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lex { pos, .. }
            | ParseError::IntRange { pos }
            | ParseError::Unexpected { pos, .. }
            | ParseError::Undeclared { pos, .. }
            | ParseError::Reserved { pos, .. }
            | ParseError::Keyword { pos, .. }
            | ParseError::Duplicate { pos, .. }
            | ParseError::Sort { pos, .. } => *pos,
        }
    }
}

pub type ParseResult<T> = Result<T, ParseError>;

const KEYWORDS: &[&str] = &[
    "vars", "int", "bool", "left", "right", "bicom", "spec", "ae", "aa", "pre", "post", "skip",
    "hav", "havF", "assert", "assume", "if", "then", "else", "fi", "while", "vnt", "inv", "do",
    "done", "thth", "thel", "elth", "elel", "algn", "true", "false", "div", "mod", "not",
    "forall", "exists",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn furthest(errs: Vec<ParseError>, last: ParseError) -> ParseError {
    errs.into_iter()
        .chain(std::iter::once(last))
        .rev()
        .max_by_key(|e| e.pos())
        .expect("at least one error")
}

pub struct Parser {
    toks: Vec<Token>,
    i: usize,
    vars: HashMap<String, Var>,
    allow_generated: bool,
    /// Inside the right command of `< c | c' >` a bare `>` closes the embed.
    right_embed: bool,
    no_gt: bool,
    declared: Vec<Var>,
}

impl Parser {
    pub fn new(src: &str, vars: &[Var]) -> ParseResult<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            i: 0,
            vars: vars.iter().map(|v| (v.name().to_string(), *v)).collect(),
            allow_generated: false,
            right_embed: false,
            no_gt: false,
            declared: Vec::new(),
        })
    }

    /// Accept `$`-prefixed names, as printed by the transformations.
    pub fn allow_generated(mut self) -> Parser {
        self.allow_generated = true;
        self
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Unexpected {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> ParseResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{p}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> ParseResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{kw}'")))
        }
    }

    fn expect_eof(&self) -> ParseResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn attempt<T>(
        &mut self,
        errs: &mut Vec<ParseError>,
        f: impl FnOnce(&mut Parser) -> ParseResult<T>,
    ) -> Option<T> {
        let (i, no_gt) = (self.i, self.no_gt);
        match f(self) {
            Ok(v) => Some(v),
            Err(e) => {
                self.i = i;
                self.no_gt = no_gt;
                errs.push(e);
                None
            }
        }
    }

    /// Run `f` with `>` treated as an ordinary operator (inside brackets).
    fn nested<T>(&mut self, f: impl FnOnce(&mut Parser) -> ParseResult<T>) -> ParseResult<T> {
        let saved = std::mem::replace(&mut self.no_gt, false);
        let r = f(self);
        self.no_gt = saved;
        r
    }

    fn sort_err<T>(pos: Pos, r: Result<T, SortError>) -> ParseResult<T> {
        r.map_err(|source| ParseError::Sort { pos, source })
    }

    fn var_name(&mut self) -> ParseResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(w) if !is_keyword(&w) => {
                self.bump();
                Ok((w, pos))
            }
            _ => Err(self.unexpected("a variable")),
        }
    }

    fn lookup(&self, name: &str, pos: Pos) -> ParseResult<Var> {
        if let Some(v) = self.vars.get(name) {
            if !v.is_generated() || self.allow_generated {
                return Ok(*v);
            }
        }
        if name.starts_with(RESERVED_PREFIX) {
            if !self.allow_generated {
                return Err(ParseError::Reserved {
                    pos,
                    name: name.to_string(),
                });
            }
            let sort = if name.starts_with("$ro") {
                Sort::Bool
            } else {
                Sort::Int
            };
            return Ok(Var::new(name, sort));
        }
        Err(ParseError::Undeclared {
            pos,
            name: name.to_string(),
        })
    }

    fn var(&mut self) -> ParseResult<Var> {
        let (name, pos) = self.var_name()?;
        self.lookup(&name, pos)
    }

    // ---- expressions ----

    pub fn expr(&mut self) -> ParseResult<Expr> {
        let (e, _) = self.expr_or()?;
        Ok(e)
    }

    fn expr_sorted(&mut self, want: Sort) -> ParseResult<Expr> {
        let pos = self.pos();
        let (e, s) = self.expr_or()?;
        if s != want {
            return Err(ParseError::Sort {
                pos,
                source: SortError::Expected {
                    expected: want,
                    found: s,
                },
            });
        }
        Ok(e)
    }

    fn binary(&self, op: BinOp, pos: Pos, a: (Expr, Sort), b: (Expr, Sort)) -> ParseResult<(Expr, Sort)> {
        let s = Self::sort_err(pos, sort::binary_sort(op, a.1, b.1))?;
        Ok((Expr::bin(op, a.0, b.0), s))
    }

    fn expr_or(&mut self) -> ParseResult<(Expr, Sort)> {
        let mut lhs = self.expr_and()?;
        while self.is_punct("||") {
            let pos = self.bump().pos;
            let rhs = self.expr_and()?;
            lhs = self.binary(BinOp::Or, pos, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn expr_and(&mut self) -> ParseResult<(Expr, Sort)> {
        let mut lhs = self.expr_cmp()?;
        while self.is_punct("&&") {
            let pos = self.bump().pos;
            let rhs = self.expr_cmp()?;
            lhs = self.binary(BinOp::And, pos, lhs, rhs)?;
        }
        Ok(lhs)
    }

    fn cmp_op(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Punct("=") => Some(BinOp::Eq),
            Tok::Punct("<>") | Tok::Punct("!=") => Some(BinOp::Ne),
            Tok::Punct("<") => Some(BinOp::Lt),
            Tok::Punct("<=") => Some(BinOp::Le),
            Tok::Punct(">") if !self.no_gt => Some(BinOp::Gt),
            Tok::Punct(">=") => Some(BinOp::Ge),
            _ => None,
        }
    }

    fn expr_cmp(&mut self) -> ParseResult<(Expr, Sort)> {
        let lhs = self.expr_add()?;
        match self.cmp_op() {
            Some(op) => {
                let pos = self.bump().pos;
                let rhs = self.expr_add()?;
                self.binary(op, pos, lhs, rhs)
            }
            None => Ok(lhs),
        }
    }

    fn expr_add(&mut self) -> ParseResult<(Expr, Sort)> {
        let mut lhs = self.expr_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => BinOp::Add,
                Tok::Punct("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.expr_mul()?;
            lhs = self.binary(op, pos, lhs, rhs)?;
        }
    }

    fn mul_op(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Punct("*") => Some(BinOp::Mul),
            Tok::Ident(w) if w == "div" => Some(BinOp::Div),
            Tok::Ident(w) if w == "mod" => Some(BinOp::Mod),
            _ => None,
        }
    }

    fn expr_mul(&mut self) -> ParseResult<(Expr, Sort)> {
        let mut lhs = self.expr_unary()?;
        while let Some(op) = self.mul_op() {
            let pos = self.bump().pos;
            let rhs = self.expr_unary()?;
            lhs = self.binary(op, pos, lhs, rhs)?;
        }
        Ok(lhs)
    }

    /// `-` directly followed by a literal is a negative literal.
    fn negative_literal(&mut self) -> ParseResult<Option<i64>> {
        if let (Tok::Punct("-"), Tok::Int(n)) = (self.peek(), self.peek_at(1)) {
            let n = *n;
            let pos = self.pos();
            self.bump();
            self.bump();
            let v = i64::try_from(-(n as i128)).map_err(|_| ParseError::IntRange { pos })?;
            return Ok(Some(v));
        }
        Ok(None)
    }

    fn expr_unary(&mut self) -> ParseResult<(Expr, Sort)> {
        if let Some(n) = self.negative_literal()? {
            return Ok((Expr::Int(n), Sort::Int));
        }
        let op = match self.peek() {
            Tok::Punct("-") => UnOp::Neg,
            Tok::Punct("!") => UnOp::Not,
            _ => return self.expr_atom(),
        };
        let pos = self.bump().pos;
        let (e, s) = self.expr_unary()?;
        let s = Self::sort_err(pos, sort::unary_sort(op, s))?;
        Ok((Expr::Unary(op, Box::new(e)), s))
    }

    fn expr_atom(&mut self) -> ParseResult<(Expr, Sort)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                let v = i64::try_from(n).map_err(|_| ParseError::IntRange { pos })?;
                Ok((Expr::Int(v), Sort::Int))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok((Expr::Bool(w == "true"), Sort::Bool))
            }
            Tok::Ident(w) if !is_keyword(&w) => {
                self.bump();
                let x = self.lookup(&w, pos)?;
                Ok((Expr::Var(x), x.sort()))
            }
            Tok::Punct("(") => {
                self.bump();
                let r = self.nested(|p| p.expr_or())?;
                self.expect_punct(")")?;
                Ok(r)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ---- unary formulas ----

    pub fn uformula(&mut self) -> ParseResult<UFormula> {
        let lhs = self.uf_imp()?;
        if self.eat_punct("<->") {
            let rhs = self.uformula()?;
            return Ok(UFormula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn uf_imp(&mut self) -> ParseResult<UFormula> {
        let lhs = self.uf_or()?;
        if self.eat_punct("->") {
            let rhs = self.uf_imp()?;
            return Ok(UFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn uf_or(&mut self) -> ParseResult<UFormula> {
        let mut lhs = self.uf_and()?;
        while self.eat_punct("\\/") {
            lhs = UFormula::or(lhs, self.uf_and()?);
        }
        Ok(lhs)
    }

    fn uf_and(&mut self) -> ParseResult<UFormula> {
        let mut lhs = self.uf_unary()?;
        while self.eat_punct("/\\") {
            lhs = UFormula::and(lhs, self.uf_unary()?);
        }
        Ok(lhs)
    }

    fn uf_unary(&mut self) -> ParseResult<UFormula> {
        if self.eat_kw("not") {
            return Ok(UFormula::not(self.uf_unary()?));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            let forall = self.is_kw("forall");
            self.bump();
            let x = self.var()?;
            self.expect_punct(".")?;
            let body = Box::new(self.uformula()?);
            return Ok(if forall {
                UFormula::Forall(x, body)
            } else {
                UFormula::Exists(x, body)
            });
        }
        if self.is_punct("(") {
            let mut errs = Vec::new();
            if let Some(e) = self.attempt(&mut errs, |p| p.expr_sorted(Sort::Bool)) {
                return Ok(UFormula::Atom(e));
            }
            let r = self.attempt(&mut errs, |p| {
                p.bump();
                let f = p.nested(|p| p.uformula())?;
                p.expect_punct(")")?;
                Ok(f)
            });
            return r.ok_or_else(|| furthest(errs, self.unexpected("a formula")));
        }
        Ok(UFormula::Atom(self.expr_sorted(Sort::Bool)?))
    }

    // ---- relational expressions and formulas ----

    pub fn relexpr(&mut self) -> ParseResult<RelExpr> {
        let mut lhs = self.re_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => BinOp::Add,
                Tok::Punct("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = RelExpr::bin(op, lhs, self.re_mul()?);
        }
    }

    fn re_mul(&mut self) -> ParseResult<RelExpr> {
        let mut lhs = self.re_unary()?;
        while let Some(op) = self.mul_op() {
            self.bump();
            lhs = RelExpr::bin(op, lhs, self.re_unary()?);
        }
        Ok(lhs)
    }

    fn re_unary(&mut self) -> ParseResult<RelExpr> {
        if let Some(n) = self.negative_literal()? {
            return Ok(RelExpr::Int(n));
        }
        if self.eat_punct("-") {
            return Ok(RelExpr::Neg(Box::new(self.re_unary()?)));
        }
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(RelExpr::Int(
                    i64::try_from(n).map_err(|_| ParseError::IntRange { pos })?,
                ))
            }
            Tok::Punct("*<|") => {
                self.bump();
                let e = self.nested(|p| p.expr_sorted(Sort::Int))?;
                self.expect_punct("*<]")?;
                Ok(RelExpr::Left(e))
            }
            Tok::Punct("[>") => {
                self.bump();
                let e = self.nested(|p| p.expr_sorted(Sort::Int))?;
                self.expect_punct("|>")?;
                Ok(RelExpr::Right(e))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.nested(|p| p.relexpr())?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.unexpected("a relational expression")),
        }
    }

    pub fn rformula(&mut self) -> ParseResult<RelFormula> {
        let lhs = self.rf_imp()?;
        if self.eat_punct("<->") {
            let rhs = self.rformula()?;
            return Ok(RelFormula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn rf_imp(&mut self) -> ParseResult<RelFormula> {
        let lhs = self.rf_or()?;
        if self.eat_punct("->") {
            let rhs = self.rf_imp()?;
            return Ok(RelFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn rf_or(&mut self) -> ParseResult<RelFormula> {
        let mut lhs = self.rf_and()?;
        while self.eat_punct("\\/") {
            lhs = RelFormula::or(lhs, self.rf_and()?);
        }
        Ok(lhs)
    }

    fn rf_and(&mut self) -> ParseResult<RelFormula> {
        let mut lhs = self.rf_unary()?;
        while self.eat_punct("/\\") {
            lhs = RelFormula::and(lhs, self.rf_unary()?);
        }
        Ok(lhs)
    }

    fn rf_cmp(&mut self) -> ParseResult<RelFormula> {
        let lhs = self.relexpr()?;
        let op = match self.peek() {
            Tok::Punct("=") => BinOp::Eq,
            Tok::Punct("<>") | Tok::Punct("!=") => BinOp::Ne,
            Tok::Punct("<") => BinOp::Lt,
            Tok::Punct("<=") => BinOp::Le,
            Tok::Punct(">") => BinOp::Gt,
            Tok::Punct(">=") => BinOp::Ge,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.relexpr()?;
        Ok(RelFormula::Cmp(op, lhs, rhs))
    }

    fn rf_agree(&mut self) -> ParseResult<RelFormula> {
        let (a, sa) = self.expr_or()?;
        let pos = self.pos();
        self.expect_punct("=:=")?;
        let (b, sb) = self.expr_or()?;
        if sa != sb {
            return Err(ParseError::Sort {
                pos,
                source: SortError::Mismatch {
                    op: "=:=".to_string(),
                },
            });
        }
        Ok(RelFormula::Agree(a, b))
    }

    fn rf_unary(&mut self) -> ParseResult<RelFormula> {
        if self.eat_kw("not") {
            return Ok(RelFormula::not(self.rf_unary()?));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            let forall = self.is_kw("forall");
            self.bump();
            let (side, x) = if self.eat_punct("|") {
                (Side::Right, self.var()?)
            } else {
                let x = self.var()?;
                self.expect_punct("|")?;
                (Side::Left, x)
            };
            self.expect_punct(".")?;
            let body = Box::new(self.rformula()?);
            return Ok(if forall {
                RelFormula::Forall(side, x, body)
            } else {
                RelFormula::Exists(side, x, body)
            });
        }
        let mut errs = Vec::new();
        match self.peek().clone() {
            Tok::Punct("(") => {
                if let Some(f) = self.attempt(&mut errs, |p| p.rf_cmp()) {
                    return Ok(f);
                }
                if let Some(f) = self.attempt(&mut errs, |p| p.rf_agree()) {
                    return Ok(f);
                }
                let r = self.attempt(&mut errs, |p| {
                    p.bump();
                    let f = p.nested(|p| p.rformula())?;
                    p.expect_punct(")")?;
                    Ok(f)
                });
                r.ok_or_else(|| furthest(errs, self.unexpected("a relational formula")))
            }
            Tok::Punct(open @ ("*<|" | "[>")) => {
                if let Some(f) = self.attempt(&mut errs, |p| p.rf_cmp()) {
                    return Ok(f);
                }
                let r = self.attempt(&mut errs, |p| {
                    p.bump();
                    let f = p.nested(|p| p.uformula())?;
                    if open == "*<|" {
                        p.expect_punct("*<]")?;
                        Ok(RelFormula::Left(f))
                    } else {
                        p.expect_punct("|>")?;
                        Ok(RelFormula::Right(f))
                    }
                });
                r.ok_or_else(|| furthest(errs, self.unexpected("a relational formula")))
            }
            Tok::Int(_) | Tok::Punct("-") => {
                if let Some(f) = self.attempt(&mut errs, |p| p.rf_cmp()) {
                    return Ok(f);
                }
                let r = self.attempt(&mut errs, |p| p.rf_agree());
                r.ok_or_else(|| furthest(errs, self.unexpected("a relational formula")))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                if let Some(f) = self.attempt(&mut errs, |p| p.rf_agree()) {
                    return Ok(f);
                }
                self.bump();
                Ok(RelFormula::Bool(w == "true"))
            }
            _ => self.rf_agree(),
        }
    }

    // ---- commands ----

    fn starts_stmt(&self) -> bool {
        match self.peek() {
            Tok::Ident(w) => {
                matches!(w.as_str(), "skip" | "hav" | "assert" | "if" | "while") || !is_keyword(w)
            }
            Tok::Punct("(") => true,
            _ => false,
        }
    }

    pub fn command(&mut self) -> ParseResult<Command> {
        let mut items = vec![self.stmt()?];
        while self.eat_punct(";") {
            if !self.starts_stmt() {
                break;
            }
            items.push(self.stmt()?);
        }
        Ok(Command::seq_all(items))
    }

    fn stmt(&mut self) -> ParseResult<Command> {
        if self.eat_kw("skip") {
            return Ok(Command::Skip);
        }
        if self.eat_kw("hav") {
            return Ok(Command::Havoc(self.var()?));
        }
        if self.eat_kw("assert") {
            self.expect_punct("{")?;
            let p = self.nested(|p| p.uformula())?;
            self.expect_punct("}")?;
            return Ok(Command::Assert(p));
        }
        if self.eat_kw("if") {
            let e = self.expr_sorted(Sort::Bool)?;
            self.expect_kw("then")?;
            let a = self.command()?;
            let b = if self.eat_kw("else") {
                self.command()?
            } else {
                Command::Skip
            };
            self.expect_kw("fi")?;
            return Ok(Command::ite(e, a, b));
        }
        if self.eat_kw("while") {
            let test = self.expr_sorted(Sort::Bool)?;
            let variant = if self.eat_kw("vnt") {
                Some(self.expr_sorted(Sort::Int)?)
            } else {
                None
            };
            let invariant = if self.eat_kw("inv") {
                Some(self.uformula()?)
            } else {
                None
            };
            self.expect_kw("do")?;
            let body = self.command()?;
            self.expect_kw("done")?;
            return Ok(Command::while_loop(test, variant, invariant, body));
        }
        if self.eat_punct("(") {
            let c = self.nested(|p| p.command())?;
            self.expect_punct(")")?;
            return Ok(c);
        }
        if !self.starts_stmt() {
            return Err(self.unexpected("a command"));
        }
        let x = self.var()?;
        let pos = self.pos();
        self.expect_punct(":=")?;
        let saved = std::mem::replace(&mut self.no_gt, self.right_embed);
        let r = self.expr_or();
        self.no_gt = saved;
        let (e, s) = r?;
        if s != x.sort() {
            return Err(ParseError::Sort {
                pos,
                source: SortError::Assign {
                    var: x.name().to_string(),
                    found: s,
                },
            });
        }
        Ok(Command::Assign(x, e))
    }

    // ---- bi-commands ----

    pub fn bicom(&mut self) -> ParseResult<Bicom> {
        let mut items = vec![self.bstmt()?];
        while self.eat_punct(";") {
            if !self.starts_bstmt() {
                break;
            }
            items.push(self.bstmt()?);
        }
        Ok(Bicom::seq_all(items))
    }

    fn starts_bstmt(&self) -> bool {
        match self.peek() {
            Tok::Ident(w) => matches!(w.as_str(), "assert" | "havF" | "if" | "while"),
            Tok::Punct(p) => matches!(*p, "<" | "|_" | "("),
            _ => false,
        }
    }

    fn braced_rformula(&mut self) -> ParseResult<RelFormula> {
        self.expect_punct("{")?;
        let f = self.nested(|p| p.rformula())?;
        self.expect_punct("}")?;
        Ok(f)
    }

    fn bstmt(&mut self) -> ParseResult<Bicom> {
        if self.eat_punct("<") {
            let saved = (self.right_embed, self.no_gt);
            self.right_embed = false;
            self.no_gt = false;
            let left = self.command();
            let left = left.and_then(|c| {
                self.expect_punct("|")?;
                Ok(c)
            });
            let right = left.and_then(|c| {
                self.right_embed = true;
                Ok((c, self.command()?))
            });
            (self.right_embed, self.no_gt) = saved;
            let (c, d) = right?;
            self.expect_punct(">")?;
            return Ok(Bicom::Embed(c, d));
        }
        if self.eat_punct("|_") {
            let c = self.command()?;
            self.expect_punct("_|")?;
            return Ok(Bicom::sync(c));
        }
        if self.eat_kw("assert") {
            return Ok(Bicom::Assert(self.braced_rformula()?));
        }
        if self.eat_kw("havF") {
            let x = self.var()?;
            return Ok(Bicom::Havf(x, self.braced_rformula()?));
        }
        if self.eat_kw("if") {
            let left = self.expr_sorted(Sort::Bool)?;
            self.expect_punct("|")?;
            let right = self.expr_sorted(Sort::Bool)?;
            let mut arms = Vec::with_capacity(4);
            for kw in ["thth", "thel", "elth", "elel"] {
                self.expect_kw(kw)?;
                arms.push(self.bicom()?);
            }
            self.expect_kw("fi")?;
            let arms: [Bicom; 4] = arms.try_into().expect("four arms");
            return Ok(Bicom::ite(left, right, arms));
        }
        if self.eat_kw("while") {
            let left = self.expr_sorted(Sort::Bool)?;
            self.expect_punct("|")?;
            let right = self.expr_sorted(Sort::Bool)?;
            let (left_align, right_align) = if self.eat_kw("algn") {
                let l = self.rformula()?;
                self.expect_punct("|")?;
                (l, self.rformula()?)
            } else {
                (RelFormula::Bool(false), RelFormula::Bool(false))
            };
            let variant = if self.eat_kw("vnt") {
                Some(self.relexpr()?)
            } else {
                None
            };
            let invariant = if self.eat_kw("inv") {
                Some(self.rformula()?)
            } else {
                None
            };
            self.expect_kw("do")?;
            let body = self.bicom()?;
            self.expect_kw("done")?;
            return Ok(Bicom::while_loop(BiLoop {
                left,
                right,
                left_align,
                right_align,
                variant,
                invariant,
                body,
            }));
        }
        if self.eat_punct("(") {
            let b = self.nested(|p| p.bicom())?;
            self.expect_punct(")")?;
            return Ok(b);
        }
        Err(self.unexpected("a bi-command"))
    }

    // ---- problems ----

    fn decls(&mut self) -> ParseResult<()> {
        self.expect_kw("vars")?;
        if self.eat_punct(";") {
            return Ok(());
        }
        loop {
            let pos = self.pos();
            let name = match self.peek().clone() {
                Tok::Ident(w) => {
                    self.bump();
                    w
                }
                _ => return Err(self.unexpected("a variable name")),
            };
            if is_keyword(&name) {
                return Err(ParseError::Keyword { pos, name });
            }
            if name.starts_with(RESERVED_PREFIX) {
                return Err(ParseError::Reserved { pos, name });
            }
            self.expect_punct(":")?;
            let sort = if self.eat_kw("int") {
                Sort::Int
            } else if self.eat_kw("bool") {
                Sort::Bool
            } else {
                return Err(self.unexpected("'int' or 'bool'"));
            };
            if self.vars.contains_key(&name) {
                return Err(ParseError::Duplicate { pos, name });
            }
            let v = Var::new(&name, sort);
            self.vars.insert(name, v);
            self.declared.push(v);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")
    }

    pub fn problem(&mut self) -> ParseResult<Problem> {
        self.decls()?;
        let block = |p: &mut Parser, kw: &str| -> ParseResult<Option<Command>> {
            if !p.eat_kw(kw) {
                return Ok(None);
            }
            p.expect_punct("{")?;
            let c = p.command()?;
            p.expect_punct("}")?;
            Ok(Some(c))
        };
        let left = block(self, "left")?;
        let right = block(self, "right")?;
        self.expect_kw("bicom")?;
        self.expect_punct("{")?;
        let bicom = self.bicom()?;
        self.expect_punct("}")?;
        self.expect_kw("spec")?;
        let kind = if self.eat_kw("ae") {
            SpecKind::ForallExists
        } else if self.eat_kw("aa") {
            SpecKind::ForallForall
        } else {
            return Err(self.unexpected("'ae' or 'aa'"));
        };
        self.expect_kw("pre")?;
        let pre = self.braced_rformula()?;
        self.expect_kw("post")?;
        let post = self.braced_rformula()?;
        Ok(Problem {
            vars: std::mem::take(&mut self.declared),
            left,
            right,
            bicom,
            spec: Spec { kind, pre, post },
        })
    }

    /// Run one entry point and require the whole input to be consumed.
    pub fn complete<T>(
        mut self,
        f: impl FnOnce(&mut Parser) -> ParseResult<T>,
    ) -> ParseResult<T> {
        let v = f(&mut self)?;
        self.expect_eof()?;
        Ok(v)
    }
}

pub fn parse_problem(src: &str) -> ParseResult<Problem> {
    Parser::new(src, &[])?.complete(|p| p.problem())
}

pub fn parse_command(src: &str, vars: &[Var]) -> ParseResult<Command> {
    Parser::new(src, vars)?.complete(|p| p.command())
}

pub fn parse_bicom(src: &str, vars: &[Var]) -> ParseResult<Bicom> {
    Parser::new(src, vars)?.complete(|p| p.bicom())
}

pub fn parse_expr(src: &str, vars: &[Var]) -> ParseResult<Expr> {
    Parser::new(src, vars)?.complete(|p| p.expr())
}

pub fn parse_uformula(src: &str, vars: &[Var]) -> ParseResult<UFormula> {
    Parser::new(src, vars)?.complete(|p| p.uformula())
}

pub fn parse_relexpr(src: &str, vars: &[Var]) -> ParseResult<RelExpr> {
    Parser::new(src, vars)?.complete(|p| p.relexpr())
}

pub fn parse_rformula(src: &str, vars: &[Var]) -> ParseResult<RelFormula> {
    Parser::new(src, vars)?.complete(|p| p.rformula())
}
