//! Abstract syntax, concrete syntax and sort checking.

mod ast;
mod lexer;
mod parser;
mod printer;
pub mod sort;

pub use ast::*;
pub use lexer::Pos;
pub use parser::{
    is_keyword, parse_bicom, parse_command, parse_expr, parse_problem, parse_relexpr,
    parse_rformula, parse_uformula, ParseError, ParseResult, Parser,
};
pub use sort::SortError;
