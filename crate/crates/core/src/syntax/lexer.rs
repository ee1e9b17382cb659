use std::fmt;

use super::parser::ParseError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Identifiers and keywords; generated names keep their `$`.
    Ident(String),
    Int(u64),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::Punct(p) => write!(f, "'{p}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

// Longest first so prefixes never shadow longer operators.
const PUNCTS: &[&str] = &[
    "*<|", "*<]", "=:=", "<->", ":=", "->", "/\\", "\\/", "[>", "|>", "&&", "||", "<=", ">=",
    "<>", "!=", "<", ">", "=", "+", "-", "*", "(", ")", "{", "}", ";", ",", ":", ".", "|", "!",
];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let at = |i: usize| chars.get(i).copied();

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && at(i + 1) == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        // `|_ c _|` brackets; `|_` must not run into an identifier.
        if c == '|' && at(i + 1) == Some('_') && !at(i + 2).is_some_and(is_ident_char) {
            toks.push(Token {
                tok: Tok::Punct("|_"),
                pos,
            });
            advance(2, &mut i, &mut col);
            continue;
        }
        if c == '_' && at(i + 1) == Some('|') {
            toks.push(Token {
                tok: Tok::Punct("_|"),
                pos,
            });
            advance(2, &mut i, &mut col);
            continue;
        }
        if is_ident_start(c) || (c == '$' && at(i + 1).is_some_and(is_ident_start)) {
            let start = i;
            let mut n = 1;
            while at(start + n).is_some_and(is_ident_char) {
                n += 1;
            }
            let word: String = chars[start..start + n].iter().collect();
            toks.push(Token {
                tok: Tok::Ident(word),
                pos,
            });
            advance(n, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut n = 0;
            while at(start + n).is_some_and(|c| c.is_ascii_digit()) {
                n += 1;
            }
            let text: String = chars[start..start + n].iter().collect();
            let value: u64 = text.parse().map_err(|_| ParseError::IntRange { pos })?;
            toks.push(Token {
                tok: Tok::Int(value),
                pos,
            });
            advance(n, &mut i, &mut col);
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                toks.push(Token {
                    tok: Tok::Punct(p),
                    pos,
                });
                advance(p.chars().count(), &mut i, &mut col);
            }
            None => return Err(ParseError::Lex { pos, ch: c }),
        }
    }
    toks.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn relational_brackets() {
        assert_eq!(
            kinds("*<| x *<] [> y |> =:="),
            vec![
                Tok::Punct("*<|"),
                Tok::Ident("x".into()),
                Tok::Punct("*<]"),
                Tok::Punct("[>"),
                Tok::Ident("y".into()),
                Tok::Punct("|>"),
                Tok::Punct("=:="),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn sync_brackets_and_identifiers() {
        assert_eq!(
            kinds("|_ x_1 := 0 _|"),
            vec![
                Tok::Punct("|_"),
                Tok::Ident("x_1".into()),
                Tok::Punct(":="),
                Tok::Int(0),
                Tok::Punct("_|"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_and_errors() {
        let toks = lex("skip;\n  hav x").unwrap();
        assert_eq!(toks[2].pos, Pos { line: 2, col: 3 });
        match lex("x := 1 @") {
            Err(ParseError::Lex { pos, ch }) => {
                assert_eq!((pos.line, pos.col, ch), (1, 8, '@'));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
