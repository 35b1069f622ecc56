//! Recursive-descent parser for the expression grammar.
//!
//! Infix `+ - * / ^` with parentheses, rationals as `p/q` (plain `/` works
//! because constant folding is exact), decimals, the symbols
//! `t R Rdot Rddot Re_inv We Th p_n k`, and the opaque forcing family
//! `p(t)`, `p'(t)`, `p''(t)`. Whitespace is insignificant. `^` binds
//! tightest and its exponent must fold to an exact rational constant.

use std::collections::HashMap;

use crate::rational::{parse_rat, Rat};
use crate::{Error, Result};

use super::{as_rational, Expr, Var};

const SYMBOLS: &[&str] = &["t", "R", "Rdot", "Rddot", "Re_inv", "We", "Th", "p_n", "k"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Ident(String),
    Opaque(u32),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next_tok(&mut self) -> Result<Option<(Tok, usize)>> {
        self.skip_ws();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.bytes[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.bytes.len()
                    && (self.bytes[end].is_ascii_digit() || self.bytes[end] == b'.')
                {
                    end += 1;
                }
                let text = &self.src[self.pos..end];
                let r = parse_rat(text).map_err(|_| Error::Parse {
                    pos: start,
                    msg: format!("bad number literal `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(r)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.bytes.len()
                    && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
                {
                    end += 1;
                }
                let name = &self.src[self.pos..end];
                self.pos = end;
                // `p`, optionally primed, followed by `(t)` is the forcing family
                if name == "p" {
                    let mut primes = 0u32;
                    while self.pos < self.bytes.len() && self.bytes[self.pos] == b'\'' {
                        primes += 1;
                        self.pos += 1;
                    }
                    let rest = &self.src[self.pos..];
                    if let Some(stripped) = rest.strip_prefix("(t)") {
                        self.pos += rest.len() - stripped.len();
                        return Ok(Some((Tok::Opaque(primes), start)));
                    }
                    if primes > 0 {
                        return Err(Error::Parse {
                            pos: start,
                            msg: "primed forcing must be written p'(t), p''(t), ...".into(),
                        });
                    }
                    // bare `p` is not a symbol
                    return Err(Error::UnknownSymbol {
                        name: "p".into(),
                        pos: start,
                    });
                }
                Tok::Ident(name.to_string())
            }
            other => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((tok, start)))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    bindings: HashMap<String, Rat>,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        let pos = self.pos();
        match self.bump() {
            Some(got) if got == t => Ok(()),
            got => Err(Error::Parse {
                pos,
                msg: format!("expected {t:?}, found {got:?}"),
            }),
        }
    }

    // sum := product (("+"|"-") product)*
    fn sum(&mut self) -> Result<Expr> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc + self.product()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc - self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // product := unary (("*"|"/") unary)*
    fn product(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    acc = acc / self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // unary := "-" unary | power
    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    // power := primary ("^" unary-exponent)?
    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let pos = self.pos();
            let exp_expr = if matches!(self.peek(), Some(Tok::Minus)) {
                self.bump();
                -self.primary()?
            } else {
                self.primary()?
            };
            let exp = as_rational(&exp_expr).ok_or_else(|| Error::Parse {
                pos,
                msg: "exponent does not fold to an exact rational".into(),
            })?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    // primary := number | symbol | opaque | "(" sum ")"
    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(r)) => Ok(Expr::Rational(r)),
            Some(Tok::Opaque(d)) => Ok(Expr::Opaque(d)),
            Some(Tok::Ident(name)) => {
                if let Some(v) = self.bindings.get(&name) {
                    return Ok(Expr::Rational(v.clone()));
                }
                match name.as_str() {
                    "t" => Ok(Expr::Var(Var::T)),
                    "R" => Ok(Expr::Var(Var::R)),
                    "Rdot" => Ok(Expr::Var(Var::Rdot)),
                    "Rddot" => Ok(Expr::Var(Var::Rddot)),
                    _ if SYMBOLS.contains(&name.as_str()) => Ok(Expr::Param(name)),
                    _ => Err(Error::UnknownSymbol { name, pos }),
                }
            }
            Some(Tok::LParen) => {
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            got => Err(Error::Parse {
                pos,
                msg: format!("expected a term, found {got:?}"),
            }),
        }
    }
}

/// Parses with rational bindings substituted for symbols (needed wherever a
/// bound symbol like `k` participates in an exponent).
pub fn parse_with(text: &str, bindings: &HashMap<String, Rat>) -> Result<Expr> {
    let mut lexer = Lexer::new(text);
    let mut toks = vec![];
    while let Some(t) = lexer.next_tok()? {
        toks.push(t);
    }
    let mut p = Parser {
        toks,
        idx: 0,
        bindings: bindings.clone(),
        end: text.len(),
    };
    let e = p.sum()?;
    if p.idx != p.toks.len() {
        return Err(Error::Parse {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

/// Parses with no bindings.
pub fn parse(text: &str) -> Result<Expr> {
    parse_with(text, &HashMap::new())
}
