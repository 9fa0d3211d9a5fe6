//! Objective expressions: tokenizer, recursive-descent parser and lowering to
//! [`ContinuousPoly`].
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := power ('*' power)*
//! power   := unary ('^' power)?          exponent must be an integer literal
//! unary   := '-' unary | primary
//! primary := number | ident | '(' expr ')'
//! number  := [0-9]+ ('.' [0-9]+)?
//! ident   := [A-Za-z][A-Za-z0-9_]*
//! ```
//!
//! Unary minus binds tighter than `^`, so `-x^2` is `(-x)^2`. There is no
//! division and no implicit multiplication: write `0.5*x` and `2*x`.

use std::fmt;

use crate::poly::{ContinuousPoly, PolyError};

/// Byte range `[start, end)` in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Variable(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// Expression tree node with its source span.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unsupported operator {0}")]
    UnsupportedOperator(char),
    #[error("malformed number literal")]
    InvalidNumber,
    #[error("expected {expected}, found {found}")]
    UnexpectedToken {
        expected: &'static str,
        found: String,
    },
    #[error("expected {expected}, found end of input")]
    UnexpectedEnd { expected: &'static str },
    #[error("exponent must be an integer literal")]
    ExponentNotInteger,
    #[error("exponent must be non-negative")]
    NegativeExponent,
    #[error("expression nests deeper than {0} levels")]
    TooDeep(usize),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at {span}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObjectiveError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = |t: Tok| (t, Span::new(start, start + 1));
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => toks.push(single(Tok::Plus)),
            b'-' => toks.push(single(Tok::Minus)),
            b'*' => toks.push(single(Tok::Star)),
            b'^' => toks.push(single(Tok::Caret)),
            b'(' => toks.push(single(Tok::LParen)),
            b')' => toks.push(single(Tok::RParen)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == frac {
                        return Err(ParseError {
                            kind: ParseErrorKind::InvalidNumber,
                            span: Span::new(start, i),
                        });
                    }
                }
                let value: f64 = src[start..i].parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::InvalidNumber,
                    span: Span::new(start, i),
                })?;
                toks.push((Tok::Num(value), Span::new(start, i)));
                continue;
            }
            b'A'..=b'Z' | b'a'..=b'z' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), Span::new(start, i)));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().expect("index is on a char boundary");
                let span = Span::new(start, start + ch.len_utf8());
                let kind = if ch.is_ascii_punctuation() {
                    ParseErrorKind::UnsupportedOperator(ch)
                } else {
                    ParseErrorKind::UnexpectedChar(ch)
                };
                return Err(ParseError { kind, span });
            }
        }
        i += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    depth: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.toks.get(self.pos) {
            Some((t, span)) => ParseError {
                kind: ParseErrorKind::UnexpectedToken {
                    expected,
                    found: t.to_string(),
                },
                span: *span,
            },
            None => ParseError {
                kind: ParseErrorKind::UnexpectedEnd { expected },
                span: Span::new(self.end, self.end),
            },
        }
    }

    fn enter(&mut self, at: Span) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                kind: ParseErrorKind::TooDeep(MAX_DEPTH),
                span: at,
            });
        }
        Ok(())
    }

    fn current_span(&self) -> Span {
        self.toks
            .get(self.pos)
            .map_or(Span::new(self.end, self.end), |(_, s)| *s)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter(self.current_span())?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ExprKind::Add as fn(Box<Expr>, Box<Expr>) -> ExprKind,
                Some(Tok::Minus) => ExprKind::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr {
                kind: op(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            let rhs = self.power()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr {
                kind: ExprKind::Mul(Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        self.enter(self.current_span())?;
        let base = self.unary()?;
        let out = if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let exp = self.power()?;
            let k = literal_exponent(&exp)?;
            let span = base.span.join(exp.span);
            Expr {
                kind: ExprKind::Pow(Box::new(base), k),
                span,
            }
        } else {
            base
        };
        self.depth -= 1;
        Ok(out)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            let (_, op_span) = self.bump().expect("peeked");
            self.enter(op_span)?;
            let inner = self.unary()?;
            self.depth -= 1;
            let span = op_span.join(inner.span);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {}
            _ => return Err(self.unexpected("a number, variable or `(`")),
        }
        let (tok, span) = self.bump().expect("peeked");
        match tok {
            Tok::Num(v) => Ok(Expr {
                kind: ExprKind::Number(v),
                span,
            }),
            Tok::Ident(name) => Ok(Expr {
                kind: ExprKind::Variable(name),
                span,
            }),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        let (_, close) = self.bump().expect("peeked");
                        Ok(Expr {
                            kind: inner.kind,
                            span: span.join(close),
                        })
                    }
                    _ => Err(self.unexpected("`)`")),
                }
            }
            _ => unreachable!("filtered above"),
        }
    }
}

fn literal_exponent(exp: &Expr) -> Result<u32, ParseError> {
    let err = |kind| ParseError {
        kind,
        span: exp.span,
    };
    match &exp.kind {
        ExprKind::Number(v) if v.fract() == 0.0 && *v <= u32::MAX as f64 => Ok(*v as u32),
        ExprKind::Neg(inner) if matches!(inner.kind, ExprKind::Number(_)) => {
            Err(err(ParseErrorKind::NegativeExponent))
        }
        _ => Err(err(ParseErrorKind::ExponentNotInteger)),
    }
}

/// Parses objective text into an expression tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
        end: source.len(),
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

/// Fully expands an expression tree into canonical polynomial form.
pub fn lower(ast: &Expr) -> Result<ContinuousPoly, PolyError> {
    Ok(match &ast.kind {
        ExprKind::Number(v) => ContinuousPoly::constant(*v),
        ExprKind::Variable(name) => ContinuousPoly::variable(name.clone()),
        ExprKind::Neg(e) => lower(e)?.scale(-1.0),
        ExprKind::Add(a, b) => lower(a)?.add(&lower(b)?),
        ExprKind::Sub(a, b) => lower(a)?.sub(&lower(b)?),
        ExprKind::Mul(a, b) => lower(a)?.mul(&lower(b)?)?,
        ExprKind::Pow(a, k) => lower(a)?.pow(*k)?,
    })
}

/// `parse` followed by `lower`.
pub fn parse_objective(source: &str) -> Result<ContinuousPoly, ObjectiveError> {
    Ok(lower(&parse(source)?)?)
}
