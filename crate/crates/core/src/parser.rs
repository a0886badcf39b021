//! Concrete syntax.
//!
//! ```text
//! expr    ::= summand ('+' summand)*
//! summand ::= 'future' expr | atom
//! atom    ::= ['-' | '+'] INT | '(' expr ')'
//! ```
//!
//! `+` associates to the left. `future` takes the longest expression to its
//! right, so `3 + future future (3+4)` is `3 + (future (future (3+4)))`.
//! `#` starts a comment that runs to the end of the line.

use std::fmt;

use thiserror::Error;

use crate::calculus::Expr;

/// Program text plus an optional name used in diagnostics.
#[derive(Debug, Clone)]
pub struct SourceProgram {
    pub text: String,
    pub name: Option<String>,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            name: None,
        }
    }

    pub fn named(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            name: Some(name.into()),
        }
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {message} (expected {expected})")]
pub struct ParseError {
    pub position: Position,
    pub message: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Int(String),
    Plus,
    Minus,
    LParen,
    RParen,
    Future,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(digits) => write!(f, "integer `{digits}`"),
            Token::Plus => f.write_str("`+`"),
            Token::Minus => f.write_str("`-`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Future => f.write_str("`future`"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, Position)>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);

    while let Some(&c) = chars.peek() {
        let pos = Position { line, column };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '+' | '-' | '(' | ')' => {
                chars.next();
                column += 1;
                let tok = match c {
                    '+' => Token::Plus,
                    '-' => Token::Minus,
                    '(' => Token::LParen,
                    _ => Token::RParen,
                };
                tokens.push((tok, pos));
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(d);
                    chars.next();
                    column += 1;
                }
                tokens.push((Token::Int(digits), pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_alphanumeric() || **d == '_') {
                    word.push(d);
                    chars.next();
                    column += 1;
                }
                if word == "future" {
                    tokens.push((Token::Future, pos));
                } else {
                    return Err(ParseError {
                        position: pos,
                        message: format!("unknown identifier `{word}`"),
                        expected: "an expression".into(),
                    });
                }
            }
            other => {
                return Err(ParseError {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                    expected: "an expression".into(),
                });
            }
        }
    }
    tokens.push((Token::Eof, Position { line, column }));
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, Position)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn position(&self) -> Position {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.position(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.summand()?;
        while *self.peek() == Token::Plus {
            self.bump();
            let rhs = self.summand()?;
            acc = Expr::add(acc, rhs);
        }
        Ok(acc)
    }

    fn summand(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Future {
            self.bump();
            return Ok(Expr::future(self.expr()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.position();
        match self.peek().clone() {
            Token::Int(digits) => {
                self.bump();
                self.literal(&digits, start)
            }
            sign @ (Token::Minus | Token::Plus) => {
                self.bump();
                match self.peek().clone() {
                    Token::Int(digits) => {
                        self.bump();
                        let text = if sign == Token::Minus {
                            format!("-{digits}")
                        } else {
                            digits
                        };
                        self.literal(&text, start)
                    }
                    _ => Err(self.error("integer after sign")),
                }
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                match self.peek() {
                    Token::RParen => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(self.error("`)` or `+`")),
                }
            }
            _ => Err(self.error("integer, `(`, or `future`")),
        }
    }

    fn literal(&self, text: &str, at: Position) -> Result<Expr, ParseError> {
        text.parse::<i64>().map(Expr::Int).map_err(|_| ParseError {
            position: at,
            message: format!("integer literal `{text}` out of range"),
            expected: "a 64-bit signed integer".into(),
        })
    }
}

/// Parses a whole program. The result never contains future references.
pub fn parse(src: &SourceProgram) -> Result<Expr, ParseError> {
    let tokens = tokenize(&src.text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expr()?;
    match parser.peek() {
        Token::Eof => Ok(expr),
        _ => Err(parser.error("`+` or end of input")),
    }
}

pub fn parse_str(text: &str) -> Result<Expr, ParseError> {
    parse(&SourceProgram::new(text))
}

/// Prints an expression so that `parse(unparse(e)) == e` for reference-free
/// `e`. References print as `fv<id>`.
pub fn unparse(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn write_expr(expr: &Expr, out: &mut String) {
    match expr {
        Expr::Int(i) => out.push_str(&i.to_string()),
        Expr::Ref(id) => out.push_str(&id.to_string()),
        Expr::Future(body) => {
            out.push_str("future ");
            write_operand(body, matches!(**body, Expr::Add(..)), out);
        }
        Expr::Add(l, r) => {
            write_operand(l, open_tail(l), out);
            out.push_str(" + ");
            write_operand(r, matches!(**r, Expr::Add(..)), out);
        }
    }
}

fn write_operand(expr: &Expr, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(expr, out);
        out.push(')');
    } else {
        write_expr(expr, out);
    }
}

// True when the printed form ends in an unparenthesized `future`, which would
// swallow a following `+`.
fn open_tail(expr: &Expr) -> bool {
    match expr {
        Expr::Future(_) => true,
        Expr::Add(_, r) => matches!(**r, Expr::Future(_)),
        Expr::Int(_) | Expr::Ref(_) => false,
    }
}
