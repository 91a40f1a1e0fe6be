//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr     := term { ("+"|"-") term }
//! term     := factor { ("*"|"/") factor }
//! factor   := ["-"] power
//! power    := base ["^" exponent]
//! exponent := integer | "(" ["-"] integer ["/" integer] ")"
//! base     := rational | ident | ident "[" ident {"," ident} "]"
//!           | ident {"'"} "(" ident ")" | "diff" "(" ident "," ident "," integer ")"
//!           | "log" "(" expr ")" | "(" expr ")"
//! rational := integer ["/" integer]
//! ```

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::expr::{Atom, Expr, MultiIndex, Rational};
use crate::jet::JetContext;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown symbol '{name}'")]
    UnknownSymbol {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: {message}")]
    Arity {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: duplicate section [{name}]")]
    DuplicateSection { name: String, line: usize },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { name: String, line: usize },
    #[error("missing section [{0}]")]
    MissingSection(String),
    #[error("line {line}: a problem may contain only one of [mapping] and [param-mapping]")]
    DuplicateMapping { line: usize },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl ParseError {
    /// 1-based (line, column) when the error is tied to a token.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::UnknownSymbol { line, column, .. }
            | ParseError::Arity { line, column, .. } => Some((*line, *column)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident { name: String, primes: usize },
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str, line: usize, column: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = column + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token {
                tok,
                line,
                column: col,
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && (chars[i] == '.' || chars[i].is_alphabetic()) {
                return Err(ParseError::Syntax {
                    line,
                    column: column + i,
                    message: "numeric literals must be integers or integer ratios".into(),
                });
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Int(digits.parse().expect("digits")),
                line,
                column: col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            let mut primes = 0;
            while i < chars.len() && chars[i] == '\'' {
                primes += 1;
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident { name, primes },
                line,
                column: col,
            });
            continue;
        }
        return Err(ParseError::Syntax {
            line,
            column: col,
            message: format!("unexpected character '{c}'"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: column + chars.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ctx: &'a JetContext,
    /// Resolve `name'` to `name` for variables (target-space expressions).
    strip_primes: bool,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, tok: &Token, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: tok.line,
            column: tok.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            self.error(&t, format!("expected {what}"))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident { name, primes } => Ok((name.clone(), *primes, t.clone())),
            _ => self.error(&t, "expected identifier"),
        }
    }

    fn expect_int(&mut self) -> Result<(BigInt, Token), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => Ok((n.clone(), t.clone())),
            _ => self.error(&t, "expected integer"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.next();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    factors.push(self.factor()?);
                }
                Tok::Slash => {
                    self.next();
                    factors.push(Expr::powi(self.factor()?, -1));
                }
                _ => break,
            }
        }
        Ok(Expr::product(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.next();
            return Ok(-self.power()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            let r = self.exponent()?;
            return Ok(Expr::pow(base, r));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Int(n) => Ok(Rational::from_integer(n)),
            Tok::LParen => {
                let neg = if self.peek().tok == Tok::Minus {
                    self.next();
                    true
                } else {
                    false
                };
                let (n, _) = self.expect_int()?;
                let mut r = Rational::from_integer(n);
                if self.peek().tok == Tok::Slash {
                    self.next();
                    let (d, dt) = self.expect_int()?;
                    if d.is_zero() {
                        return self.error(&dt, "zero denominator");
                    }
                    r /= Rational::from_integer(d);
                }
                self.expect(Tok::RParen, "')'")?;
                Ok(if neg { -r } else { r })
            }
            _ => self.error(
                &t,
                "exponent must be an integer or a parenthesized rational",
            ),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok.clone() {
            Tok::Int(n) => {
                if self.peek().tok == Tok::Slash {
                    if let Tok::Int(d) = self.peek_at(1).clone() {
                        let dt = self.toks[self.pos + 1].clone();
                        self.next();
                        self.next();
                        if d.is_zero() {
                            return self.error(&dt, "zero denominator");
                        }
                        return Ok(Expr::constant(Rational::new(n, d)));
                    }
                }
                Ok(Expr::constant(Rational::from_integer(n)))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident { name, primes } => self.ident(name, primes, &t),
            Tok::End => self.error(&t, "unexpected end of input"),
            _ => self.error(&t, "expected a number, a symbol or '('"),
        }
    }

    fn ident(&mut self, name: String, primes: usize, tok: &Token) -> Result<Expr, ParseError> {
        if primes == 0 && name == "log" && self.peek().tok == Tok::LParen {
            self.next();
            let arg = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(Expr::log(arg));
        }
        if primes == 0 && name == "diff" && self.peek().tok == Tok::LParen {
            self.next();
            let (fname, fprimes, ft) = self.expect_ident()?;
            self.expect(Tok::Comma, "','")?;
            let (xname, _, xt) = self.expect_ident()?;
            self.expect(Tok::Comma, "','")?;
            let (k, kt) = self.expect_int()?;
            self.expect(Tok::RParen, "')'")?;
            let k = k.to_u32().ok_or(ParseError::Syntax {
                line: kt.line,
                column: kt.column,
                message: "derivative order out of range".into(),
            })?;
            return self.function(&fname, &ft, &xname, &xt, fprimes as u32 + k);
        }
        if self.peek().tok == Tok::LParen {
            self.next();
            let (xname, _, xt) = self.expect_ident()?;
            self.expect(Tok::RParen, "')'")?;
            return self.function(&name, tok, &xname, &xt, primes as u32);
        }
        let resolved = self.resolve_name(&name, primes);
        if self.peek().tok == Tok::LBracket {
            self.next();
            let var = self
                .ctx
                .dependent_index(&resolved)
                .ok_or_else(|| self.unknown_or_arity(&name, primes, tok))?;
            let mut alpha = MultiIndex::zero(self.ctx.n());
            loop {
                let (d, dprimes, dt) = self.expect_ident()?;
                let dres = self.resolve_name(&d, dprimes);
                let k = self
                    .ctx
                    .independent_index(&dres)
                    .ok_or_else(|| ParseError::Arity {
                        line: dt.line,
                        column: dt.column,
                        message: format!(
                            "'{}' in a jet bracket is not an independent variable",
                            with_primes(&d, dprimes)
                        ),
                    })?;
                alpha = alpha.incremented(k);
                let sep = self.next();
                match sep.tok {
                    Tok::Comma => continue,
                    Tok::RBracket => break,
                    _ => return self.error(&sep, "expected ',' or ']'"),
                }
            }
            return Ok(Expr::atom(Atom::Dependent { var, alpha }));
        }
        if let Some(i) = self.ctx.independent_index(&resolved) {
            return Ok(Expr::indep(i));
        }
        if let Some(j) = self.ctx.dependent_index(&resolved) {
            return Ok(Expr::atom(Atom::Dependent {
                var: j,
                alpha: MultiIndex::zero(self.ctx.n()),
            }));
        }
        if primes == 0 && self.ctx.has_parameter(&name) {
            return Ok(Expr::param(&name));
        }
        Err(ParseError::UnknownSymbol {
            name: with_primes(&name, primes),
            line: tok.line,
            column: tok.column,
        })
    }

    fn unknown_or_arity(&self, name: &str, primes: usize, tok: &Token) -> ParseError {
        let resolved = self.resolve_name(name, primes);
        if self.ctx.independent_index(&resolved).is_some() || self.ctx.has_parameter(name) {
            ParseError::Arity {
                line: tok.line,
                column: tok.column,
                message: format!(
                    "'{}' is not a dependent variable",
                    with_primes(name, primes)
                ),
            }
        } else {
            ParseError::UnknownSymbol {
                name: with_primes(name, primes),
                line: tok.line,
                column: tok.column,
            }
        }
    }

    fn resolve_name(&self, name: &str, primes: usize) -> String {
        if self.strip_primes || primes == 0 {
            name.to_string()
        } else {
            with_primes(name, primes)
        }
    }

    fn function(
        &self,
        name: &str,
        ntok: &Token,
        arg: &str,
        atok: &Token,
        order: u32,
    ) -> Result<Expr, ParseError> {
        let decl = self
            .ctx
            .function(name)
            .ok_or_else(|| ParseError::UnknownSymbol {
                name: name.to_string(),
                line: ntok.line,
                column: ntok.column,
            })?;
        match self.ctx.independent_index(arg) {
            Some(i) if i == decl.arg => Ok(Expr::func(name, i, order)),
            _ => Err(ParseError::Arity {
                line: atok.line,
                column: atok.column,
                message: format!(
                    "function '{name}' is declared with argument '{}'",
                    self.ctx.independents()[decl.arg]
                ),
            }),
        }
    }
}

fn with_primes(name: &str, primes: usize) -> String {
    let mut s = name.to_string();
    s.extend(std::iter::repeat_n('\'', primes));
    s
}

pub(crate) fn parse_expr_at(
    text: &str,
    ctx: &JetContext,
    line: usize,
    column: usize,
    strip_primes: bool,
) -> Result<Expr, ParseError> {
    let toks = lex(text, line, column)?;
    let mut p = Parser {
        toks,
        pos: 0,
        ctx,
        strip_primes,
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return p.error(&t, "unexpected trailing input");
    }
    Ok(e)
}

/// Parses an expression against `ctx`.
pub fn parse_expr(text: &str, ctx: &JetContext) -> Result<Expr, ParseError> {
    parse_expr_at(text, ctx, 1, 1, false)
}

/// Parses an expression in a target context, where `name'` and `name` denote
/// the same coordinate.
pub fn parse_target_expr(text: &str, ctx: &JetContext) -> Result<Expr, ParseError> {
    parse_expr_at(text, ctx, 1, 1, true)
}
