//! Parser and evaluator for a small real-valued expression language in the
//! time variable `t` and named parameters, with forward-mode dual-number
//! evaluation so time derivatives are exact to machine precision.
//!
//! Grammar (version 1, a public contract for trajectory spec files):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | power
//! power   := primary ('^' integer)?
//! primary := number | 't' | 'pi' | fn '(' expr ')' | ident | '(' expr ')'
//! fn      := sin | cos | tan | exp | sqrt | abs
//! ```
//!
//! Whitespace is insignificant. `^` takes an integer exponent and binds
//! tighter than unary minus, so `-t^2` is `-(t^2)`. There is no implicit
//! multiplication: `2t` is a syntax error. Identifiers other than `t`, `pi`,
//! and the function names are free parameters bound at evaluation time.
//!
//! `abs` is differentiable everywhere except 0, where the derivative is
//! taken to be 0 by convention.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Functions admitted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }
}

/// Expression AST. `pi` parses to a constant; parameters stay symbolic.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Time,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Value together with its d/dt at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub deriv: f64,
}

impl DualValue {
    fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number { value: f64, integral: Option<i64> },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Token, usize)>> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while let Some(tok) = lx.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    fn next_token(&mut self) -> Result<Option<(Token, usize)>> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let b = self.src[self.pos];
        let tok = match b {
            b'+' => {
                self.pos += 1;
                Token::Plus
            }
            b'-' => {
                self.pos += 1;
                Token::Minus
            }
            b'*' => {
                self.pos += 1;
                Token::Star
            }
            b'/' => {
                self.pos += 1;
                Token::Slash
            }
            b'^' => {
                self.pos += 1;
                Token::Caret
            }
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            b'0'..=b'9' => self.lex_number(start)?,
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii ident")
                    .to_string();
                Token::Ident(name)
            }
            other => {
                return Err(self.err(start, format!("unexpected character `{}`", other as char)))
            }
        };
        Ok(Some((tok, start)))
    }

    fn lex_number(&mut self, start: usize) -> Result<Token> {
        let mut integral = true;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            integral = false;
            self.pos += 1;
            if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_digit() {
                return Err(self.err(self.pos, "expected digit after decimal point"));
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            integral = false;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_digit() {
                return Err(self.err(self.pos, "expected digit in exponent"));
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text
            .parse()
            .map_err(|_| self.err(start, format!("invalid number literal `{text}`")))?;
        if !value.is_finite() {
            return Err(self.err(start, format!("number literal `{text}` overflows")));
        }
        let integral = if integral {
            text.parse::<i64>().ok()
        } else {
            None
        };
        Ok(Token::Number { value, integral })
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    len: usize,
}

/// Parses an expression in the grammar above. Errors carry a byte offset.
pub fn parse(src: &str) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = Lexer::tokenize(src)?;
    let len = src.len();
    let mut p = Parser {
        tokens,
        pos: 0,
        len,
    };
    let e = p.parse_expr()?;
    if let Some((_, off)) = p.tokens.get(p.pos) {
        return Err(Error::Parse {
            offset: *off,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Token, what: &str) -> Result<()> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            let inner = self.parse_factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_primary()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let negative = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let off = self.offset();
        match self.bump() {
            Some(Token::Number {
                integral: Some(k), ..
            }) => {
                let k = i32::try_from(k).map_err(|_| Error::Parse {
                    offset: off,
                    message: "exponent out of range".into(),
                })?;
                Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }))
            }
            Some(Token::Number { integral: None, .. }) => Err(Error::Parse {
                offset: off,
                message: "exponent must be an integer".into(),
            }),
            _ => Err(Error::Parse {
                offset: off,
                message: "expected integer exponent after `^`".into(),
            }),
        }
    }

    fn parse_primary(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Token::Number { value, .. }) => Ok(Expr::Const(value)),
            Some(Token::LParen) => {
                let e = self.parse_expr()?;
                self.expect(&Token::RParen, "closing `)`")?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                if name == "t" {
                    return Ok(Expr::Time);
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name).ok_or_else(|| Error::Parse {
                        offset: off,
                        message: format!("unknown function `{name}`"),
                    })?;
                    self.pos += 1;
                    let arg = self.parse_expr()?;
                    self.expect(&Token::RParen, "closing `)`")?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if Func::from_name(&name).is_some() {
                    return Err(Error::Parse {
                        offset: off,
                        message: format!("expected `(` after function `{name}`"),
                    });
                }
                Ok(Expr::Param(name))
            }
            _ => Err(Error::Parse {
                offset: off,
                message: "expected number, identifier, or `(`".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

fn eval_node(e: &Expr, t: DualValue, params: &BTreeMap<String, f64>) -> Result<DualValue> {
    let domain_err = |msg: &str| Error::Eval {
        t: t.value,
        message: msg.into(),
    };
    match e {
        Expr::Const(c) => Ok(DualValue::constant(*c)),
        Expr::Time => Ok(t),
        Expr::Param(name) => params
            .get(name)
            .map(|&v| DualValue::constant(v))
            .ok_or_else(|| Error::UnboundParam(name.clone())),
        Expr::Neg(x) => {
            let d = eval_node(x, t, params)?;
            Ok(DualValue {
                value: -d.value,
                deriv: -d.deriv,
            })
        }
        Expr::Add(a, b) => {
            let (a, b) = (eval_node(a, t, params)?, eval_node(b, t, params)?);
            Ok(DualValue {
                value: a.value + b.value,
                deriv: a.deriv + b.deriv,
            })
        }
        Expr::Sub(a, b) => {
            let (a, b) = (eval_node(a, t, params)?, eval_node(b, t, params)?);
            Ok(DualValue {
                value: a.value - b.value,
                deriv: a.deriv - b.deriv,
            })
        }
        Expr::Mul(a, b) => {
            let (a, b) = (eval_node(a, t, params)?, eval_node(b, t, params)?);
            Ok(dual_mul(a, b))
        }
        Expr::Div(a, b) => {
            let (a, b) = (eval_node(a, t, params)?, eval_node(b, t, params)?);
            if b.value == 0.0 {
                return Err(domain_err("division by zero"));
            }
            Ok(DualValue {
                value: a.value / b.value,
                deriv: (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value),
            })
        }
        Expr::Pow(x, k) => {
            let base = eval_node(x, t, params)?;
            if *k < 0 {
                let pos = dual_powi(base, k.unsigned_abs());
                if pos.value == 0.0 {
                    return Err(domain_err("zero raised to a negative power"));
                }
                let value = 1.0 / pos.value;
                Ok(DualValue {
                    value,
                    deriv: -pos.deriv * value * value,
                })
            } else {
                Ok(dual_powi(base, *k as u32))
            }
        }
        Expr::Call(func, x) => {
            let a = eval_node(x, t, params)?;
            let (value, deriv) = match func {
                Func::Sin => (a.value.sin(), a.deriv * a.value.cos()),
                Func::Cos => (a.value.cos(), -a.deriv * a.value.sin()),
                Func::Tan => {
                    let c = a.value.cos();
                    (a.value.tan(), a.deriv / (c * c))
                }
                Func::Exp => {
                    let e = a.value.exp();
                    (e, a.deriv * e)
                }
                Func::Sqrt => {
                    if a.value < 0.0 {
                        return Err(domain_err("sqrt of negative value"));
                    }
                    let s = a.value.sqrt();
                    let deriv = if a.deriv == 0.0 {
                        0.0
                    } else {
                        a.deriv / (2.0 * s)
                    };
                    (s, deriv)
                }
                Func::Abs => {
                    // derivative at the kink is 0 by convention
                    let deriv = if a.value == 0.0 {
                        0.0
                    } else {
                        a.deriv * a.value.signum()
                    };
                    (a.value.abs(), deriv)
                }
            };
            Ok(DualValue { value, deriv })
        }
    }
}

fn dual_mul(a: DualValue, b: DualValue) -> DualValue {
    DualValue {
        value: a.value * b.value,
        deriv: a.deriv * b.value + a.value * b.deriv,
    }
}

/// Exponentiation by squaring on dual numbers.
fn dual_powi(base: DualValue, mut n: u32) -> DualValue {
    let mut result = DualValue::constant(1.0);
    let mut square = base;
    while n > 0 {
        if n & 1 == 1 {
            result = dual_mul(result, square);
        }
        n >>= 1;
        if n > 0 {
            square = dual_mul(square, square);
        }
    }
    result
}

/// Evaluates `e` at time `t`. Shares the dual-number code path with
/// [`eval_dual`], so the two values are bit-identical.
pub fn eval(e: &Expr, t: f64, params: &BTreeMap<String, f64>) -> Result<f64> {
    let d = eval_node(
        e,
        DualValue {
            value: t,
            deriv: 0.0,
        },
        params,
    )?;
    if !d.value.is_finite() {
        return Err(Error::Eval {
            t,
            message: "non-finite result".into(),
        });
    }
    Ok(d.value)
}

/// Evaluates `e` and its exact d/dt at time `t`.
pub fn eval_dual(e: &Expr, t: f64, params: &BTreeMap<String, f64>) -> Result<DualValue> {
    let d = eval_node(
        e,
        DualValue {
            value: t,
            deriv: 1.0,
        },
        params,
    )?;
    if !d.value.is_finite() || !d.deriv.is_finite() {
        return Err(Error::Eval {
            t,
            message: "non-finite result".into(),
        });
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, child: &Expr, needs_parens: bool) -> fmt::Result {
    if needs_parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    /// Prints a form that reparses to a structurally equal AST.
    ///
    /// Negative constants have no literal syntax; they must be represented
    /// as `Neg(Const(..))` to round-trip.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                debug_assert!(
                    *c >= 0.0 && c.is_finite(),
                    "constants must be non-negative to round-trip"
                );
                write!(f, "{c}")
            }
            Expr::Time => write!(f, "t"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(x) => {
                write!(f, "-")?;
                fmt_child(f, x, precedence(x) < 3)
            }
            Expr::Add(a, b) => {
                fmt_child(f, a, precedence(a) < 1)?;
                write!(f, " + ")?;
                fmt_child(f, b, precedence(b) <= 1)
            }
            Expr::Sub(a, b) => {
                fmt_child(f, a, precedence(a) < 1)?;
                write!(f, " - ")?;
                fmt_child(f, b, precedence(b) <= 1)
            }
            Expr::Mul(a, b) => {
                fmt_child(f, a, precedence(a) < 2)?;
                write!(f, " * ")?;
                fmt_child(f, b, precedence(b) <= 2)
            }
            Expr::Div(a, b) => {
                fmt_child(f, a, precedence(a) < 2)?;
                write!(f, " / ")?;
                fmt_child(f, b, precedence(b) <= 2)
            }
            Expr::Pow(base, k) => {
                fmt_child(f, base, precedence(base) < 5)?;
                write!(f, "^{k}")
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}
