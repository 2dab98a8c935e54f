//! Coefficient expressions in the spatial variable `x`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' unary)?              right-associative
//! atom    := number | ident | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! `-x^2` therefore reads as `-(x^2)` and `2^-1` is accepted. The names
//! `x`, `i` and `pi` are reserved; any other identifier is a parameter that
//! must be bound at evaluation time. Functions are limited to
//! `exp sin cos tan tanh sqrt abs`.
//!
//! Evaluation is complex throughout. `sqrt` of a negative real returns the
//! principal root (`sqrt(-4) = 2i`), and `abs` returns the modulus as a real.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Named parameter values available to an expression.
pub type Params = BTreeMap<String, Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Tan,
    Tanh,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Exp => z.exp(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Tanh => z.tanh(),
            // negative reals map to +i sqrt(|z|) whatever the sign of zero
            Func::Sqrt if z.im == 0.0 && z.re < 0.0 => Complex64::new(0.0, (-z.re).sqrt()),
            Func::Sqrt => z.sqrt(),
            Func::Abs => Complex64::new(z.norm(), 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// A complex constant; produced by [`Expr::bind`], never by the parser.
    Const(Complex64),
    X,
    I,
    Pi,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("malformed number at byte {offset}")]
    BadNumber { offset: usize },
}

impl ParseError {
    /// Byte offset into the source, when one applies.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::BadNumber { offset } => Some(*offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        if b.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        if b.is_ascii_digit() || b == b'.' {
            while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
                pos += 1;
            }
            if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                let mut look = pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                if look < bytes.len() && bytes[look].is_ascii_digit() {
                    pos = look;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let text = &src[start..pos];
            let v: f64 = text.parse().map_err(|_| ParseError::BadNumber { offset: start })?;
            out.push((Tok::Num(v), start));
        } else if b.is_ascii_alphabetic() || b == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            out.push((Tok::Ident(src[start..pos].to_string()), start));
        } else {
            let tok = match b {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(b as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = src[start..].chars().next().unwrap_or('?');
                    return Err(ParseError::Syntax {
                        offset: start,
                        expected: vec!["number", "identifier", "operator", "parenthesis"],
                        found: format!("`{ch}`"),
                    });
                }
            };
            pos += 1;
            out.push((tok, start));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Tok::Op('^')) {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if matches!(self.peek(), Tok::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { name, offset })?;
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Ok(match name.as_str() {
                    "x" => Expr::X,
                    "i" => Expr::I,
                    "pi" => Expr::Pi,
                    _ => Expr::Param(name),
                })
            }
            _ => Err(self.error(vec!["number", "identifier", "`(`", "`-`"])),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::RParen) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec!["`)`", "operator"]))
        }
    }
}

/// Parses an expression. Unknown identifiers are accepted here and
/// resolved at evaluation.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { toks: lex(source)?, pos: 0 };
    let e = p.sum()?;
    if !matches!(p.peek(), Tok::End) {
        return Err(p.error(vec!["operator", "end of input"]));
    }
    Ok(e)
}

fn pow(base: Complex64, exp: Complex64) -> Result<Complex64, EvalError> {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 1024.0 {
        let n = exp.re.abs() as u32;
        let v = crate::scalar::cpowi(base, n);
        if exp.re < 0.0 {
            if v == Complex64::new(0.0, 0.0) {
                return Err(EvalError::DivisionByZero);
            }
            return Ok(Complex64::new(1.0, 0.0) / v);
        }
        return Ok(v);
    }
    if base == Complex64::new(0.0, 0.0) {
        return if exp.re > 0.0 {
            Ok(base)
        } else {
            Err(EvalError::DivisionByZero)
        };
    }
    Ok(base.powc(exp))
}

impl Expr {
    /// Evaluates at `x` with the given parameters.
    pub fn eval(&self, x: f64, params: &Params) -> Result<Complex64, EvalError> {
        let v = self.eval_inner(x, params)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EvalError::Domain(format!("non-finite value at x = {x}")));
        }
        Ok(v)
    }

    fn eval_inner(&self, x: f64, params: &Params) -> Result<Complex64, EvalError> {
        Ok(match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::Const(c) => *c,
            Expr::X => Complex64::new(x, 0.0),
            Expr::I => Complex64::new(0.0, 1.0),
            Expr::Pi => Complex64::new(std::f64::consts::PI, 0.0),
            Expr::Param(name) => *params.get(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Neg(e) => -e.eval_inner(x, params)?,
            Expr::Call(f, e) => f.apply(e.eval_inner(x, params)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval_inner(x, params)?;
                let b = r.eval_inner(x, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == Complex64::new(0.0, 0.0) {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b)?,
                }
            }
        })
    }

    /// Whether the expression depends on `x`.
    pub fn mentions_x(&self) -> bool {
        match self {
            Expr::X => true,
            Expr::Num(_) | Expr::Const(_) | Expr::I | Expr::Pi | Expr::Param(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.mentions_x(),
            Expr::Binary(_, l, r) => l.mentions_x() || r.mentions_x(),
        }
    }

    /// Parameter names referenced by the expression.
    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_params(out),
            Expr::Binary(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
            _ => {}
        }
    }

    /// Replaces every parameter by its value, giving a closed expression
    /// in `x` alone.
    pub fn bind(&self, params: &Params) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Param(name) => {
                Expr::Const(*params.get(name).ok_or_else(|| EvalError::Unbound(name.clone()))?)
            }
            Expr::Neg(e) => Expr::Neg(Box::new(e.bind(params)?)),
            Expr::Call(f, e) => Expr::Call(*f, Box::new(e.bind(params)?)),
            Expr::Binary(op, l, r) => Expr::Binary(*op, Box::new(l.bind(params)?), Box::new(r.bind(params)?)),
            other => other.clone(),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            // constants print as parenthesised sums when they carry a sign
            // or an imaginary part
            Expr::Const(c) if c.im != 0.0 || c.re.is_sign_negative() => 1,
            Expr::Num(v) if v.is_sign_negative() => 1,
            _ => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{:?}", c.re)
                } else {
                    write!(f, "{:?}+{:?}*i", c.re, c.im)
                }
            }
            Expr::X => write!(f, "x"),
            Expr::I => write!(f, "i"),
            Expr::Pi => write!(f, "pi"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_at(f, 3)
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.fmt_at(f, 0)?;
                write!(f, ")")
            }
            Expr::Binary(op, l, r) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => ("+", 1, 2),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                l.fmt_at(f, lp)?;
                write!(f, "{sym}")?;
                r.fmt_at(f, rp)
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
