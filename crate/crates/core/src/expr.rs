//! Scenario expression language: lexer, recursive-descent parser, printer and
//! jet evaluator.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | variable | func "(" expr ")" | "(" expr ")"
//! func    := "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "sinh" | "cosh"
//! variable:= "t" digits | "x" digits | "v" digits "_" digits
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits] | "." digits [...]
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-x1^2` is
//! `-(x1^2)` and `2^3^2` is `2^(3^2)`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::jet::{Jet, JetSpace, MAX_ORDER};
use crate::scenario::JetPoint;

/// Temporal and spatial dimensions `(p, n)` of a jet space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Dims {
    pub p: usize,
    pub n: usize,
}

impl Dims {
    pub fn new(p: usize, n: usize) -> Self {
        Dims { p, n }
    }

    pub fn is_valid(&self) -> bool {
        self.p >= 1 && self.n >= 1
    }

    /// Number of jet coordinates `(t, x, v)`.
    pub fn nvars(&self) -> usize {
        self.p + self.n + self.n * self.p
    }

    pub fn t(&self, alpha: usize) -> usize {
        alpha
    }

    pub fn x(&self, i: usize) -> usize {
        self.p + i
    }

    /// Jet coordinate of `x^i_alpha`.
    pub fn v(&self, i: usize, alpha: usize) -> usize {
        self.p + self.n + i * self.p + alpha
    }
}

/// A coordinate symbol of `J¹(T,M)`, zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T(usize),
    X(usize),
    /// `x^i_alpha`
    V { i: usize, alpha: usize },
}

impl Var {
    pub fn index(&self, dims: Dims) -> usize {
        match *self {
            Var::T(a) => dims.t(a),
            Var::X(i) => dims.x(i),
            Var::V { i, alpha } => dims.v(i, alpha),
        }
    }

    pub fn in_bounds(&self, dims: Dims) -> bool {
        match *self {
            Var::T(a) => a < dims.p,
            Var::X(i) => i < dims.n,
            Var::V { i, alpha } => i < dims.n && alpha < dims.p,
        }
    }

    pub fn is_temporal(&self) -> bool {
        matches!(self, Var::T(_))
    }

    pub fn is_velocity(&self) -> bool {
        matches!(self, Var::V { .. })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::T(a) => write!(f, "t{}", a + 1),
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::V { i, alpha } => write!(f, "v{}_{}", i + 1, alpha + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression AST. Immutable after parsing.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("invalid dimensions p={p}, n={n}: both must be at least 1")]
    InvalidDims { p: usize, n: usize },
    #[error("syntax error at line {line}, col {col}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        line: usize,
        col: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("unknown identifier `{name}` at line {line}, col {col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("variable `{name}` at line {line}, col {col} is out of range for p={p}, n={n}")]
    VariableOutOfRange {
        name: String,
        line: usize,
        col: usize,
        p: usize,
        n: usize,
    },
    #[error("variable `{0}` is not bound by the evaluation point")]
    Unbound(String),
    #[error("order {0} exceeds the supported maximum of {MAX_ORDER}")]
    OrderTooHigh(usize),
    #[error("domain error in `{subexpr}`: {reason} (argument value {value})")]
    Domain {
        subexpr: String,
        reason: &'static str,
        value: f64,
    },
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(source: &str) -> Result<Vec<Spanned>, ExprError> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                line: l0,
                col: c0,
                found: format!("malformed number `{text}`"),
                expected: vec!["number".into()],
            })?;
            col += i - start;
            out.push(Spanned { tok: Tok::Num(value), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(text), line: l0, col: c0 });
            continue;
        }
        return Err(ExprError::Syntax {
            line: l0,
            col: c0,
            found: format!("character `{c}`"),
            expected: vec!["operator".into(), "operand".into()],
        });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

/// Identifier references are resolved after a successful parse so that
/// syntax errors take precedence over name errors.
enum Raw {
    Num(f64),
    Ident(String, usize, usize),
    Neg(Box<Raw>),
    Func(Func, Box<Raw>),
    Bin(BinOp, Box<Raw>, Box<Raw>),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

const OPERAND: [&str; 4] = ["number", "variable", "function", "`(`"];

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        let t = self.peek();
        ExprError::Syntax {
            line: t.line,
            col: t.col,
            found: t.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expr(&mut self) -> Result<Raw, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Raw, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Raw, ExprError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Raw::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Raw, ExprError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Raw::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Raw, ExprError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Raw::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error(&["`)`", "operator"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if self.peek().tok != Tok::LParen {
                        return Err(self.error(&["`(`"]));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if self.peek().tok != Tok::RParen {
                        return Err(self.error(&["`)`", "operator"]));
                    }
                    self.bump();
                    return Ok(Raw::Func(func, Box::new(arg)));
                }
                Ok(Raw::Ident(name, t.line, t.col))
            }
            _ => Err(self.error(&OPERAND)),
        }
    }
}

fn parse_index(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse::<usize>().ok().filter(|&k| k >= 1).map(|k| k - 1)
}

/// Parses `t<k>`, `x<k>` or `v<i>_<alpha>` (one-based) into a zero-based [`Var`].
pub fn parse_var_name(name: &str) -> Option<Var> {
    if let Some(rest) = name.strip_prefix('t') {
        return parse_index(rest).map(Var::T);
    }
    if let Some(rest) = name.strip_prefix('x') {
        return parse_index(rest).map(Var::X);
    }
    if let Some(rest) = name.strip_prefix('v') {
        let (i, a) = rest.split_once('_')?;
        return Some(Var::V {
            i: parse_index(i)?,
            alpha: parse_index(a)?,
        });
    }
    None
}

fn resolve(raw: Raw, dims: Dims) -> Result<Expr, ExprError> {
    Ok(match raw {
        Raw::Num(v) => Expr::Num(v),
        Raw::Ident(name, line, col) => {
            let var = parse_var_name(&name).ok_or_else(|| ExprError::UnknownIdentifier {
                name: name.clone(),
                line,
                col,
            })?;
            if !var.in_bounds(dims) {
                return Err(ExprError::VariableOutOfRange {
                    name,
                    line,
                    col,
                    p: dims.p,
                    n: dims.n,
                });
            }
            Expr::Var(var)
        }
        Raw::Neg(a) => Expr::Neg(Box::new(resolve(*a, dims)?)),
        Raw::Func(f, a) => Expr::Func(f, Box::new(resolve(*a, dims)?)),
        Raw::Bin(op, a, b) => Expr::Bin(op, Box::new(resolve(*a, dims)?), Box::new(resolve(*b, dims)?)),
    })
}

/// Parses `source` against the variable bounds of `dims`.
pub fn parse(source: &str, dims: Dims) -> Result<Expr, ExprError> {
    if !dims.is_valid() {
        return Err(ExprError::InvalidDims { p: dims.p, n: dims.n });
    }
    if source.trim().is_empty() {
        return Err(ExprError::Empty);
    }
    let mut parser = Parser { toks: lex(source)?, pos: 0 };
    let raw = parser.expr()?;
    if parser.peek().tok != Tok::Eof {
        return Err(parser.error(&["operator", "end of input"]));
    }
    resolve(raw, dims)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

// ---------------------------------------------------------------------------
// construction helpers

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Sum that drops literal zeros.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .filter(|t| !t.is_zero_literal())
            .reduce(|a, b| Expr::bin(BinOp::Add, a, b))
            .unwrap_or(Expr::Num(0.0))
    }

    /// Product that short-circuits literal zeros and ones.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut acc: Option<Expr> = None;
        for f in factors {
            if f.is_zero_literal() {
                return Expr::Num(0.0);
            }
            if matches!(f, Expr::Num(v) if v == 1.0) {
                continue;
            }
            acc = Some(match acc {
                None => f,
                Some(a) => Expr::bin(BinOp::Mul, a, f),
            });
        }
        acc.unwrap_or(Expr::Num(1.0))
    }

    /// Syntactic set of variables.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Neg(a) | Expr::Func(_, a) => a.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Neg(a) => a.constant_value().map(|v| -v),
            _ => None,
        }
    }

    /// Evaluates over jets. `base` holds the expansion point for every jet
    /// coordinate of `dims`.
    pub fn eval_in(&self, space: &Arc<JetSpace>, order: usize, dims: Dims, base: &[f64]) -> Result<Jet, ExprError> {
        match self {
            Expr::Num(v) => Ok(Jet::constant(space, order, *v)),
            Expr::Var(v) => {
                if !v.in_bounds(dims) {
                    return Err(ExprError::Unbound(v.to_string()));
                }
                let k = v.index(dims);
                Ok(Jet::variable(space, order, k, base[k]))
            }
            Expr::Neg(a) => Ok(-a.eval_in(space, order, dims, base)?),
            Expr::Func(func, a) => {
                let arg = a.eval_in(space, order, dims, base)?;
                let x = arg.value();
                let domain = |reason| ExprError::Domain {
                    subexpr: self.to_string(),
                    reason,
                    value: x,
                };
                Ok(match func {
                    Func::Sin => arg.sin(),
                    Func::Cos => arg.cos(),
                    Func::Tan => {
                        if x.cos() == 0.0 {
                            return Err(domain("tangent pole"));
                        }
                        arg.tan()
                    }
                    Func::Exp => arg.exp(),
                    Func::Sinh => arg.sinh(),
                    Func::Cosh => arg.cosh(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(domain("logarithm of a nonpositive value"));
                        }
                        arg.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(domain("square root of a negative value"));
                        }
                        if x == 0.0 && order > 0 {
                            return Err(domain("square root is not differentiable at zero"));
                        }
                        arg.sqrt()
                    }
                })
            }
            Expr::Bin(op, a, b) => {
                if *op == BinOp::Pow {
                    return self.eval_pow(a, b, space, order, dims, base);
                }
                let lhs = a.eval_in(space, order, dims, base)?;
                let rhs = b.eval_in(space, order, dims, base)?;
                Ok(match op {
                    BinOp::Add => lhs + rhs,
                    BinOp::Sub => lhs - rhs,
                    BinOp::Mul => lhs * rhs,
                    BinOp::Div => {
                        if rhs.value() == 0.0 {
                            return Err(ExprError::Domain {
                                subexpr: self.to_string(),
                                reason: "division by zero",
                                value: 0.0,
                            });
                        }
                        lhs / rhs
                    }
                    BinOp::Pow => unreachable!(),
                })
            }
        }
    }

    fn eval_pow(
        &self,
        a: &Expr,
        b: &Expr,
        space: &Arc<JetSpace>,
        order: usize,
        dims: Dims,
        base: &[f64],
    ) -> Result<Jet, ExprError> {
        let lhs = a.eval_in(space, order, dims, base)?;
        let x = lhs.value();
        let domain = |reason| ExprError::Domain {
            subexpr: self.to_string(),
            reason,
            value: x,
        };
        if let Some(c) = b.constant_value() {
            if c.fract() == 0.0 && c.abs() < 1e9 {
                if c < 0.0 && x == 0.0 {
                    return Err(domain("negative power of zero"));
                }
                return Ok(lhs.powi(c as i64));
            }
            if x <= 0.0 {
                return Err(domain("non-integer power of a nonpositive base"));
            }
            return Ok(lhs.powf(c));
        }
        if x <= 0.0 {
            return Err(domain("variable power of a nonpositive base"));
        }
        let rhs = b.eval_in(space, order, dims, base)?;
        Ok((rhs * lhs.ln()).exp())
    }

    /// Evaluates all partial derivatives up to `order` at `at`.
    pub fn eval_jet(&self, at: &JetPoint, order: usize) -> Result<JetValue, ExprError> {
        if order > MAX_ORDER {
            return Err(ExprError::OrderTooHigh(order));
        }
        let dims = at.dims();
        let space = JetSpace::shared(dims.nvars(), order);
        let jet = self.eval_in(&space, order, dims, &at.coords())?;
        Ok(JetValue {
            dims,
            point: at.clone(),
            jet,
        })
    }
}

/// All partial derivatives of an expression up to a fixed order at one point.
#[derive(Clone, Debug)]
pub struct JetValue {
    pub dims: Dims,
    pub point: JetPoint,
    pub jet: Jet,
}

impl JetValue {
    pub fn order(&self) -> usize {
        self.jet.order()
    }

    pub fn value(&self) -> f64 {
        self.jet.value()
    }

    /// Mixed partial with respect to the listed variables (repetition allowed, order irrelevant).
    pub fn partial(&self, vars: &[Var]) -> f64 {
        let mut e = vec![0u8; self.dims.nvars()];
        for v in vars {
            e[v.index(self.dims)] += 1;
        }
        self.jet.derivative(&e)
    }

    /// Truncation to a lower order.
    pub fn truncate(&self, order: usize) -> JetValue {
        JetValue {
            dims: self.dims,
            point: self.point.clone(),
            jet: self.jet.truncate(order),
        }
    }

    /// Every partial derivative keyed by its (sorted) variable multi-index.
    pub fn partials(&self) -> Vec<(Vec<Var>, f64)> {
        let vars = all_vars(self.dims);
        self.jet
            .space()
            .monomials()
            .iter()
            .take(self.jet.space().len_at(self.order()))
            .map(|m| {
                let mut key = Vec::new();
                for (k, &e) in m.iter().enumerate() {
                    for _ in 0..e {
                        key.push(vars[k]);
                    }
                }
                (key, self.jet.derivative(m))
            })
            .collect()
    }
}

/// Every jet coordinate in jet-index order.
pub fn all_vars(dims: Dims) -> Vec<Var> {
    let mut vars = Vec::with_capacity(dims.nvars());
    vars.extend((0..dims.p).map(Var::T));
    vars.extend((0..dims.n).map(Var::X));
    for i in 0..dims.n {
        for alpha in 0..dims.p {
            vars.push(Var::V { i, alpha });
        }
    }
    vars
}
