//! Coefficient expressions.
//!
//! A tiny grammar for the coefficient fields of linear operators:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          exponent must be constant
//! primary := number | 'pi' | 'x' | 'y' | func '(' expr ')' | '(' expr ')' | '|' expr '|'
//! func    := 'sqrt' | 'abs' | 'exp'
//! ```
//!
//! Evaluation is second-order forward mode: every node returns its value,
//! gradient and Hessian with respect to `(x, y)`, so certificates and
//! boundary analyses get analytic derivatives without symbolic algebra.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Number of independent variables an expression may reference.
pub const MAX_VARS: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Sqrt(Box<Expr>),
    Abs(Box<Expr>),
    Exp(Box<Expr>),
}

/// Value, gradient and Hessian of a scalar function of `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub g: [f64; MAX_VARS],
    pub h: [[f64; MAX_VARS]; MAX_VARS],
}

impl Dual2 {
    pub fn constant(v: f64) -> Self {
        Dual2 { v, g: [0.0; MAX_VARS], h: [[0.0; MAX_VARS]; MAX_VARS] }
    }

    pub fn variable(k: usize, v: f64) -> Self {
        let mut d = Dual2::constant(v);
        d.g[k] = 1.0;
        d
    }

    /// Chain rule for a scalar function with derivatives `f1 = f'(v)`, `f2 = f''(v)`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Dual2::constant(f0);
        for i in 0..MAX_VARS {
            out.g[i] = f1 * self.g[i];
            for j in 0..MAX_VARS {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return Dual2::constant(1.0);
        }
        if e == 1.0 {
            return self;
        }
        let v = self.v;
        let integer = e.fract() == 0.0 && e.abs() < 64.0;
        let f0 = if integer { v.powi(e as i32) } else { v.powf(e) };
        let f1 = if integer { e * v.powi(e as i32 - 1) } else { e * v.powf(e - 1.0) };
        let f2 = if e == 2.0 {
            2.0
        } else if integer {
            e * (e - 1.0) * v.powi(e as i32 - 2)
        } else {
            e * (e - 1.0) * v.powf(e - 2.0)
        };
        self.chain(f0, f1, f2)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn abs(self) -> Self {
        // Derivative of |v| at 0 is taken as 0; second derivative as 0.
        let sgn = if self.v > 0.0 {
            1.0
        } else if self.v < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.v.abs(), sgn, 0.0)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        let mut out = self;
        out.v += o.v;
        for i in 0..MAX_VARS {
            out.g[i] += o.g[i];
            for j in 0..MAX_VARS {
                out.h[i][j] += o.h[i][j];
            }
        }
        out
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        let mut out = self;
        out.v = -out.v;
        for i in 0..MAX_VARS {
            out.g[i] = -out.g[i];
            for j in 0..MAX_VARS {
                out.h[i][j] = -out.h[i][j];
            }
        }
        out
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        self + (-o)
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        let mut out = Dual2::constant(self.v * o.v);
        for i in 0..MAX_VARS {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..MAX_VARS {
                out.h[i][j] = self.h[i][j] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[i][j];
            }
        }
        out
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    fn div(self, o: Dual2) -> Dual2 {
        let inv = o.chain(1.0 / o.v, -1.0 / (o.v * o.v), 2.0 / (o.v * o.v * o.v));
        self * inv
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Largest variable index referenced plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(k) => k + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sqrt(a) | Expr::Abs(a) | Expr::Exp(a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    /// Plain value at `x` (missing coordinates read as 0).
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(k) => x.get(*k).copied().unwrap_or(0.0),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, e) => {
                let v = a.eval(x);
                if e.fract() == 0.0 && e.abs() < 64.0 {
                    v.powi(*e as i32)
                } else {
                    v.powf(*e)
                }
            }
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::Abs(a) => a.eval(x).abs(),
            Expr::Exp(a) => a.eval(x).exp(),
        }
    }

    /// Value with gradient and Hessian.
    pub fn eval_d2(&self, x: &[f64]) -> Dual2 {
        match self {
            Expr::Const(c) => Dual2::constant(*c),
            Expr::Var(k) => Dual2::variable(*k, x.get(*k).copied().unwrap_or(0.0)),
            Expr::Neg(a) => -a.eval_d2(x),
            Expr::Add(a, b) => a.eval_d2(x) + b.eval_d2(x),
            Expr::Sub(a, b) => a.eval_d2(x) - b.eval_d2(x),
            Expr::Mul(a, b) => a.eval_d2(x) * b.eval_d2(x),
            Expr::Div(a, b) => a.eval_d2(x) / b.eval_d2(x),
            Expr::Pow(a, e) => a.eval_d2(x).powf(*e),
            Expr::Sqrt(a) => a.eval_d2(x).sqrt(),
            Expr::Abs(a) => a.eval_d2(x).abs(),
            Expr::Exp(a) => a.eval_d2(x).exp(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(0) => write!(f, "x"),
            Expr::Var(1) => write!(f, "y"),
            Expr::Var(k) => write!(f, "x{k}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_operand(f, a, 4)
            }
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " + ")?;
                write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                write!(f, " - ")?;
                write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "*")?;
                write_operand(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_operand(f, a, 2)?;
                write!(f, "/")?;
                write_operand(f, b, 3)
            }
            Expr::Pow(a, e) => {
                write_operand(f, a, 5)?;
                if *e < 0.0 {
                    write!(f, "^({e:?})")
                } else {
                    write!(f, "^{e:?}")
                }
            }
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exponent = self.unary()?;
            let e = const_value(&exponent).ok_or(Error::Parse {
                pos: at,
                msg: "exponent must be a constant".into(),
            })?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(b'|') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b'|') {
                    return Err(self.err("expected closing `|`"));
                }
                Ok(Expr::Abs(Box::new(e)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match ident {
                    "x" | "x0" => Ok(Expr::Var(0)),
                    "y" | "x1" => Ok(Expr::Var(1)),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "sqrt" | "abs" | "exp" => {
                        if !self.eat(b'(') {
                            return Err(self.err("expected `(` after function name"));
                        }
                        let arg = Box::new(self.expr()?);
                        if !self.eat(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        Ok(match ident {
                            "sqrt" => Expr::Sqrt(arg),
                            "abs" => Expr::Abs(arg),
                            _ => Expr::Exp(arg),
                        })
                    }
                    _ => Err(Error::Parse { pos: start, msg: format!("unknown identifier `{ident}`") }),
                }
            }
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < s.len() && s[self.pos].is_ascii_digit() {
                while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Parse { pos: start, msg: format!("bad number `{text}`") })
    }
}

fn const_value(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Neg(a) => const_value(a).map(|v| -v),
        _ => None,
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Expr, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_check(src: &str, x: [f64; 2]) {
        let e = Expr::parse(src).unwrap();
        let d = e.eval_d2(&x);
        assert!((d.v - e.eval(&x)).abs() < 1e-12);
        let step = 1e-4;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += step;
            xm[i] -= step;
            let g = (e.eval(&xp) - e.eval(&xm)) / (2.0 * step);
            assert!((g - d.g[i]).abs() < 1e-6 * (1.0 + g.abs()), "{src}: grad {i}");
            for j in 0..2 {
                let mut xpp = xp;
                let mut xpm = xp;
                let mut xmp = xm;
                let mut xmm = xm;
                xpp[j] += step;
                xpm[j] -= step;
                xmp[j] += step;
                xmm[j] -= step;
                let h = (e.eval(&xpp) - e.eval(&xpm) - e.eval(&xmp) + e.eval(&xmm)) / (4.0 * step * step);
                assert!((h - d.h[i][j]).abs() < 1e-4 * (1.0 + h.abs()), "{src}: hess {i}{j}");
            }
        }
    }

    #[test]
    fn parses_fixture_coefficients() {
        assert_eq!(Expr::parse("2*x").unwrap().eval(&[0.5]), 1.0);
        assert_eq!(Expr::parse("-x/2").unwrap().eval(&[1.0]), -0.5);
        assert_eq!(Expr::parse("|x|^2").unwrap().eval(&[-3.0]), 9.0);
        assert_eq!(Expr::parse("abs(x)^2").unwrap().eval(&[-3.0]), 9.0);
        assert_eq!(Expr::parse("sqrt(x)").unwrap().eval(&[4.0]), 2.0);
        assert_eq!(Expr::parse("-x^2").unwrap().eval(&[3.0]), -9.0);
        assert_eq!(Expr::parse("2^-1").unwrap().eval(&[]), 0.5);
        assert!((Expr::parse("exp(y) - 1e-1").unwrap().eval(&[0.0, 0.0]) - 0.9).abs() < 1e-15);
        assert_eq!(Expr::parse("x*y + 1").unwrap().arity(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::parse("x +").is_err());
        assert!(Expr::parse("x^y").is_err());
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x x").is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        fd_check("x^3*y - 2*x", [0.7, -0.3]);
        fd_check("sqrt(x)*exp(0.5*y)", [0.4, 0.2]);
        fd_check("1/(1 + x^2 + y^2)", [0.3, 0.9]);
        fd_check("abs(x)^2.5 + 3", [-0.6, 0.1]);
        fd_check("2 - (x^2 + y^2)", [0.2, 0.5]);
    }

    proptest! {
        #[test]
        fn display_round_trips(a in -5.0f64..5.0, b in 0.1f64..3.0, x in 0.1f64..2.0) {
            let src = format!("({a})*x^{b} - exp(-x)/(1 + |x - {b}|) + sqrt(x)*y");
            let e = Expr::parse(&src).unwrap();
            let back = Expr::parse(&e.to_string()).unwrap();
            let p = [x, 0.5];
            prop_assert!((e.eval(&p) - back.eval(&p)).abs() <= 1e-12 * (1.0 + e.eval(&p).abs()));
        }
    }
}
