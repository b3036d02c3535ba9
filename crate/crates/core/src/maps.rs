//! Analytic maps `ℂ^d → ℂ^r` written in a small expression language.
//!
//! ```text
//! map    := expr (';' expr)*
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ('-'|'+') factor | atom ('^' INT)?
//! atom   := NUMBER | 'z' INT | '(' expr ')' | ('exp'|'sin'|'cos') '(' expr ')'
//! ```
//!
//! Variables are 1-based (`z1` is the first coordinate). A leading sign on a
//! factor is accepted so that fields such as `-z1 + 0.2*z1^2` can be written
//! directly.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{Jet, JetSpace};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(k) => Some(*k),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        Ok(match self {
            Expr::Const(c) => Complex64::new(*c, 0.0),
            Expr::Var(k) => z[*k],
            Expr::Neg(a) => -a.eval(z)?,
            Expr::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Expr::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Expr::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Expr::Div(a, b) => {
                let den = b.eval(z)?;
                if den == Complex64::new(0.0, 0.0) {
                    return Err(Error::DivisionByZero);
                }
                a.eval(z)? / den
            }
            Expr::Pow(a, k) => a.eval(z)?.powu(*k),
            Expr::Exp(a) => a.eval(z)?.exp(),
            Expr::Sin(a) => a.eval(z)?.sin(),
            Expr::Cos(a) => a.eval(z)?.cos(),
        })
    }

    /// Taylor expansion; `vars[k]` is the jet of the `k`-th input.
    pub fn jet(&self, vars: &[Jet], space: &Arc<JetSpace>) -> Result<Jet> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(space, Complex64::new(*c, 0.0)),
            Expr::Var(k) => vars[*k].clone(),
            Expr::Neg(a) => a.jet(vars, space)?.neg(),
            Expr::Add(a, b) => a.jet(vars, space)?.checked_add(&b.jet(vars, space)?)?,
            Expr::Sub(a, b) => a.jet(vars, space)?.checked_sub(&b.jet(vars, space)?)?,
            Expr::Mul(a, b) => a.jet(vars, space)?.checked_mul(&b.jet(vars, space)?)?,
            Expr::Div(a, b) => a.jet(vars, space)?.checked_div(&b.jet(vars, space)?)?,
            Expr::Pow(a, k) => a.jet(vars, space)?.powi(*k),
            Expr::Exp(a) => a.jet(vars, space)?.exp(),
            Expr::Sin(a) => a.jet(vars, space)?.sin(),
            Expr::Cos(a) => a.jet(vars, space)?.cos(),
        })
    }

    /// Replaces every `Var(k)` by `inner[k]`.
    pub fn substitute(&self, inner: &[Expr]) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(inner));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(k) => inner[*k].clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, k) => Expr::Pow(sub(a), *k),
            Expr::Exp(a) => Expr::Exp(sub(a)),
            Expr::Sin(a) => Expr::Sin(sub(a)),
            Expr::Cos(a) => Expr::Cos(sub(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "(0-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(k) => write!(f, "z{}", k + 1),
            Expr::Neg(a) => write!(f, "(0-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

/// A parsed map with `d` inputs and `r` components.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExpr {
    d: usize,
    components: Vec<Expr>,
}

impl MapExpr {
    pub fn new(d: usize, components: Vec<Expr>) -> Result<Self> {
        for c in &components {
            if let Some(k) = c.max_var() {
                if k >= d {
                    return Err(Error::VariableOutOfRange { index: k + 1, dim: d });
                }
            }
        }
        Ok(MapExpr { d, components })
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MapExpr) -> Result<MapExpr> {
        if inner.output_dim() != self.d {
            return Err(Error::Dimension { expected: self.d, found: inner.output_dim() });
        }
        MapExpr::new(inner.d, self.components.iter().map(|c| c.substitute(&inner.components)).collect())
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.d {
            return Err(Error::Dimension { expected: self.d, found: z.len() });
        }
        self.components.iter().map(|c| c.eval(z)).collect()
    }

    pub fn eval_real(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&z)
    }

    /// Jets of every component about `p` through total degree `order`.
    pub fn jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet>> {
        let space = JetSpace::new(self.d, order);
        self.jets_in(p, &space)
    }

    pub fn jets_in(&self, p: &[f64], space: &Arc<JetSpace>) -> Result<Vec<Jet>> {
        if p.len() != self.d {
            return Err(Error::Dimension { expected: self.d, found: p.len() });
        }
        let vars: Vec<Jet> =
            p.iter().enumerate().map(|(k, &pk)| Jet::variable(space, k, Complex64::new(pk, 0.0))).collect();
        self.components.iter().map(|c| c.jet(&vars, space)).collect()
    }
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn parse_map(text: &str, d: usize, r: usize) -> Result<MapExpr> {
    let mut parser = Parser { src: text.as_bytes(), pos: 0 };
    let mut components = Vec::new();
    loop {
        components.push(parser.expr()?);
        parser.skip_ws();
        match parser.peek() {
            Some(b';') => parser.pos += 1,
            None => break,
            Some(c) => return Err(parser.error(format!("unexpected '{}'", c as char))),
        }
    }
    if components.len() != r {
        return Err(Error::ComponentCount { expected: r, found: components.len() });
    }
    MapExpr::new(d, components)
}

pub fn eval_map(expr: &MapExpr, z: &[Complex64]) -> Result<Vec<Complex64>> {
    expr.eval(z)
}

pub fn jet_of_map(expr: &MapExpr, p: &[f64], order: usize) -> Result<Vec<Jet>> {
    expr.jets(p, order)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: String) -> Error {
        Error::Syntax { pos: self.pos, msg }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                return Ok(Expr::Neg(Box::new(self.factor()?)));
            }
            Some(b'+') => {
                self.pos += 1;
                return self.factor();
            }
            _ => {}
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.integer()?;
            let k = u32::try_from(k).map_err(|_| self.error("exponent too large".to_string()))?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer".to_string()));
        }
        core::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Syntax { pos: start, msg: "integer out of range".to_string() })
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let int_part = digits(self);
        let mut frac_part = false;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac_part = digits(self);
        }
        if !int_part && !frac_part {
            return Err(Error::Syntax { pos: start, msg: "malformed number".to_string() });
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = save;
                return Err(Error::Syntax { pos: save, msg: "malformed exponent".to_string() });
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Syntax { pos: start, msg: format!("bad number '{text}'") })
    }

    fn atom(&mut self) -> Result<Expr> {
        let c = self.peek().ok_or_else(|| self.error("unexpected end of input".to_string()))?;
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                self.pos += 1;
            }
            let name = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            if name == "z" {
                let k = self.integer()? as usize;
                if k == 0 {
                    return Err(Error::Syntax { pos: start, msg: "variables are numbered from z1".to_string() });
                }
                return Ok(Expr::Var(k - 1));
            }
            let wrap: fn(Box<Expr>) -> Expr = match name {
                "exp" => Expr::Exp,
                "sin" => Expr::Sin,
                "cos" => Expr::Cos,
                _ => return Err(Error::Syntax { pos: start, msg: format!("unknown identifier '{name}'") }),
            };
            self.expect(b'(')?;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(wrap(Box::new(e)));
        }
        Err(self.error(format!("unexpected '{}'", c as char)))
    }
}
