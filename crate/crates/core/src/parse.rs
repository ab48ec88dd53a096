//! Small expression language for field elements in configs and on the
//! command line: integers, one variable, `+ - * / ^`, parentheses and
//! implicit multiplication (`2T^2 + T(T+1)`).

use crate::algebra::{FiniteField, FiniteFieldLike, GfElem, Poly, PolyRing, PrimeField, Ring};
use crate::error::{Error, Result};
use crate::funcfield::{RatFunc, RatFuncField};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(u64),
    Var(String),
    Op(char),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(u64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u64),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let lit: String = cs[start..i].iter().collect();
            let n = lit
                .parse()
                .map_err(|_| Error::Parse(format!("integer literal too large: {lit}")))?;
            out.push(Tok::Num(n));
        } else if c.is_alphabetic() {
            let start = i;
            while i < cs.len() && cs[i].is_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Var(cs[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Num(_) | Tok::Var(_) | Tok::Op('('))) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(e)) => {
                    self.pos += 1;
                    Ok(Expr::Pow(Box::new(base), e))
                }
                _ => Err(Error::Parse("exponent must be a nonnegative integer".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(Expr::Var(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

pub fn parse_expr(s: &str) -> Result<Expr> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input in {s:?}")));
    }
    Ok(e)
}

/// Evaluate in `ring`, binding each name in `vars` to `value`.
pub fn evaluate<R: Ring>(ring: &R, e: &Expr, vars: &[&str], value: &R::Elem) -> Result<R::Elem> {
    let go = |x: &Expr| evaluate(ring, x, vars, value);
    Ok(match e {
        Expr::Num(n) => ring.from_int(i64::try_from(*n).map_err(|_| Error::Parse("literal too large".into()))?),
        Expr::Var(v) if vars.contains(&v.as_str()) => value.clone(),
        Expr::Var(v) => {
            return Err(Error::Parse(format!(
                "unknown variable {v:?}; expected one of {vars:?}"
            )))
        }
        Expr::Neg(a) => ring.neg(&go(a)?),
        Expr::Add(a, b) => ring.add(&go(a)?, &go(b)?),
        Expr::Sub(a, b) => ring.sub(&go(a)?, &go(b)?),
        Expr::Mul(a, b) => ring.mul(&go(a)?, &go(b)?),
        Expr::Div(a, b) => {
            let inv = ring
                .inv(&go(b)?)
                .ok_or_else(|| Error::Parse("division by a non-unit".into()))?;
            ring.mul(&go(a)?, &inv)
        }
        Expr::Pow(a, k) => ring.pow(&go(a)?, *k),
    })
}

/// An element of `F_q(θ)`, written in `T` (or `theta`).
pub fn parse_ratfunc(k: &RatFuncField, s: &str) -> Result<RatFunc> {
    evaluate(k, &parse_expr(s)?, &["T", "theta"], &k.theta())
}

/// An element of a finite field, written in its generator `w`.
pub fn parse_gf(k: &FiniteField, s: &str) -> Result<GfElem> {
    if k.degree() == 1 {
        // over a prime field only integer expressions are accepted
        return evaluate(k, &parse_expr(s)?, &[], &k.zero());
    }
    evaluate(k, &parse_expr(s)?, &["w"], &k.generator())
}

/// A polynomial in `A = F_q[t]`, written in `t`.
pub fn parse_a(ring: &PolyRing<PrimeField>, s: &str) -> Result<Poly<u64>> {
    evaluate(ring, &parse_expr(s)?, &["t"], &ring.gen())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratfunc_expressions() {
        let k = RatFuncField::new(PrimeField::new(3).unwrap());
        let x = parse_ratfunc(&k, "2T^2 + T(T+1) - 1").unwrap();
        assert_eq!(x, k.from_ints(&[2, 1]));
        let y = parse_ratfunc(&k, "1/(T+1)").unwrap();
        assert!(k.is_one(&k.mul(&y, &k.from_ints(&[1, 1]))));
        assert!(parse_ratfunc(&k, "1/0").is_err());
        assert!(parse_ratfunc(&k, "x").is_err());
        assert!(parse_ratfunc(&k, "T +").is_err());
    }

    #[test]
    fn finite_field_expressions() {
        let k = FiniteField::standard(2, 2).unwrap();
        let w = parse_gf(&k, "w").unwrap();
        assert_eq!(parse_gf(&k, "w^2").unwrap(), k.add(&w, &k.one()));
        assert_eq!(parse_gf(&k, "1/w").unwrap(), k.inv(&w).unwrap());
        let a = parse_a(&PolyRing::new(PrimeField::new(2).unwrap(), crate::algebra::Var::T), "(t+1)^2").unwrap();
        assert_eq!(a.coeffs(), &[1, 0, 1]);
    }
}
