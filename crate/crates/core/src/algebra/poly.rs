use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{Field, Ring};

/// Role of the indeterminate; only affects printing and bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    /// Function-field variable θ of `K = F_q(θ)`.
    Theta,
    /// Operator variable `t` of `A = F_q[t]`.
    T,
    /// Variable `u` of a subring `F_q[u] -> A`, `u -> b(t)`.
    U,
    /// Root-finding variable.
    X,
}

impl Var {
    pub fn symbol(&self) -> &'static str {
        match self {
            Var::Theta => "T",
            Var::T => "t",
            Var::U => "u",
            Var::X => "x",
        }
    }
}

/// Univariate polynomial with ascending coefficients. The zero polynomial has
/// no coefficients; otherwise the last coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly<E> {
    coeffs: Vec<E>,
}

impl<E> Poly<E> {
    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<E> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&E> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> Option<&E> {
        self.coeffs.get(i)
    }
}

/// Polynomial ring `R[var]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyRing<R> {
    base: R,
    var: Var,
}

impl<R: Ring> PolyRing<R> {
    pub fn new(base: R, var: Var) -> Self {
        Self { base, var }
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn var(&self) -> Var {
        self.var
    }

    /// Builds a polynomial, trimming trailing zeros.
    pub fn poly(&self, mut coeffs: Vec<R::Elem>) -> Poly<R::Elem> {
        while coeffs.last().map_or(false, |c| self.base.is_zero(c)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(&self, c: &[i64]) -> Poly<R::Elem> {
        self.poly(c.iter().map(|x| self.base.from_int(*x)).collect())
    }

    pub fn constant(&self, c: R::Elem) -> Poly<R::Elem> {
        self.poly(vec![c])
    }

    pub fn monomial(&self, c: R::Elem, deg: usize) -> Poly<R::Elem> {
        let mut v = vec![self.base.zero(); deg];
        v.push(c);
        self.poly(v)
    }

    /// The indeterminate itself.
    pub fn gen(&self) -> Poly<R::Elem> {
        self.monomial(self.base.one(), 1)
    }

    pub fn coeff_or_zero(&self, f: &Poly<R::Elem>, i: usize) -> R::Elem {
        f.coeffs.get(i).cloned().unwrap_or_else(|| self.base.zero())
    }

    pub fn scale(&self, f: &Poly<R::Elem>, c: &R::Elem) -> Poly<R::Elem> {
        self.poly(f.coeffs.iter().map(|x| self.base.mul(x, c)).collect())
    }

    /// `f * x^k`.
    pub fn shift(&self, f: &Poly<R::Elem>, k: usize) -> Poly<R::Elem> {
        if f.is_zero() {
            return f.clone();
        }
        let mut v = vec![self.base.zero(); k];
        v.extend(f.coeffs.iter().cloned());
        Poly { coeffs: v }
    }

    /// Horner evaluation at an element of the coefficient ring.
    pub fn eval(&self, f: &Poly<R::Elem>, x: &R::Elem) -> R::Elem {
        let mut acc = self.base.zero();
        for c in f.coeffs.iter().rev() {
            acc = self.base.add(&self.base.mul(&acc, x), c);
        }
        acc
    }

    /// Horner evaluation in another ring `S`, coefficients mapped by `embed`.
    pub fn eval_in<S: Ring>(
        &self,
        f: &Poly<R::Elem>,
        target: &S,
        x: &S::Elem,
        embed: impl Fn(&R::Elem) -> S::Elem,
    ) -> S::Elem {
        let mut acc = target.zero();
        for c in f.coeffs.iter().rev() {
            acc = target.add(&target.mul(&acc, x), &embed(c));
        }
        acc
    }

    pub fn derivative(&self, f: &Poly<R::Elem>) -> Poly<R::Elem> {
        self.poly(
            f.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| self.base.mul(c, &self.base.from_int(i as i64)))
                .collect(),
        )
    }

    /// `f(g)`.
    pub fn compose(&self, f: &Poly<R::Elem>, g: &Poly<R::Elem>) -> Poly<R::Elem> {
        let mut acc = self.zero();
        for c in f.coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, g), &self.constant(c.clone()));
        }
        acc
    }

    pub fn display(&self, f: &Poly<R::Elem>) -> String
    where
        R::Elem: fmt::Display,
    {
        if f.is_zero() {
            return "0".into();
        }
        let v = self.var.symbol();
        let mut terms = Vec::new();
        for (i, c) in f.coeffs.iter().enumerate().rev() {
            if self.base.is_zero(c) {
                continue;
            }
            let cs = c.to_string();
            let t = match (i, self.base.is_one(c)) {
                (0, _) => cs,
                (1, true) => v.to_string(),
                (1, false) => format!("{cs}*{v}"),
                (_, true) => format!("{v}^{i}"),
                (_, false) => format!("{cs}*{v}^{i}"),
            };
            terms.push(t);
        }
        terms.join(" + ")
    }
}

impl<R: Ring> Ring for PolyRing<R> {
    type Elem = Poly<R::Elem>;

    fn zero(&self) -> Self::Elem {
        Poly { coeffs: Vec::new() }
    }

    fn one(&self) -> Self::Elem {
        self.constant(self.base.one())
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let n = a.coeffs.len().max(b.coeffs.len());
        let z = self.base.zero();
        self.poly(
            (0..n)
                .map(|i| {
                    self.base
                        .add(a.coeffs.get(i).unwrap_or(&z), b.coeffs.get(i).unwrap_or(&z))
                })
                .collect(),
        )
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        Poly {
            coeffs: a.coeffs.iter().map(|c| self.base.neg(c)).collect(),
        }
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        let mut out = vec![self.base.zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if self.base.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                out[i + j] = self.base.add(&out[i + j], &self.base.mul(x, y));
            }
        }
        self.poly(out)
    }

    fn from_int(&self, n: i64) -> Self::Elem {
        self.constant(self.base.from_int(n))
    }

    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if a.degree() == Some(0) {
            self.base.inv(&a.coeffs[0]).map(|c| self.constant(c))
        } else {
            None
        }
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }
}

impl<F: Field> PolyRing<F> {
    /// Euclidean division `f = q g + r`, `deg r < deg g`. Panics on `g = 0`.
    pub fn divrem(&self, f: &Poly<F::Elem>, g: &Poly<F::Elem>) -> (Poly<F::Elem>, Poly<F::Elem>) {
        let dg = g.degree().expect("division by the zero polynomial");
        let lead_inv = self.base.inv(g.lead().unwrap()).expect("field");
        let mut r = f.coeffs.clone();
        if r.len() <= dg {
            return (self.zero(), f.clone());
        }
        let mut q = vec![self.base.zero(); r.len() - dg];
        for i in (dg..r.len()).rev() {
            if self.base.is_zero(&r[i]) {
                continue;
            }
            let c = self.base.mul(&r[i], &lead_inv);
            for (j, gc) in g.coeffs.iter().enumerate() {
                let k = i - dg + j;
                r[k] = self.base.sub(&r[k], &self.base.mul(&c, gc));
            }
            q[i - dg] = c;
        }
        r.truncate(dg);
        (self.poly(q), self.poly(r))
    }

    pub fn rem(&self, f: &Poly<F::Elem>, g: &Poly<F::Elem>) -> Poly<F::Elem> {
        self.divrem(f, g).1
    }

    pub fn divides(&self, g: &Poly<F::Elem>, f: &Poly<F::Elem>) -> bool {
        if g.is_zero() {
            return f.is_zero();
        }
        self.rem(f, g).is_zero()
    }

    /// Exact quotient; `None` when `g` does not divide `f`.
    pub fn div_exact(&self, f: &Poly<F::Elem>, g: &Poly<F::Elem>) -> Option<Poly<F::Elem>> {
        if g.is_zero() {
            return None;
        }
        let (q, r) = self.divrem(f, g);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self, f: &Poly<F::Elem>) -> Poly<F::Elem> {
        match f.lead() {
            None => f.clone(),
            Some(l) => self.scale(f, &self.base.inv(l).unwrap()),
        }
    }

    pub fn is_monic(&self, f: &Poly<F::Elem>) -> bool {
        f.lead().map_or(false, |l| self.base.is_one(l))
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Poly<F::Elem> {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = self.rem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    /// Returns `(g, s, t)` with `s a + t b = g` monic.
    pub fn xgcd(
        &self,
        a: &Poly<F::Elem>,
        b: &Poly<F::Elem>,
    ) -> (Poly<F::Elem>, Poly<F::Elem>, Poly<F::Elem>) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (self.one(), self.zero());
        let (mut t0, mut t1) = (self.zero(), self.one());
        while !r1.is_zero() {
            let (q, r) = self.divrem(&r0, &r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = self.sub(&s0, &self.mul(&q, &s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = self.sub(&t0, &self.mul(&q, &t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.lead().cloned() {
            None => (r0, s0, t0),
            Some(l) => {
                let li = self.base.inv(&l).unwrap();
                (self.scale(&r0, &li), self.scale(&s0, &li), self.scale(&t0, &li))
            }
        }
    }

    /// Inverse of `a` modulo `m`, if it exists.
    pub fn inv_mod(&self, a: &Poly<F::Elem>, m: &Poly<F::Elem>) -> Option<Poly<F::Elem>> {
        let (g, s, _) = self.xgcd(&self.rem(a, m), m);
        (g.degree() == Some(0)).then(|| self.rem(&s, m))
    }

    pub fn mulmod(&self, a: &Poly<F::Elem>, b: &Poly<F::Elem>, m: &Poly<F::Elem>) -> Poly<F::Elem> {
        self.rem(&self.mul(a, b), m)
    }

    pub fn powmod(&self, a: &Poly<F::Elem>, e: &BigUint, m: &Poly<F::Elem>) -> Poly<F::Elem> {
        let mut acc = self.rem(&self.one(), m);
        let a = self.rem(a, m);
        for i in (0..e.bits()).rev() {
            acc = self.mulmod(&acc, &acc, m);
            if e.bit(i) {
                acc = self.mulmod(&acc, &a, m);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;

    fn ring(p: u64) -> PolyRing<PrimeField> {
        PolyRing::new(PrimeField::new(p).unwrap(), Var::X)
    }

    #[test]
    fn degree_additive() {
        let r = ring(5);
        let f = r.from_ints(&[1, 2, 3]);
        let g = r.from_ints(&[4, 0, 0, 1]);
        assert_eq!(r.mul(&f, &g).degree(), Some(5));
    }

    #[test]
    fn divrem_recomposes() {
        let r = ring(3);
        let f = r.from_ints(&[1, 2, 0, 1, 2, 1]);
        let g = r.from_ints(&[2, 1, 1]);
        let (q, rem) = r.divrem(&f, &g);
        assert_eq!(r.add(&r.mul(&q, &g), &rem), f);
        assert!(rem.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn xgcd_bezout() {
        let r = ring(7);
        let a = r.from_ints(&[1, 3, 0, 2]);
        let b = r.from_ints(&[5, 1, 1]);
        let (g, s, t) = r.xgcd(&a, &b);
        assert_eq!(r.add(&r.mul(&s, &a), &r.mul(&t, &b)), g);
    }

    #[test]
    fn display_uses_variable() {
        let r = PolyRing::new(PrimeField::new(2).unwrap(), Var::T);
        assert_eq!(r.display(&r.from_ints(&[1, 1, 1])), "t^2 + t + 1");
    }
}
