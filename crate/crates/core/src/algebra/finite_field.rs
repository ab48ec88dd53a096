use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::poly::{Poly, PolyRing, Var};
use super::{factor, irreducible, FqMatrix, Field, FiniteFieldLike, FrobeniusField, PrimeField, Ring};
use crate::error::{Error, Result};

/// Element of `F_p[x]/(f)`: exactly `deg f` coefficients, ascending.
pub type GfElem = Vec<u64>;

/// The finite field `F_p[x]/(f)` for a monic irreducible `f` of degree `n >= 1`.
///
/// The `p`-power Frobenius is precomputed as the images of `x^i`, so applying
/// it costs one `n x n` matrix-vector product.
#[derive(Clone)]
pub struct FiniteField {
    base: PrimeField,
    modulus: Arc<Vec<u64>>,
    frob: Arc<Vec<GfElem>>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}; {:?})", self.base.p(), self.degree(), self.modulus)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.modulus == other.modulus
    }
}
impl Eq for FiniteField {}

impl std::hash::Hash for FiniteField {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.base.hash(state);
        self.modulus.hash(state);
    }
}

impl FiniteField {
    /// Builds `F_p[x]/(modulus)`, checking that the modulus is monic irreducible.
    pub fn new(base: PrimeField, modulus: Vec<u64>) -> Result<Self> {
        let ring = PolyRing::new(base, Var::X);
        let m = ring.poly(modulus.iter().map(|c| base.reduce(*c)).collect());
        if m.degree().unwrap_or(0) < 1 || !ring.is_monic(&m) {
            return Err(Error::Domain("field modulus must be monic of degree >= 1".into()));
        }
        if !factor::is_irreducible(&ring, &m) {
            return Err(Error::Domain(format!("modulus {:?} is reducible", m.coeffs())));
        }
        Ok(Self::new_unchecked(base, m.into_coeffs()))
    }

    pub(crate) fn new_unchecked(base: PrimeField, modulus: Vec<u64>) -> Self {
        let mut field = Self {
            base,
            modulus: Arc::new(modulus),
            frob: Arc::new(Vec::new()),
        };
        field.frob = Arc::new(field.compute_frobenius_images());
        field
    }

    /// `F_{q^n}` with the cached standard modulus: the lexicographically least
    /// monic irreducible of degree `n`.
    pub fn standard(q: u64, n: usize) -> Result<Self> {
        let base = PrimeField::new(q)?;
        let m = irreducible::standard_modulus(base, n);
        Ok(Self::new_unchecked(base, m))
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }

    /// Monic modulus, ascending coefficients (length `n + 1`).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn modulus_poly(&self) -> Poly<u64> {
        PolyRing::new(self.base, Var::X).poly(self.modulus.to_vec())
    }

    /// The class of `x`.
    pub fn generator(&self) -> GfElem {
        let mut v = vec![0; self.degree()];
        if self.degree() == 1 {
            v[0] = self.base.neg(&self.modulus[0]);
        } else {
            v[1] = 1;
        }
        v
    }

    pub fn from_prime(&self, c: u64) -> GfElem {
        let mut v = vec![0; self.degree()];
        v[0] = self.base.reduce(c);
        v
    }

    /// Reduces a polynomial over `F_p` into the field.
    pub fn from_poly(&self, f: &Poly<u64>) -> GfElem {
        let ring = PolyRing::new(self.base, Var::X);
        let r = ring.rem(f, &self.modulus_poly());
        let mut v = r.into_coeffs();
        v.resize(self.degree(), 0);
        v
    }

    /// Images of `x^i` under `a -> a^p`.
    pub fn frobenius_images(&self) -> &[GfElem] {
        &self.frob
    }

    fn compute_frobenius_images(&self) -> Vec<GfElem> {
        let n = self.degree();
        let xp = self.pow(&self.generator(), self.base.p());
        let mut out = Vec::with_capacity(n);
        let mut cur = self.one();
        for _ in 0..n {
            out.push(cur.clone());
            cur = self.mul(&cur, &xp);
        }
        out
    }

    /// Multiplication by `a` as an `F_p`-linear map, column `j` = `a x^j`.
    pub fn mul_columns(&self, a: &GfElem) -> Vec<GfElem> {
        let n = self.degree();
        let mut cols = Vec::with_capacity(n);
        let mut cur = a.clone();
        let x = self.generator();
        for _ in 0..n {
            cols.push(cur.clone());
            cur = self.mul(&cur, &x);
        }
        cols
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: &GfElem) -> u64 {
        let n: u64 = (&(self.order() - 1u32)).try_into().expect("field too large");
        let mut ord = n;
        for (pr, _) in factor_u64(n) {
            while ord % pr == 0 && self.is_one(&self.pow(a, ord / pr)) {
                ord /= pr;
            }
        }
        ord
    }

    pub fn display(&self, a: &GfElem) -> String {
        let ring = PolyRing::new(self.base, Var::X);
        let s = ring.display(&ring.poly(a.clone()));
        s.replace('x', "w")
    }

    /// Finds the lexicographically least root of `sub`'s modulus in `self`,
    /// giving a canonical embedding `sub -> self`.
    pub fn embedding_from(&self, sub: &FiniteField) -> Result<Embedding> {
        if sub.base != self.base || self.degree() % sub.degree() != 0 {
            return Err(Error::Domain(format!(
                "no embedding of GF({}^{}) into GF({}^{})",
                sub.base.p(),
                sub.degree(),
                self.base.p(),
                self.degree()
            )));
        }
        let image = if sub.degree() == 1 {
            self.from_prime(sub.base.neg(&sub.modulus[0]))
        } else {
            self.least_root_of(sub)?
        };
        let mut powers = Vec::with_capacity(sub.degree());
        let mut cur = self.one();
        for _ in 0..sub.degree() {
            powers.push(cur.clone());
            cur = self.mul(&cur, &image);
        }
        Ok(Embedding {
            source: sub.clone(),
            target: self.clone(),
            powers,
        })
    }
}

impl FiniteField {
    /// Least root (by index) of `sub`'s modulus. A generator `z` of the
    /// degree-`n` subfield is taken as a norm `y^((Q-1)/(q^n-1))`; the roots
    /// are then found in the small field `F_p[x]/(minpoly z)` and mapped back.
    fn least_root_of(&self, sub: &FiniteField) -> Result<GfElem> {
        let n = sub.degree();
        let q_big = self.order();
        let q_small = BigUint::from(self.base.p()).pow(n as u32);
        let e = (&q_big - 1u32) / (&q_small - 1u32);
        let total: u64 = (&q_big).try_into().unwrap_or(u64::MAX);
        let mut idx = self.base.p();
        loop {
            if idx >= total {
                return Err(Error::Domain("no generator of the subfield found".into()));
            }
            let y = self.from_index(idx);
            idx += 1;
            let z = self.pow_big(&y, &e);
            let mu = self.minimal_polynomial(&z);
            if mu.degree() != Some(n) {
                continue;
            }
            let small = FiniteField::new_unchecked(self.base, mu.into_coeffs());
            let ring = PolyRing::new(small.clone(), Var::X);
            let m = ring.poly(sub.modulus.iter().map(|c| small.from_prime(*c)).collect());
            let xr = PolyRing::new(self.base, Var::X);
            return factor::roots(&ring, &m, 0x5eed)
                .into_iter()
                .map(|r| xr.eval_in(&xr.poly(r), self, &z, |c| self.from_prime(*c)))
                .min_by(|a, b| self.index_of(a).cmp(&self.index_of(b)))
                .ok_or_else(|| Error::Domain("modulus has no root in target field".into()));
        }
    }

    /// Minimal polynomial of `a` over `F_p`, found as the first linear
    /// dependency among `1, a, a^2, ...`.
    pub fn minimal_polynomial(&self, a: &GfElem) -> Poly<u64> {
        let ring = PolyRing::new(self.base, Var::X);
        let mut powers: Vec<GfElem> = vec![self.one()];
        loop {
            let next = self.mul(powers.last().unwrap(), a);
            let m = FqMatrix::from_columns(self.base, self.degree(), &powers);
            if let Some(c) = m.solve(&next) {
                // a^j = sum c_i a^i
                let mut coeffs: Vec<u64> = c.iter().map(|x| self.base.neg(x)).collect();
                coeffs.push(1);
                return ring.poly(coeffs);
            }
            powers.push(next);
        }
    }
}

/// Trial-division factorization of a machine word.
pub(crate) fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Field embedding determined by the image of the source generator.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: FiniteField,
    target: FiniteField,
    powers: Vec<GfElem>,
}

impl Embedding {
    pub fn identity(field: &FiniteField) -> Self {
        let mut powers = Vec::with_capacity(field.degree());
        let mut cur = field.one();
        let x = field.generator();
        for _ in 0..field.degree() {
            powers.push(cur.clone());
            cur = field.mul(&cur, &x);
        }
        Self {
            source: field.clone(),
            target: field.clone(),
            powers,
        }
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &Embedding) -> Embedding {
        assert_eq!(self.target, outer.source, "embeddings do not compose");
        Embedding {
            source: self.source.clone(),
            target: outer.target.clone(),
            powers: self.powers.iter().map(|p| outer.apply(p)).collect(),
        }
    }

    pub fn source(&self) -> &FiniteField {
        &self.source
    }

    pub fn target(&self) -> &FiniteField {
        &self.target
    }

    pub fn apply(&self, a: &GfElem) -> GfElem {
        let t = &self.target;
        let p = t.base();
        let mut out = t.zero();
        for (c, pw) in a.iter().zip(&self.powers) {
            if *c == 0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(pw) {
                *o = p.add(o, &p.mul(c, x));
            }
        }
        out
    }
}

impl Ring for FiniteField {
    type Elem = GfElem;

    fn zero(&self) -> GfElem {
        vec![0; self.degree()]
    }

    fn one(&self) -> GfElem {
        self.from_prime(1)
    }

    fn add(&self, a: &GfElem, b: &GfElem) -> GfElem {
        a.iter().zip(b).map(|(x, y)| self.base.add(x, y)).collect()
    }

    fn neg(&self, a: &GfElem) -> GfElem {
        a.iter().map(|x| self.base.neg(x)).collect()
    }

    fn sub(&self, a: &GfElem, b: &GfElem) -> GfElem {
        a.iter().zip(b).map(|(x, y)| self.base.sub(x, y)).collect()
    }

    fn mul(&self, a: &GfElem, b: &GfElem) -> GfElem {
        let n = self.degree();
        let p = self.base.p();
        if n == 1 {
            return vec![(a[0] * b[0]) % p];
        }
        let lazy = p < (1 << 16);
        let mut t = vec![0u64; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let row = &mut t[i..i + n];
            if lazy {
                for (r, &y) in row.iter_mut().zip(b) {
                    *r += x * y;
                }
            } else {
                for (r, &y) in row.iter_mut().zip(b) {
                    *r = (*r + x * y) % p;
                }
            }
        }
        let m = &self.modulus;
        for i in (n..2 * n - 1).rev() {
            let c = t[i] % p;
            if c == 0 {
                continue;
            }
            // x^i = x^(i-n) * x^n = -x^(i-n) * sum_{j<n} m_j x^j
            let base = i - n;
            for j in 0..n {
                let mj = m[j];
                if mj == 0 {
                    continue;
                }
                let sub = (c * (p - mj)) % p;
                if lazy {
                    t[base + j] += sub;
                } else {
                    t[base + j] = (t[base + j] + sub) % p;
                }
            }
        }
        t.truncate(n);
        for x in t.iter_mut() {
            *x %= p;
        }
        t
    }

    fn from_int(&self, n: i64) -> GfElem {
        self.from_prime(self.base.reduce_i64(n))
    }

    fn inv(&self, a: &GfElem) -> Option<GfElem> {
        if a.iter().all(|c| *c == 0) {
            return None;
        }
        let e = self.order() - BigUint::from(2u32);
        Some(self.pow_big(a, &e))
    }

    fn is_zero(&self, a: &GfElem) -> bool {
        a.iter().all(|c| *c == 0)
    }
}

impl Field for FiniteField {
    fn characteristic(&self) -> u64 {
        self.base.p()
    }
}

impl FrobeniusField for FiniteField {
    fn frobenius(&self, a: &GfElem) -> GfElem {
        let p = self.base.p();
        let n = self.degree();
        let mut out = vec![0u64; n];
        let lazy = p < (1 << 16);
        for (c, img) in a.iter().zip(self.frob.iter()) {
            if *c == 0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(img) {
                if lazy {
                    *o += c * x;
                } else {
                    *o = (*o + c * x) % p;
                }
            }
        }
        for o in out.iter_mut() {
            *o %= p;
        }
        out
    }
}

impl FiniteFieldLike for FiniteField {
    fn prime(&self) -> u64 {
        self.base.p()
    }

    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn to_coords(&self, a: &GfElem) -> Vec<u64> {
        a.clone()
    }

    fn from_coords(&self, c: &[u64]) -> GfElem {
        let mut v: Vec<u64> = c.iter().map(|x| x % self.base.p()).collect();
        v.resize(self.degree(), 0);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_generator_satisfies_modulus() {
        let f = FiniteField::new(PrimeField::new(2).unwrap(), vec![1, 1, 1]).unwrap();
        let g = f.generator();
        let g2 = f.mul(&g, &g);
        assert!(f.is_zero(&f.add(&f.add(&g2, &g), &f.one())));
        assert_eq!(f.multiplicative_order(&g), 3);
    }

    #[test]
    fn reducible_modulus_rejected() {
        assert!(FiniteField::new(PrimeField::new(2).unwrap(), vec![1, 0, 1]).is_err());
    }

    #[test]
    fn frobenius_matches_power() {
        let f = FiniteField::standard(3, 5).unwrap();
        for i in [1u64, 7, 55, 121, 200] {
            let a = f.from_index(i);
            assert_eq!(f.frobenius(&a), f.pow(&a, 3));
        }
        let a = f.from_index(77);
        assert_eq!(f.frobenius_iter(&a, 5), a);
    }

    #[test]
    fn minimal_polynomials() {
        let f4 = FiniteField::new(PrimeField::new(2).unwrap(), vec![1, 1, 1]).unwrap();
        assert_eq!(f4.minimal_polynomial(&f4.generator()).coeffs(), &[1, 1, 1]);
        assert_eq!(f4.minimal_polynomial(&f4.one()).coeffs(), &[1, 1]);
        let f64_ = FiniteField::standard(2, 6).unwrap();
        let r = PolyRing::new(PrimeField::new(2).unwrap(), Var::X);
        let big = r.add(&r.monomial(1, 64), &r.from_ints(&[0, 1]));
        for i in [3u64, 17, 40, 63] {
            let mu = f64_.minimal_polynomial(&f64_.from_index(i));
            assert_eq!(6 % mu.degree().unwrap(), 0);
            assert!(r.divides(&mu, &big));
            assert!(factor::is_irreducible(&r, &mu));
        }
    }

    #[test]
    fn embedding_into_large_field() {
        let k = FiniteField::new(PrimeField::new(3).unwrap(), vec![1, 2, 0, 1]).unwrap();
        let big = FiniteField::standard(3, 12).unwrap();
        let e = big.embedding_from(&k).unwrap();
        let g = e.apply(&k.generator());
        let r = PolyRing::new(big.clone(), Var::X);
        let m = r.poly(k.modulus().iter().map(|c| big.from_prime(*c)).collect());
        assert!(big.is_zero(&r.eval(&m, &g)));
    }

    #[test]
    fn embedding_is_homomorphism() {
        let small = FiniteField::standard(2, 2).unwrap();
        let big = FiniteField::standard(2, 6).unwrap();
        let e = big.embedding_from(&small).unwrap();
        for a in small.elements() {
            for b in small.elements() {
                assert_eq!(e.apply(&small.mul(&a, &b)), big.mul(&e.apply(&a), &e.apply(&b)));
            }
        }
    }
}
