//! The rational function field `K = F_q(θ)`, its finite places and
//! reduction maps, and rational root finding over `K`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::factor;
use crate::algebra::irreducible;
use crate::algebra::{
    Field, FiniteField, FrobeniusField, GfElem, Poly, PolyRing, PrimeField, Ring, Var,
};
use crate::error::{Error, Result};

/// `num / den` in lowest terms with `den` monic; zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatFunc {
    pub num: Poly<u64>,
    pub den: Poly<u64>,
}

/// The field `F_q(θ)` as an arithmetic context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFuncField {
    ring: PolyRing<PrimeField>,
}

impl RatFuncField {
    pub fn new(base: PrimeField) -> Self {
        Self {
            ring: PolyRing::new(base, Var::Theta),
        }
    }

    pub fn base(&self) -> PrimeField {
        *self.ring.base()
    }

    pub fn q(&self) -> u64 {
        self.base().p()
    }

    /// `F_q[θ]`.
    pub fn poly_ring(&self) -> &PolyRing<PrimeField> {
        &self.ring
    }

    pub fn theta(&self) -> RatFunc {
        self.from_poly(self.ring.gen())
    }

    pub fn from_poly(&self, p: Poly<u64>) -> RatFunc {
        RatFunc {
            num: p,
            den: self.ring.one(),
        }
    }

    pub fn from_ints(&self, c: &[i64]) -> RatFunc {
        self.from_poly(self.ring.from_ints(c))
    }

    /// `num / den`, normalized. Returns `None` for a zero denominator.
    pub fn fraction(&self, num: Poly<u64>, den: Poly<u64>) -> Option<RatFunc> {
        if den.is_zero() {
            return None;
        }
        let g = self.ring.gcd(&num, &den);
        let mut n = self.ring.div_exact(&num, &g).unwrap();
        let mut d = self.ring.div_exact(&den, &g).unwrap();
        let l = *d.lead().unwrap();
        if l != 1 {
            let li = self.base().inv(&l).unwrap();
            n = self.ring.scale(&n, &li);
            d = self.ring.scale(&d, &li);
        }
        if n.is_zero() {
            d = self.ring.one();
        }
        Some(RatFunc { num: n, den: d })
    }

    pub fn is_polynomial(&self, a: &RatFunc) -> bool {
        a.den.degree() == Some(0)
    }

    /// `true` when `a` lies in the constant field `F_q`.
    pub fn is_constant(&self, a: &RatFunc) -> bool {
        self.is_polynomial(a) && a.num.degree().unwrap_or(0) == 0
    }

    pub fn display(&self, a: &RatFunc) -> String {
        let n = self.ring.display(&a.num);
        if self.is_polynomial(a) {
            n
        } else {
            format!("({n})/({})", self.ring.display(&a.den))
        }
    }

    /// Substitutes `θ -> θ^p` coefficientwise; this is `a^p` since the
    /// coefficients lie in the prime field.
    fn frob_poly(&self, f: &Poly<u64>) -> Poly<u64> {
        let p = self.q() as usize;
        let mut c = vec![0u64; f.degree().map_or(0, |d| d * p + 1)];
        for (i, x) in f.coeffs().iter().enumerate() {
            c[i * p] = *x;
        }
        self.ring.poly(c)
    }
}

impl Ring for RatFuncField {
    type Elem = RatFunc;

    fn zero(&self) -> RatFunc {
        self.from_poly(self.ring.zero())
    }

    fn one(&self) -> RatFunc {
        self.from_poly(self.ring.one())
    }

    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        let r = &self.ring;
        if a.den == b.den {
            return self.fraction(r.add(&a.num, &b.num), a.den.clone()).unwrap();
        }
        let num = r.add(&r.mul(&a.num, &b.den), &r.mul(&b.num, &a.den));
        self.fraction(num, r.mul(&a.den, &b.den)).unwrap()
    }

    fn neg(&self, a: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.ring.neg(&a.num),
            den: a.den.clone(),
        }
    }

    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        let r = &self.ring;
        self.fraction(r.mul(&a.num, &b.num), r.mul(&a.den, &b.den)).unwrap()
    }

    fn from_int(&self, n: i64) -> RatFunc {
        self.from_poly(self.ring.from_int(n))
    }

    fn inv(&self, a: &RatFunc) -> Option<RatFunc> {
        if a.num.is_zero() {
            return None;
        }
        self.fraction(a.den.clone(), a.num.clone())
    }

    fn is_zero(&self, a: &RatFunc) -> bool {
        a.num.is_zero()
    }
}

impl Field for RatFuncField {
    fn characteristic(&self) -> u64 {
        self.q()
    }
}

impl FrobeniusField for RatFuncField {
    fn frobenius(&self, a: &RatFunc) -> RatFunc {
        RatFunc {
            num: self.frob_poly(&a.num),
            den: self.frob_poly(&a.den),
        }
    }
}

/// A finite place `(π)` of `K`, with residue field `F_q[x]/(π)` and `θ -> x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Place {
    pi: Poly<u64>,
    residue: FiniteField,
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Place({:?})", self.pi.coeffs())
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pi.serialize(s)
    }
}

impl Place {
    /// Checks that `pi` is monic irreducible.
    pub fn new(base: PrimeField, pi: Poly<u64>) -> Result<Self> {
        let ring = PolyRing::new(base, Var::Theta);
        if !ring.is_monic(&pi) || !factor::is_irreducible(&ring, &pi) {
            return Err(Error::Domain(format!(
                "place generator {:?} is not monic irreducible",
                pi.coeffs()
            )));
        }
        Ok(Self::new_unchecked(base, pi))
    }

    fn new_unchecked(base: PrimeField, pi: Poly<u64>) -> Self {
        let residue = FiniteField::new_unchecked(base, pi.coeffs().to_vec());
        Self { pi, residue }
    }

    pub fn pi(&self) -> &Poly<u64> {
        &self.pi
    }

    pub fn degree(&self) -> usize {
        self.pi.degree().unwrap()
    }

    pub fn residue_field(&self) -> &FiniteField {
        &self.residue
    }

    pub fn display(&self) -> String {
        PolyRing::new(self.residue.base(), Var::Theta).display(&self.pi)
    }

    pub fn reduce_poly(&self, f: &Poly<u64>) -> GfElem {
        self.residue.from_poly(f)
    }

    /// Image of `x` in the residue field.
    pub fn reduce(&self, x: &RatFunc) -> Result<GfElem> {
        let d = self.reduce_poly(&x.den);
        let di = self
            .residue
            .inv(&d)
            .ok_or_else(|| Error::BadReduction(format!("pole at place {}", self.display())))?;
        Ok(self.residue.mul(&self.reduce_poly(&x.num), &di))
    }
}

/// All places of degree `1..=bound`, ordered by degree and then canonically.
pub fn places_up_to(base: PrimeField, bound: usize) -> Vec<Place> {
    irreducible::irreducibles_up_to(base.p(), Var::Theta, bound)
        .into_iter()
        .map(|pi| Place::new_unchecked(base, pi))
        .collect()
}

/// All monic divisors of a nonzero `f`, in canonical order.
pub fn monic_divisors(ring: &PolyRing<PrimeField>, f: &Poly<u64>) -> Vec<Poly<u64>> {
    let (_, fs) = factor::factor(ring, f, 0);
    let mut out = vec![ring.one()];
    for (g, e) in fs {
        let mut next = Vec::with_capacity(out.len() * (e + 1));
        for d in &out {
            let mut cur = d.clone();
            next.push(cur.clone());
            for _ in 0..e {
                cur = ring.mul(&cur, &g);
                next.push(cur.clone());
            }
        }
        out = next;
    }
    out.sort_by(|a, b| {
        factor::canonical_key(ring.base(), a).cmp(&factor::canonical_key(ring.base(), b))
    });
    out
}

/// The set `{x in K : P(x) = 0}` for a nonzero `P in K[x]`, sorted by
/// `(den, num)` canonical keys.
///
/// Denominators are cleared, then candidates `n/d` with `d | lead` and
/// `n | const` are tested, first modulo a few small places and then exactly.
pub fn rational_roots(field: &RatFuncField, p: &Poly<RatFunc>) -> Result<Vec<RatFunc>> {
    let r = field.poly_ring();
    if p.is_zero() {
        return Err(Error::Domain("rational_roots of the zero polynomial".into()));
    }
    let mut l = r.one();
    for c in p.coeffs() {
        let g = r.gcd(&l, &c.den);
        l = r.div_exact(&r.mul(&l, &c.den), &g).unwrap();
    }
    let mut coeffs: Vec<Poly<u64>> = p
        .coeffs()
        .iter()
        .map(|c| r.mul(&c.num, &r.div_exact(&l, &c.den).unwrap()))
        .collect();
    let mut roots = Vec::new();
    let shift = coeffs.iter().position(|c| !c.is_zero()).unwrap();
    if shift > 0 {
        roots.push(field.zero());
        coeffs.drain(..shift);
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(roots);
    }
    let lead = coeffs[deg].clone();
    let constant = coeffs[0].clone();
    let q = field.q();
    let filters: Vec<Place> = places_up_to(field.base(), 4)
        .into_iter()
        .filter(|v| !r.divides(v.pi(), &lead))
        .take(3)
        .collect();
    let reduced: Vec<Vec<GfElem>> = filters
        .iter()
        .map(|v| coeffs.iter().map(|c| v.reduce_poly(c)).collect())
        .collect();
    let dens = monic_divisors(r, &lead);
    let nums = monic_divisors(r, &constant);
    for d in &dens {
        for n in &nums {
            if r.gcd(n, d).degree() != Some(0) {
                continue;
            }
            for u in 1..q {
                let n = r.scale(n, &u);
                if !passes_filters(&filters, &reduced, &n, d) {
                    continue;
                }
                if homogeneous_value(r, &coeffs, &n, d).is_zero() {
                    debug_assert!(lead.degree() != Some(0) || d.degree() == Some(0));
                    roots.push(field.fraction(n.clone(), d.clone()).unwrap());
                }
            }
        }
    }
    let b = field.base();
    roots.sort_by(|x, y| {
        (factor::canonical_key(&b, &x.den), factor::canonical_key(&b, &x.num))
            .cmp(&(factor::canonical_key(&b, &y.den), factor::canonical_key(&b, &y.num)))
    });
    roots.dedup();
    Ok(roots)
}

fn passes_filters(filters: &[Place], reduced: &[Vec<GfElem>], n: &Poly<u64>, d: &Poly<u64>) -> bool {
    for (v, cs) in filters.iter().zip(reduced) {
        let k = v.residue_field();
        let Some(di) = k.inv(&v.reduce_poly(d)) else {
            continue;
        };
        let x = k.mul(&v.reduce_poly(n), &di);
        let mut acc = k.zero();
        for c in cs.iter().rev() {
            acc = k.add(&k.mul(&acc, &x), c);
        }
        if !k.is_zero(&acc) {
            return false;
        }
    }
    true
}

/// `sum c_i n^i d^(deg - i)`, which vanishes iff `n/d` is a root.
fn homogeneous_value(r: &PolyRing<PrimeField>, c: &[Poly<u64>], n: &Poly<u64>, d: &Poly<u64>) -> Poly<u64> {
    let deg = c.len() - 1;
    let mut acc = r.zero();
    let mut dpow = r.one();
    for i in (0..=deg).rev() {
        // Horner in n with d-powers accumulated on the low-index side
        acc = r.add(&r.mul(&acc, n), &r.mul(&c[i], &dpow));
        if i > 0 {
            dpow = r.mul(&dpow, d);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> RatFuncField {
        RatFuncField::new(PrimeField::new(2).unwrap())
    }

    #[test]
    fn reduction_examples() {
        let k = k2();
        let b = k.base();
        let v = Place::new(b, k.poly_ring().from_ints(&[1, 1])).unwrap();
        assert_eq!(v.reduce(&k.theta()).unwrap(), vec![1]);
        let v0 = Place::new(b, k.poly_ring().from_ints(&[0, 1])).unwrap();
        let inv_theta = k.inv(&k.theta()).unwrap();
        assert!(matches!(v0.reduce(&inv_theta), Err(Error::BadReduction(_))));
        let v2 = Place::new(b, k.poly_ring().from_ints(&[1, 1, 1])).unwrap();
        assert_eq!(v2.reduce(&k.from_ints(&[0, 1, 1])).unwrap(), vec![1, 0]);
    }

    #[test]
    fn frobenius_is_pth_power() {
        let k = RatFuncField::new(PrimeField::new(3).unwrap());
        let a = k.fraction(k.poly_ring().from_ints(&[1, 2, 0, 1]), k.poly_ring().from_ints(&[2, 1])).unwrap();
        assert_eq!(k.frobenius(&a), k.pow(&a, 3));
    }

    fn px(k: &RatFuncField, c: Vec<RatFunc>) -> Poly<RatFunc> {
        PolyRing::new(k.clone(), Var::X).poly(c)
    }

    #[test]
    fn carlitz_t_roots() {
        let k = k2();
        let p = px(&k, vec![k.zero(), k.theta(), k.one()]);
        assert_eq!(rational_roots(&k, &p).unwrap(), vec![k.zero(), k.theta()]);
    }

    #[test]
    fn no_roots() {
        let k = k2();
        let p = px(&k, vec![k.theta(), k.theta(), k.one()]);
        assert!(rational_roots(&k, &p).unwrap().is_empty());
    }

    #[test]
    fn constructed_product() {
        let k = k2();
        let a = k.inv(&k.theta()).unwrap();
        let b = k.theta();
        let xr = PolyRing::new(k.clone(), Var::X);
        let p = xr.mul(&xr.poly(vec![k.neg(&a), k.one()]), &xr.poly(vec![k.neg(&b), k.one()]));
        let roots = rational_roots(&k, &p).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.contains(&a) && roots.contains(&b));
    }

    #[test]
    fn place_counts() {
        let b = PrimeField::new(2).unwrap();
        assert_eq!(places_up_to(b, 4).len(), 2 + 1 + 2 + 3);
    }
}
