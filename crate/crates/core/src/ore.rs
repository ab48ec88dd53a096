//! Twisted polynomials `L{τ}` with `τ c = c^q τ`, acting on `L` and its
//! extensions as additive polynomials `x -> sum c_i x^(q^i)`.

use serde::{Deserialize, Serialize};

use crate::algebra::FrobeniusField;
use crate::error::{Error, Result};

/// `sum c_i τ^i`, ascending; the zero operator has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrePoly<E> {
    coeffs: Vec<E>,
}

impl<E> OrePoly<E> {
    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// τ-degree; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&E> {
        self.coeffs.last()
    }
}

/// The ring `L{τ}` over a coefficient field with Frobenius. Here `q = p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OreRing<F> {
    field: F,
}

impl<F: FrobeniusField> OreRing<F> {
    pub fn new(field: F) -> Self {
        Self { field }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn poly(&self, mut coeffs: Vec<F::Elem>) -> OrePoly<F::Elem> {
        while coeffs.last().map_or(false, |c| self.field.is_zero(c)) {
            coeffs.pop();
        }
        OrePoly { coeffs }
    }

    pub fn zero(&self) -> OrePoly<F::Elem> {
        OrePoly { coeffs: Vec::new() }
    }

    pub fn one(&self) -> OrePoly<F::Elem> {
        self.constant(self.field.one())
    }

    pub fn constant(&self, c: F::Elem) -> OrePoly<F::Elem> {
        self.poly(vec![c])
    }

    /// `c τ^k`.
    pub fn monomial(&self, c: F::Elem, k: usize) -> OrePoly<F::Elem> {
        let mut v = vec![self.field.zero(); k];
        v.push(c);
        self.poly(v)
    }

    pub fn tau(&self) -> OrePoly<F::Elem> {
        self.monomial(self.field.one(), 1)
    }

    pub fn coeff(&self, f: &OrePoly<F::Elem>, i: usize) -> F::Elem {
        f.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn add(&self, a: &OrePoly<F::Elem>, b: &OrePoly<F::Elem>) -> OrePoly<F::Elem> {
        let n = a.coeffs.len().max(b.coeffs.len());
        self.poly((0..n).map(|i| self.field.add(&self.coeff(a, i), &self.coeff(b, i))).collect())
    }

    pub fn neg(&self, a: &OrePoly<F::Elem>) -> OrePoly<F::Elem> {
        OrePoly {
            coeffs: a.coeffs.iter().map(|c| self.field.neg(c)).collect(),
        }
    }

    pub fn sub(&self, a: &OrePoly<F::Elem>, b: &OrePoly<F::Elem>) -> OrePoly<F::Elem> {
        self.add(a, &self.neg(b))
    }

    /// `c · f` (scalar on the left).
    pub fn scale_left(&self, c: &F::Elem, f: &OrePoly<F::Elem>) -> OrePoly<F::Elem> {
        self.poly(f.coeffs.iter().map(|x| self.field.mul(c, x)).collect())
    }

    /// `f · g` using `τ^i c = c^(q^i) τ^i`.
    pub fn mul(&self, f: &OrePoly<F::Elem>, g: &OrePoly<F::Elem>) -> OrePoly<F::Elem> {
        if f.is_zero() || g.is_zero() {
            return self.zero();
        }
        let k = &self.field;
        let mut out = vec![k.zero(); f.coeffs.len() + g.coeffs.len() - 1];
        let mut twisted = g.coeffs.clone();
        for (i, fi) in f.coeffs.iter().enumerate() {
            if i > 0 {
                twisted = twisted.iter().map(|c| k.frobenius(c)).collect();
            }
            if k.is_zero(fi) {
                continue;
            }
            for (j, gj) in twisted.iter().enumerate() {
                out[i + j] = k.add(&out[i + j], &k.mul(fi, gj));
            }
        }
        self.poly(out)
    }

    pub fn pow(&self, f: &OrePoly<F::Elem>, e: u32) -> OrePoly<F::Elem> {
        (0..e).fold(self.one(), |acc, _| self.mul(&acc, f))
    }

    pub fn constant_term(&self, f: &OrePoly<F::Elem>) -> F::Elem {
        self.coeff(f, 0)
    }

    /// `f(x) = sum c_i x^(q^i)` for `x` in the coefficient field.
    pub fn evaluate(&self, f: &OrePoly<F::Elem>, x: &F::Elem) -> F::Elem {
        self.evaluate_in(f, &self.field, x, |c| c.clone())
    }

    /// Evaluation at `x` in an extension `G`, coefficients mapped by `embed`.
    pub fn evaluate_in<G: FrobeniusField>(
        &self,
        f: &OrePoly<F::Elem>,
        target: &G,
        x: &G::Elem,
        embed: impl Fn(&F::Elem) -> G::Elem,
    ) -> G::Elem {
        let mut acc = target.zero();
        let mut xp = x.clone();
        for (i, c) in f.coeffs.iter().enumerate() {
            if i > 0 {
                xp = target.frobenius(&xp);
            }
            if !self.field.is_zero(c) {
                acc = target.add(&acc, &target.mul(&embed(c), &xp));
            }
        }
        acc
    }

    /// Transports `f` to `G{τ}` along a field homomorphism.
    pub fn map_to<G: FrobeniusField>(
        &self,
        f: &OrePoly<F::Elem>,
        target: &OreRing<G>,
        embed: impl Fn(&F::Elem) -> G::Elem,
    ) -> OrePoly<G::Elem> {
        target.poly(f.coeffs.iter().map(embed).collect())
    }

    /// `f = quot · g + rem` with `deg rem < deg g`.
    pub fn right_divide(
        &self,
        f: &OrePoly<F::Elem>,
        g: &OrePoly<F::Elem>,
    ) -> Result<(OrePoly<F::Elem>, OrePoly<F::Elem>)> {
        let dg = g
            .degree()
            .ok_or_else(|| Error::Domain("right division by the zero operator".into()))?;
        let k = &self.field;
        let lead = g.lead().unwrap().clone();
        let mut rem = f.clone();
        let mut quot = vec![k.zero(); f.coeffs.len().saturating_sub(dg)];
        while let Some(dr) = rem.degree() {
            if dr < dg {
                break;
            }
            let s = dr - dg;
            // c τ^s · b τ^dg = c b^(q^s) τ^dr
            let b = k.frobenius_iter(&lead, s);
            let c = k.div(rem.lead().unwrap(), &b).unwrap();
            rem = self.sub(&rem, &self.mul(&self.monomial(c.clone(), s), g));
            quot[s] = c;
        }
        Ok((self.poly(quot), rem))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PrimeField, Ring};
    use crate::funcfield::RatFuncField;

    #[test]
    fn commutation_rule() {
        let k = RatFuncField::new(PrimeField::new(2).unwrap());
        let r = OreRing::new(k.clone());
        let th = k.theta();
        let lhs = r.mul(&r.tau(), &r.constant(th.clone()));
        assert_eq!(lhs, r.monomial(k.mul(&th, &th), 1));
        assert_ne!(lhs, r.mul(&r.constant(th), &r.tau()));
    }

    #[test]
    fn carlitz_square() {
        let k = RatFuncField::new(PrimeField::new(2).unwrap());
        let r = OreRing::new(k.clone());
        let th = k.theta();
        let phi = r.poly(vec![th.clone(), k.one()]);
        let sq = r.mul(&phi, &phi);
        let th2 = k.mul(&th, &th);
        assert_eq!(sq, r.poly(vec![th2.clone(), k.add(&th, &th2), k.one()]));
        assert!(k.is_zero(&r.evaluate(&phi, &th)));
        assert_eq!(r.constant_term(&phi), th);
        assert!(k.is_zero(&r.constant_term(&r.tau())));
    }

    #[test]
    fn right_division_edge_cases() {
        let k = RatFuncField::new(PrimeField::new(3).unwrap());
        let r = OreRing::new(k.clone());
        let g = r.poly(vec![k.theta(), k.one(), k.theta()]);
        assert_eq!(r.right_divide(&g, &g).unwrap(), (r.one(), r.zero()));
        let f = r.poly(vec![k.one(), k.theta()]);
        assert_eq!(r.right_divide(&f, &g).unwrap(), (r.zero(), f.clone()));
        assert!(r.right_divide(&f, &r.zero()).is_err());
    }
}
