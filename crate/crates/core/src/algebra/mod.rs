//! Exact arithmetic: prime fields, finite fields built directly over F_q,
//! univariate polynomials, factorization and small-matrix linear algebra.
//!
//! All rings are *contexts*: an element carries no reference to its ring and
//! every operation goes through the ring value, so the same element type can
//! be shared by fields with runtime moduli.

pub mod cache;
pub mod decimal;
pub mod factor;
pub mod finite_field;
pub mod fq_matrix;
pub mod irreducible;
pub mod matrix;
pub mod poly;
pub mod prime_field;
pub mod quotient;
pub mod snf;

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::Zero;

pub use finite_field::{FiniteField, GfElem};
pub use fq_matrix::FqMatrix;
pub use matrix::Matrix;
pub use poly::{Poly, PolyRing, Var};
pub use prime_field::PrimeField;
pub use quotient::QuotientRing;

/// A commutative ring with identity, used as an arithmetic context.
pub trait Ring: Clone + Debug + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Eq + Hash + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Image of an integer under `Z -> R`.
    fn from_int(&self, n: i64) -> Self::Elem;
    /// Multiplicative inverse, `None` for non-units.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn pow_big(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }
}

/// A field: `inv` succeeds on every nonzero element.
pub trait Field: Ring {
    fn characteristic(&self) -> u64;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }
}

/// A field on which `x -> x^p` can be applied, `p` the characteristic.
///
/// Every coefficient field of a twisted polynomial ring implements this.
pub trait FrobeniusField: Field {
    /// `a^p`.
    fn frobenius(&self, a: &Self::Elem) -> Self::Elem;

    /// `a^(p^k)`.
    fn frobenius_iter(&self, a: &Self::Elem, k: usize) -> Self::Elem {
        let mut x = a.clone();
        for _ in 0..k {
            x = self.frobenius(&x);
        }
        x
    }
}

/// A finite field `F_{p^n}` presented by coordinates over its prime field.
pub trait FiniteFieldLike: FrobeniusField {
    fn prime(&self) -> u64;
    /// Dimension over the prime field.
    fn degree(&self) -> usize;
    fn to_coords(&self, a: &Self::Elem) -> Vec<u64>;
    fn from_coords(&self, c: &[u64]) -> Self::Elem;

    fn order(&self) -> BigUint {
        BigUint::from(self.prime()).pow(self.degree() as u32)
    }

    /// Canonical index `sum c_i p^i`; orders elements for tie-breaking.
    fn index_of(&self, a: &Self::Elem) -> BigUint {
        let p = BigUint::from(self.prime());
        let mut acc = BigUint::zero();
        for c in self.to_coords(a).iter().rev() {
            acc = acc * &p + BigUint::from(*c);
        }
        acc
    }

    fn from_index(&self, idx: u64) -> Self::Elem {
        let p = self.prime();
        let mut i = idx;
        let c: Vec<u64> = (0..self.degree())
            .map(|_| {
                let d = i % p;
                i /= p;
                d
            })
            .collect();
        self.from_coords(&c)
    }

    fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem {
        let p = self.prime();
        let c: Vec<u64> = (0..self.degree()).map(|_| rng.gen_range(0..p)).collect();
        self.from_coords(&c)
    }

    /// All elements in canonical index order. Only for small fields.
    fn elements(&self) -> Vec<Self::Elem> {
        let n = self.order();
        let n: u64 = (&n).try_into().expect("field too large to enumerate");
        (0..n).map(|i| self.from_index(i)).collect()
    }

    /// `true` when `a` lies in the prime field.
    fn in_prime_field(&self, a: &Self::Elem) -> bool {
        self.to_coords(a).iter().skip(1).all(|c| *c == 0)
    }
}
