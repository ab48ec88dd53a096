use super::poly::{Poly, PolyRing, Var};
use super::{PrimeField, Ring};

/// The residue ring `A/(a)` for `A = F_q[t]` and monic `a` of positive degree.
///
/// Elements are reduced polynomials of degree `< deg a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuotientRing {
    ring: PolyRing<PrimeField>,
    modulus: Poly<u64>,
}

impl QuotientRing {
    pub fn new(field: PrimeField, modulus: Poly<u64>) -> Self {
        let ring = PolyRing::new(field, Var::T);
        assert!(modulus.degree().unwrap_or(0) > 0, "modulus must have positive degree");
        let modulus = ring.monic(&modulus);
        Self { ring, modulus }
    }

    pub fn poly_ring(&self) -> &PolyRing<PrimeField> {
        &self.ring
    }

    pub fn modulus(&self) -> &Poly<u64> {
        &self.modulus
    }

    pub fn field(&self) -> PrimeField {
        *self.ring.base()
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap()
    }

    pub fn reduce(&self, f: &Poly<u64>) -> Poly<u64> {
        self.ring.rem(f, &self.modulus)
    }

    /// Number of elements, `q^deg a`.
    pub fn size(&self) -> u64 {
        self.field().p().pow(self.degree() as u32)
    }

    /// Coefficient vector of length `deg a`.
    pub fn to_coords(&self, f: &Poly<u64>) -> Vec<u64> {
        (0..self.degree()).map(|i| self.ring.coeff_or_zero(f, i)).collect()
    }

    pub fn from_coords(&self, c: &[u64]) -> Poly<u64> {
        self.ring.poly(c.to_vec())
    }

    /// All elements, ordered by base-`q` index of the coefficient vector.
    pub fn elements(&self) -> Vec<Poly<u64>> {
        let q = self.field().p();
        (0..self.size())
            .map(|mut i| {
                let c: Vec<u64> = (0..self.degree())
                    .map(|_| {
                        let d = i % q;
                        i /= q;
                        d
                    })
                    .collect();
                self.from_coords(&c)
            })
            .collect()
    }

    pub fn index_of(&self, f: &Poly<u64>) -> u64 {
        let q = self.field().p();
        self.to_coords(f).iter().rev().fold(0, |acc, c| acc * q + c)
    }

    pub fn display(&self, f: &Poly<u64>) -> String {
        self.ring.display(f)
    }
}

impl Ring for QuotientRing {
    type Elem = Poly<u64>;

    fn zero(&self) -> Poly<u64> {
        self.ring.zero()
    }

    fn one(&self) -> Poly<u64> {
        self.ring.one()
    }

    fn add(&self, a: &Poly<u64>, b: &Poly<u64>) -> Poly<u64> {
        self.ring.add(a, b)
    }

    fn neg(&self, a: &Poly<u64>) -> Poly<u64> {
        self.ring.neg(a)
    }

    fn mul(&self, a: &Poly<u64>, b: &Poly<u64>) -> Poly<u64> {
        self.ring.mulmod(a, b, &self.modulus)
    }

    fn from_int(&self, n: i64) -> Poly<u64> {
        self.ring.from_int(n)
    }

    fn inv(&self, a: &Poly<u64>) -> Option<Poly<u64>> {
        self.ring.inv_mod(a, &self.modulus)
    }
}
