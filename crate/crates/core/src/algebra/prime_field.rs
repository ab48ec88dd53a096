use serde::{Deserialize, Serialize};

use super::{Field, FiniteFieldLike, FrobeniusField, Ring};
use crate::error::{Error, Result};

/// The prime field `F_p` with a machine-word modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Builds `F_p`; `p` must be a prime below `2^31`.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p >= 1 << 31 || !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not a supported prime")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Ring for PrimeField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (a * b) % self.p
    }
    fn from_int(&self, n: i64) -> u64 {
        self.reduce_i64(n)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a % self.p == 0 {
            return None;
        }
        Some(self.pow(a, self.p - 2))
    }
}

impl Field for PrimeField {
    fn characteristic(&self) -> u64 {
        self.p
    }
}

impl FrobeniusField for PrimeField {
    fn frobenius(&self, a: &u64) -> u64 {
        *a
    }
}

impl FiniteFieldLike for PrimeField {
    fn prime(&self) -> u64 {
        self.p
    }
    fn degree(&self) -> usize {
        1
    }
    fn to_coords(&self, a: &u64) -> Vec<u64> {
        vec![*a]
    }
    fn from_coords(&self, c: &[u64]) -> u64 {
        c.first().copied().unwrap_or(0) % self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composites() {
        assert!(PrimeField::new(4).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(7).is_ok());
    }

    #[test]
    fn inverses() {
        let f = PrimeField::new(7).unwrap();
        for x in 1..7 {
            assert_eq!(f.mul(&x, &f.inv(&x).unwrap()), 1);
        }
        assert_eq!(f.inv(&0), None);
    }
}
