//! Factorization of univariate polynomials over finite fields:
//! square-free decomposition, distinct-degree splitting and Cantor-Zassenhaus
//! equal-degree splitting driven by a seeded ChaCha stream.

use num_bigint::BigUint;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::poly::{Poly, PolyRing};
use super::{FiniteFieldLike, Ring};

type P<F> = Poly<<F as Ring>::Elem>;

/// `x^(Q^k) mod f` for `Q = |F|`, iterated from `h = x^(Q^(k-1)) mod f`.
fn frob_step<F: FiniteFieldLike>(ring: &PolyRing<F>, h: &P<F>, f: &P<F>) -> P<F> {
    ring.powmod(h, &ring.base().order(), f)
}

/// Ben-Or irreducibility test: `f` is irreducible iff `gcd(x^(Q^k) - x, f) = 1`
/// for all `k <= deg f / 2`. Exits at the first small factor, which makes the
/// scan for least irreducibles cheap.
pub fn is_irreducible<F: FiniteFieldLike>(ring: &PolyRing<F>, f: &P<F>) -> bool {
    let n = match f.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    let f = ring.monic(f);
    if ring.base().is_zero(&f.coeffs()[0]) {
        return false;
    }
    let x = ring.gen();
    let mut h = ring.rem(&x, &f);
    for _ in 0..n / 2 {
        h = frob_step(ring, &h, &f);
        if ring.gcd(&ring.sub(&h, &x), &f).degree() != Some(0) {
            return false;
        }
    }
    true
}

/// Square-free decomposition of a monic polynomial: pairs `(g_i, i)` with
/// `f = prod g_i^i`, each `g_i` square-free and pairwise coprime.
pub fn squarefree<F: FiniteFieldLike>(ring: &PolyRing<F>, f: &P<F>) -> Vec<(P<F>, usize)> {
    let f = ring.monic(f);
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let p = ring.base().prime() as usize;
    let fd = ring.derivative(&f);
    if fd.is_zero() {
        // f = g(x^p) with coefficients p-th powers: take the p-th root.
        let root = pth_root(ring, &f);
        for (g, e) in squarefree(ring, &root) {
            out.push((g, e * p));
        }
        return merge(ring, out);
    }
    let mut c = ring.gcd(&f, &fd);
    let mut w = ring.div_exact(&f, &c).unwrap();
    let mut i = 1;
    while w.degree().unwrap_or(0) > 0 {
        let y = ring.gcd(&w, &c);
        let z = ring.div_exact(&w, &y).unwrap();
        if z.degree().unwrap_or(0) > 0 {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = ring.div_exact(&c, &w).unwrap();
    }
    if c.degree().unwrap_or(0) > 0 {
        let root = pth_root(ring, &c);
        for (g, e) in squarefree(ring, &root) {
            out.push((g, e * p));
        }
    }
    merge(ring, out)
}

fn merge<F: FiniteFieldLike>(ring: &PolyRing<F>, v: Vec<(P<F>, usize)>) -> Vec<(P<F>, usize)> {
    let mut out: Vec<(P<F>, usize)> = Vec::new();
    for (g, e) in v {
        if let Some(slot) = out.iter_mut().find(|(_, e2)| *e2 == e) {
            slot.0 = ring.mul(&slot.0, &g);
        } else {
            out.push((g, e));
        }
    }
    out.sort_by_key(|(_, e)| *e);
    out
}

fn pth_root<F: FiniteFieldLike>(ring: &PolyRing<F>, f: &P<F>) -> P<F> {
    let field = ring.base();
    let p = field.prime() as usize;
    let k = field.degree().saturating_sub(1);
    ring.poly(
        f.coeffs()
            .iter()
            .step_by(p)
            .map(|c| field.frobenius_iter(c, k))
            .collect(),
    )
}

/// Distinct-degree factorization of a monic square-free polynomial:
/// `(g_d, d)` where `g_d` is the product of all irreducible factors of degree `d`.
pub fn distinct_degree<F: FiniteFieldLike>(ring: &PolyRing<F>, f: &P<F>) -> Vec<(P<F>, usize)> {
    let mut out = Vec::new();
    let mut rest = ring.monic(f);
    let x = ring.gen();
    let mut h = ring.rem(&x, &rest);
    let mut d = 0;
    while rest.degree().unwrap_or(0) >= 2 * (d + 1) {
        d += 1;
        h = frob_step(ring, &h, &rest);
        let g = ring.gcd(&ring.sub(&h, &x), &rest);
        if g.degree().unwrap_or(0) > 0 {
            rest = ring.div_exact(&rest, &g).unwrap();
            h = ring.rem(&h, &rest);
            out.push((g, d));
        }
    }
    if let Some(dr) = rest.degree() {
        if dr > 0 {
            out.push((rest, dr));
        }
    }
    out
}

/// Splits a monic product of distinct irreducibles of degree `d`.
pub fn equal_degree<F: FiniteFieldLike>(
    ring: &PolyRing<F>,
    f: &P<F>,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<P<F>> {
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    if n == d {
        return vec![ring.monic(f)];
    }
    let field = ring.base();
    let p = field.prime();
    loop {
        let a = ring.poly((0..n).map(|_| field.random(rng)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let g = ring.gcd(&a, f);
        let candidate = if g.degree().unwrap_or(0) > 0 {
            g
        } else if p == 2 {
            // absolute trace to F_2 of the residue fields F_{Q^d}
            let steps = field.degree() * d;
            let mut cur = ring.rem(&a, f);
            let mut acc = cur.clone();
            for _ in 1..steps {
                cur = ring.mulmod(&cur, &cur, f);
                acc = ring.add(&acc, &cur);
            }
            ring.gcd(&acc, f)
        } else {
            let e = (field.order().pow(d as u32) - BigUint::one()) >> 1;
            let b = ring.powmod(&a, &e, f);
            ring.gcd(&ring.sub(&b, &ring.one()), f)
        };
        let cd = candidate.degree().unwrap_or(0);
        if cd > 0 && cd < n {
            let other = ring.div_exact(f, &candidate).unwrap();
            let mut out = equal_degree(ring, &candidate, d, rng);
            out.extend(equal_degree(ring, &other, d, rng));
            return out;
        }
    }
}

/// Canonical ordering of monic polynomials: degree, then coefficient indices
/// from the top coefficient down.
pub fn canonical_key<F: FiniteFieldLike>(field: &F, f: &Poly<F::Elem>) -> (usize, Vec<BigUint>) {
    (
        f.degree().unwrap_or(0),
        f.coeffs().iter().rev().map(|c| field.index_of(c)).collect(),
    )
}

/// Full factorization: leading coefficient and sorted `(monic irreducible, multiplicity)`.
///
/// Panics on the zero polynomial; callers check first.
pub fn factor<F: FiniteFieldLike>(
    ring: &PolyRing<F>,
    f: &P<F>,
    seed: u64,
) -> (F::Elem, Vec<(P<F>, usize)>) {
    let lead = f.lead().expect("factor of zero polynomial").clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (g, e) in squarefree(ring, f) {
        for (h, d) in distinct_degree(ring, &g) {
            for irr in equal_degree(ring, &h, d, &mut rng) {
                out.push((irr, e));
            }
        }
    }
    let field = ring.base();
    out.sort_by(|a, b| canonical_key(field, &a.0).cmp(&canonical_key(field, &b.0)));
    (lead, out)
}

/// Distinct roots of `f` lying in the coefficient field, in canonical order.
pub fn roots<F: FiniteFieldLike>(ring: &PolyRing<F>, f: &P<F>, seed: u64) -> Vec<F::Elem> {
    if f.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let f = ring.monic(f);
    let x = ring.gen();
    let xq = ring.powmod(&x, &ring.base().order(), &f);
    let g = ring.gcd(&ring.sub(&xq, &x), &f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = ring.base();
    let mut out: Vec<F::Elem> = equal_degree(ring, &g, 1, &mut rng)
        .into_iter()
        .map(|l| field.neg(&l.coeffs()[0]))
        .collect();
    out.sort_by_key(|a| field.index_of(a));
    out
}

/// Degrees of the irreducible factors of a square-free `f`, from DDF.
pub fn factor_degrees<F: FiniteFieldLike>(ring: &PolyRing<F>, f: &P<F>) -> Vec<usize> {
    distinct_degree(ring, f).into_iter().map(|(_, d)| d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FiniteField, PrimeField, Var};

    fn f2() -> PolyRing<PrimeField> {
        PolyRing::new(PrimeField::new(2).unwrap(), Var::X)
    }

    #[test]
    fn x2_plus_x_over_f2() {
        let r = f2();
        let (_, fs) = factor(&r, &r.from_ints(&[0, 1, 1]), 1);
        assert_eq!(fs, vec![(r.from_ints(&[0, 1]), 1), (r.from_ints(&[1, 1]), 1)]);
    }

    #[test]
    fn x2_plus_1_is_square() {
        let r = f2();
        let (_, fs) = factor(&r, &r.from_ints(&[1, 0, 1]), 1);
        assert_eq!(fs, vec![(r.from_ints(&[1, 1]), 2)]);
    }

    #[test]
    fn product_of_three_over_f3() {
        let r = PolyRing::new(PrimeField::new(3).unwrap(), Var::X);
        // x^2+1, x^3+2x+1, x+2 are irreducible over F_3
        let a = r.from_ints(&[1, 0, 1]);
        let b = r.from_ints(&[1, 2, 0, 1]);
        let c = r.from_ints(&[2, 1]);
        for g in [&a, &b, &c] {
            assert!(is_irreducible(&r, g));
        }
        let f = r.mul(&r.mul(&a, &b), &r.mul(&c, &c));
        let (lead, fs) = factor(&r, &r.scale(&f, &2), 9);
        assert_eq!(lead, 2);
        let mut expected = vec![(c.clone(), 2), (a.clone(), 1), (b.clone(), 1)];
        expected.sort_by(|x, y| canonical_key(r.base(), &x.0).cmp(&canonical_key(r.base(), &y.0)));
        assert_eq!(fs, expected);
    }

    #[test]
    fn inseparable_power() {
        let r = PolyRing::new(PrimeField::new(3).unwrap(), Var::X);
        let a = r.from_ints(&[1, 0, 1]);
        let f = r.pow(&a, 6);
        let (_, fs) = factor(&r, &f, 3);
        assert_eq!(fs, vec![(a, 6)]);
    }

    #[test]
    fn roots_over_extension() {
        let f4 = FiniteField::standard(2, 2).unwrap();
        let r = PolyRing::new(f4.clone(), Var::X);
        // x^2 + x + 1 splits over F_4
        let m = r.poly(vec![f4.one(), f4.one(), f4.one()]);
        let rs = roots(&r, &m, 5);
        assert_eq!(rs.len(), 2);
        for z in rs {
            assert!(f4.is_zero(&r.eval(&m, &z)));
        }
    }
}
