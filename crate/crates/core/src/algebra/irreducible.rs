use super::poly::{Poly, PolyRing, Var};
use super::{cache, factor, PrimeField};

/// Monic polynomials of degree `n` over `F_q` in canonical order: the lower
/// coefficients read as a base-`q` number with `c_{n-1}` most significant.
pub fn monic_of_degree(q: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
    let mut next = Some(vec![0u64; n]);
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        next = succ.iter_mut().position(|c| {
            *c += 1;
            if *c == q {
                *c = 0;
                false
            } else {
                true
            }
        })
        .map(|_| succ);
        let mut c = cur;
        c.push(1);
        Some(c)
    })
}

/// All monic irreducible polynomials of degree `1..=bound`, ordered by
/// degree and then canonically.
pub fn irreducibles_up_to(q: u64, var: Var, bound: usize) -> Vec<Poly<u64>> {
    let base = PrimeField::new(q).expect("prime q");
    let ring = PolyRing::new(base, var);
    let mut out = Vec::new();
    for n in 1..=bound {
        out.extend(irreducibles_of_degree(&ring, n));
    }
    out
}

pub fn irreducibles_of_degree(ring: &PolyRing<PrimeField>, n: usize) -> Vec<Poly<u64>> {
    monic_of_degree(ring.base().p(), n)
        .map(|c| ring.poly(c))
        .filter(|f| factor::is_irreducible(ring, f))
        .collect()
}

/// Number of monic irreducibles of degree `n` over `F_q`: `(1/n) sum mu(d) q^(n/d)`.
pub fn necklace_count(q: u64, n: usize) -> u64 {
    let mut total: i128 = 0;
    for d in 1..=n {
        if n % d == 0 {
            total += mobius(d) as i128 * (q as i128).pow((n / d) as u32);
        }
    }
    (total / n as i128) as u64
}

fn mobius(mut n: usize) -> i32 {
    let mut mu = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Lexicographically least monic irreducible of degree `n`, cached by `(q, n)`.
pub fn standard_modulus(base: PrimeField, n: usize) -> Vec<u64> {
    let q = base.p();
    let ring = PolyRing::new(base, Var::X);
    cache::global().get_or_compute(
        "modulus",
        &(q, n),
        |m: &Vec<u64>| {
            m.len() == n + 1
                && m.iter().all(|c| *c < q)
                && factor::is_irreducible(&ring, &ring.poly(m.clone()))
        },
        || {
            monic_of_degree(q, n)
                .find(|c| factor::is_irreducible(&ring, &ring.poly(c.clone())))
                .expect("irreducibles exist in every degree")
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lists() {
        let l = irreducibles_up_to(2, Var::Theta, 1);
        assert_eq!(l.iter().map(|p| p.coeffs().to_vec()).collect::<Vec<_>>(), vec![vec![0, 1], vec![1, 1]]);
        let l = irreducibles_up_to(2, Var::Theta, 2);
        assert_eq!(l.len(), 3);
        assert_eq!(l[2].coeffs(), &[1, 1, 1]);
    }

    #[test]
    fn counts_match_necklace_formula() {
        for (q, b) in [(2u64, 8usize), (3, 5), (5, 3)] {
            let l = irreducibles_up_to(q, Var::T, b);
            for n in 1..=b {
                let c = l.iter().filter(|p| p.degree() == Some(n)).count() as u64;
                assert_eq!(c, necklace_count(q, n), "q={q} n={n}");
            }
            let mut sorted = l.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), l.len());
        }
        assert_eq!(necklace_count(3, 3), 8);
    }
}
