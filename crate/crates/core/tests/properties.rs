use drinfeld_core::algebra::{
    Field, FiniteField, FiniteFieldLike, FrobeniusField, PolyRing, PrimeField, QuotientRing, Ring, Var,
};
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::funcfield::RatFuncField;
use drinfeld_core::ore::OreRing;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(seed: u64) -> ProptestConfig {
    ProptestConfig {
        cases: 1000,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn coords(p: u64, n: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..p, n)
}

fn poly_coeffs(p: u64, max_deg: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..p, 1..=max_deg + 1)
}

proptest! {
    #![proptest_config(config(11))]

    #[test]
    fn finite_field_axioms(a in coords(3, 4), b in coords(3, 4), c in coords(3, 4)) {
        let k = FiniteField::standard(3, 4).unwrap();
        let (a, b, c) = (k.from_coords(&a), k.from_coords(&b), k.from_coords(&c));
        prop_assert_eq!(k.mul(&k.mul(&a, &b), &c), k.mul(&a, &k.mul(&b, &c)));
        prop_assert_eq!(k.mul(&a, &k.add(&b, &c)), k.add(&k.mul(&a, &b), &k.mul(&a, &c)));
        prop_assert_eq!(k.mul(&a, &b), k.mul(&b, &a));
        prop_assert!(k.is_zero(&k.sub(&a, &a)));
        if !k.is_zero(&a) {
            prop_assert!(k.is_one(&k.mul(&a, &k.inv(&a).unwrap())));
        }
        prop_assert_eq!(k.frobenius(&k.add(&a, &b)), k.add(&k.frobenius(&a), &k.frobenius(&b)));
        prop_assert_eq!(k.frobenius_iter(&a, 4), a);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn rational_function_field_axioms(
        an in poly_coeffs(3, 3), ad in poly_coeffs(3, 3),
        bn in poly_coeffs(3, 3), bd in poly_coeffs(3, 3),
    ) {
        let k = RatFuncField::new(PrimeField::new(3).unwrap());
        let r = k.poly_ring();
        let (Some(a), Some(b)) = (k.fraction(r.poly(an), r.poly(ad)), k.fraction(r.poly(bn), r.poly(bd))) else {
            return Ok(());
        };
        prop_assert_eq!(k.mul(&a, &b), k.mul(&b, &a));
        prop_assert_eq!(k.sub(&k.add(&a, &b), &b), a.clone());
        if !k.is_zero(&b) {
            prop_assert_eq!(k.mul(&k.div(&a, &b).unwrap(), &b), a.clone());
        }
        prop_assert_eq!(k.frobenius(&k.add(&a, &b)), k.add(&k.frobenius(&a), &k.frobenius(&b)));
    }
}

proptest! {
    #![proptest_config(config(13))]

    #[test]
    fn ore_multiplication_is_associative(
        f in prop::collection::vec(coords(2, 3), 1..5),
        g in prop::collection::vec(coords(2, 3), 1..5),
        h in prop::collection::vec(coords(2, 3), 1..5),
        x in coords(2, 3),
    ) {
        let k = FiniteField::standard(2, 3).unwrap();
        let ore = OreRing::new(k.clone());
        let mk = |v: &Vec<Vec<u64>>| ore.poly(v.iter().map(|c| k.from_coords(c)).collect());
        let (f, g, h) = (mk(&f), mk(&g), mk(&h));
        prop_assert_eq!(ore.mul(&ore.mul(&f, &g), &h), ore.mul(&f, &ore.mul(&g, &h)));
        let x = k.from_coords(&x);
        prop_assert_eq!(ore.evaluate(&ore.mul(&f, &g), &x), ore.evaluate(&f, &ore.evaluate(&g, &x)));
    }
}

proptest! {
    #![proptest_config(config(14))]

    #[test]
    fn phi_is_a_ring_homomorphism(
        phi in prop::collection::vec(coords(3, 2), 2..4),
        a in poly_coeffs(3, 3),
        b in poly_coeffs(3, 3),
    ) {
        let k = FiniteField::standard(3, 2).unwrap();
        let mut coeffs: Vec<_> = phi.iter().map(|c| k.from_coords(c)).collect();
        let last = coeffs.len() - 1;
        if k.is_zero(&coeffs[last]) {
            coeffs[last] = k.one();
        }
        let d = DrinfeldModule::new(k, coeffs).unwrap();
        let ring = PolyRing::new(PrimeField::new(3).unwrap(), Var::T);
        let (a, b) = (ring.poly(a), ring.poly(b));
        let o = d.ore();
        prop_assert_eq!(d.phi(&ring.mul(&a, &b)), o.mul(&d.phi(&a), &d.phi(&b)));
        prop_assert_eq!(d.phi(&ring.add(&a, &b)), o.add(&d.phi(&a), &d.phi(&b)));
        prop_assert_eq!(o.mul(&d.phi(&a), &d.phi(&b)), o.mul(&d.phi(&b), &d.phi(&a)));
    }
}

proptest! {
    #![proptest_config(config(15))]

    #[test]
    fn quotient_ring_matches_polynomial_arithmetic(a in poly_coeffs(2, 6), b in poly_coeffs(2, 6)) {
        let pf = PrimeField::new(2).unwrap();
        let ring = PolyRing::new(pf, Var::T);
        let q = QuotientRing::new(pf, ring.from_ints(&[1, 1, 0, 1]));
        let (a, b) = (ring.poly(a), ring.poly(b));
        prop_assert_eq!(q.mul(&q.reduce(&a), &q.reduce(&b)), q.reduce(&ring.mul(&a, &b)));
    }
}
