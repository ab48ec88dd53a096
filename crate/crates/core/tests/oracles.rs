//! Library results against brute-force enumeration.

use std::collections::HashSet;

use drinfeld_core::algebra::matrix::MatrixRing;
use drinfeld_core::algebra::{FiniteField, FiniteFieldLike, Poly, PolyRing, PrimeField, QuotientRing, Ring, Var};
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::funcfield::{places_up_to, RatFunc, RatFuncField};
use drinfeld_core::galois::sample_frobenii;
use drinfeld_core::kummer::{division_hull, expected_density, is_divisible_at, ImageModel};
use drinfeld_core::torsion::{ambient_field, torsion_space, BasisChoice};

fn rational(q: u64, phi_t: &[&[i64]]) -> DrinfeldModule<RatFuncField> {
    let k = RatFuncField::new(PrimeField::new(q).unwrap());
    let coeffs = phi_t.iter().map(|c| k.from_ints(c)).collect();
    DrinfeldModule::new(k, coeffs).unwrap()
}

/// Roots of `φ_a` in `F_{q^(n j)}` by evaluating at every element.
fn brute_roots(d: &DrinfeldModule<FiniteField>, a: &Poly<u64>, j: usize) -> usize {
    let k = d.field();
    let emb = ambient_field(k, k.degree() * j).unwrap();
    let big = emb.target().clone();
    let phi = d.phi(a);
    big.elements()
        .iter()
        .filter(|x| big.is_zero(&d.ore().evaluate_in(&phi, &big, x, |c| emb.apply(c))))
        .count()
}

#[test]
fn torsion_counts_and_splitting_degrees_match_enumeration() {
    for (q, phi) in [(2u64, vec![&[0i64, 1][..], &[1][..]]), (2, vec![&[0, 1], &[1], &[1]]), (3, vec![&[0, 1], &[1]])] {
        let d = rational(q, &phi);
        let ring = d.a_ring();
        for v in places_up_to(PrimeField::new(q).unwrap(), 2) {
            let Ok(dv) = d.reduce_at(&v) else { continue };
            for a in [ring.from_ints(&[0, 1]), ring.from_ints(&[1, 1]), ring.from_ints(&[1, 0, 1])] {
                if dv.check_level(&a).is_err() {
                    continue;
                }
                let t = torsion_space(&dv, &a).unwrap();
                let expected = (q as usize).pow((dv.rank() * a.degree().unwrap()) as u32);
                let n = dv.field().degree() * t.relative_degree().unwrap();
                if (q as usize).pow(n as u32) > 1 << 16 {
                    continue;
                }
                // the splitting degree is the least j with all roots rational
                let j = t.relative_degree().unwrap();
                assert_eq!(brute_roots(&dv, &a, j), expected);
                for smaller in 1..j {
                    if j % smaller == 0 {
                        assert!(brute_roots(&dv, &a, smaller) < expected);
                    }
                }
            }
        }
    }
}

#[test]
fn divisibility_matches_residue_field_search() {
    let d = rational(3, &[&[0, 1], &[1]]);
    let k = d.field().clone();
    let ring = d.a_ring();
    let ms = [k.theta(), k.from_ints(&[1, 0, 1]), k.fraction(ring.from_ints(&[1]), ring.from_ints(&[1, 1])).unwrap()];
    for v in places_up_to(PrimeField::new(3).unwrap(), 3) {
        for a in [ring.from_ints(&[0, 1]), ring.from_ints(&[1, 1]), ring.from_ints(&[1, 0, 1])] {
            for m in &ms {
                let Ok(rec) = is_divisible_at(&d, m, &a, &v) else { continue };
                let kv = v.residue_field();
                let dv = d.reduce_at(&v).unwrap();
                let mbar = v.reduce(m).unwrap();
                let brute = kv.elements().iter().any(|x| dv.act(&a, x) == mbar);
                assert_eq!(rec.divisible, brute, "place {:?} level {:?}", v.pi(), a);
            }
        }
    }
}

#[test]
fn divisibility_is_compatible_with_the_module_structure() {
    let d = rational(2, &[&[0, 1], &[1], &[1]]);
    let k = d.field().clone();
    let ring = d.a_ring();
    let a = ring.from_ints(&[1, 1]);
    let m1 = k.from_ints(&[1, 1, 1]);
    let m2 = k.theta();
    let b = ring.from_ints(&[1, 0, 1]);
    for v in places_up_to(PrimeField::new(2).unwrap(), 6) {
        let (Ok(r1), Ok(r2)) = (is_divisible_at(&d, &m1, &a, &v), is_divisible_at(&d, &m2, &a, &v)) else {
            continue;
        };
        let Ok(sum) = is_divisible_at(&d, &k.add(&m1, &m2), &a, &v) else { continue };
        let Ok(image) = is_divisible_at(&d, &d.act(&b, &m1), &a, &v) else { continue };
        if r1.divisible && r2.divisible {
            assert!(sum.divisible);
        }
        if r1.divisible {
            assert!(image.divisible);
        }
        // φ_a(m) is always divisible by a
        assert!(is_divisible_at(&d, &d.act(&a, &m1), &a, &v).unwrap().divisible);
    }
}

/// Fixed points of `x -> γx + h` counted directly.
fn brute_density(q: &QuotientRing, r: usize, model: &ImageModel) -> (u64, u64) {
    let mring = MatrixRing::new(q.clone(), r);
    let elems = q.elements();
    let vectors: Vec<Vec<Poly<u64>>> = (0..elems.len().pow(r as u32))
        .map(|mut i| {
            (0..r)
                .map(|_| {
                    let e = elems[i % elems.len()].clone();
                    i /= elems.len();
                    e
                })
                .collect()
        })
        .collect();
    let mut hits = 0;
    for g in &model.group {
        for h in &model.delta {
            let fixed = vectors.iter().any(|x| {
                let gx = mring.mul_vec(g, x);
                gx.iter().zip(h).map(|(u, w)| q.add(u, w)).collect::<Vec<_>>() == *x
            });
            hits += fixed as u64;
        }
    }
    (hits, (model.group.len() * model.delta.len()) as u64)
}

#[test]
fn expected_density_matches_fixed_point_count() {
    for (p, modulus, r) in [(2u64, vec![1, 1], 1usize), (3, vec![1, 1], 1), (2, vec![1, 1, 1], 1), (2, vec![0, 1], 2)] {
        let pf = PrimeField::new(p).unwrap();
        let q = QuotientRing::new(pf, PolyRing::new(pf, Var::T).poly(modulus));
        let model = ImageModel::full(&q, r).unwrap();
        let (hits, total) = brute_density(&q, r, &model);
        let f = expected_density(&q, r, &model).unwrap();
        assert_eq!(f.num() * total, hits * f.den());
        // a subgroup of the full model
        let half = ImageModel { group: model.group[..1].to_vec(), delta: model.delta.clone() };
        let (hits, total) = brute_density(&q, r, &half);
        let f = expected_density(&q, r, &half).unwrap();
        assert_eq!(f.num() * total, hits * f.den());
    }
}

#[test]
fn hull_points_are_division_points_and_search_is_complete() {
    let d = rational(2, &[&[0, 1], &[1]]);
    let k = d.field().clone();
    let ring = d.a_ring();
    let g = k.from_ints(&[0, 0, 0, 1, 1]);
    let rep = division_hull(&d, &[g.clone()], 2).unwrap();
    for p in &rep.points {
        let m = d.act(&p.image[0], &g);
        assert_eq!(d.act(&p.witness, &p.x), m);
    }
    // every polynomial x of degree <= 5 with φ_t(x) in {φ_c(g) : deg c = 0} is found
    let found: HashSet<RatFunc> = rep.points.iter().map(|p| p.x.clone()).chain(rep.rational_torsion.iter().cloned()).collect();
    for bits in 0u64..64 {
        let x = k.from_poly(ring.poly((0..6).map(|i| (bits >> i) & 1).collect()));
        let phx = d.act(&ring.gen(), &x);
        if phx == g || k.is_zero(&phx) {
            assert!(found.contains(&x), "missing {}", k.display(&x));
        }
    }
}

#[test]
fn hull_grows_monotonically() {
    let d = rational(2, &[&[0, 1], &[1]]);
    let g = d.field().from_ints(&[0, 0, 0, 1, 1]);
    let mut prev: Option<Vec<RatFunc>> = None;
    for bound in 1..=3 {
        let rep = division_hull(&d, &[g.clone()], bound).unwrap();
        let pts: Vec<RatFunc> = rep.points.iter().map(|p| p.x.clone()).collect();
        if let Some(prev) = prev {
            assert!(prev.iter().all(|x| pts.contains(x)));
        }
        assert_eq!(rep.history.len(), bound);
        prev = Some(pts);
    }
}

#[test]
fn rank_two_frobenius_determinant_is_the_place() {
    // leading coefficient 1 in characteristic 2: det Frob_v = π_v mod a
    let d = rational(2, &[&[0, 1], &[1], &[1]]);
    let ring = d.a_ring();
    let pf = PrimeField::new(2).unwrap();
    for a in [ring.from_ints(&[0, 1]), ring.from_ints(&[1, 1]), ring.from_ints(&[1, 1, 1])] {
        let q = QuotientRing::new(pf, a.clone());
        let batch = sample_frobenii(&d, &a, 6, BasisChoice::Least).unwrap();
        assert!(!batch.samples.is_empty());
        for s in &batch.samples {
            assert_eq!(s.det, q.reduce(&s.place), "place {:?}", s.place);
        }
    }
}
