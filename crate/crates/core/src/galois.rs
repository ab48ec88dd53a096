//! Frobenius sampling over `K = F_q(θ)` and classification of the finite-level
//! image `Γ_a ⊂ GL_r(A/(a))`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::cache;
use crate::algebra::matrix::MatrixRing;
use crate::algebra::{Matrix, Poly, QuotientRing, Ring};
use crate::drinfeld::{BaseField, DrinfeldModule};
use crate::funcfield::{places_up_to, Place, RatFuncField};
use crate::error::{Error, Result};
use crate::torsion::{torsion_space_with, BasisChoice, TorsionOptions};

/// Default cap for [`group_closure`].
pub const CLOSURE_CAP: usize = 10_000_000;
/// Largest `|GL_r(A/(a))|` for which the subgroup lattice is enumerated.
pub const LATTICE_GROUP_CAP: usize = 100_000;
/// Largest number of subgroups the lattice enumeration keeps.
pub const LATTICE_SIZE_CAP: usize = 10_000;

/// Conjugacy-invariant data of a matrix: characteristic polynomial
/// coefficients (in `A/(a)` coordinates, ascending) and order.
pub type ClassKey = (Vec<Vec<u64>>, u64);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusSample {
    pub place: Poly<u64>,
    pub place_degree: usize,
    pub level: Poly<u64>,
    pub matrix: Matrix<Poly<u64>>,
    pub char_poly: Vec<Poly<u64>>,
    pub det: Poly<u64>,
    pub order: u64,
}

impl FrobeniusSample {
    pub fn class_key(&self, q: &QuotientRing) -> ClassKey {
        (self.char_poly.iter().map(|c| q.to_coords(c)).collect(), self.order)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub place: Poly<u64>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub samples: Vec<FrobeniusSample>,
    pub skipped: Vec<SkipRecord>,
}

/// Invariants of a matrix in `GL_r(A/(a))`.
pub fn describe(q: &QuotientRing, m: &Matrix<Poly<u64>>) -> (Vec<Poly<u64>>, Poly<u64>, u64) {
    let mring = MatrixRing::new(q.clone(), m.rows());
    let cp = mring.charpoly(m).into_coeffs();
    let det = mring.det(m);
    let order = mring.order(m, CLOSURE_CAP as u64).expect("matrix order within cap");
    (cp, det, order)
}

/// One Frobenius sample at `v`, or the reason the place is skipped.
pub fn sample_at(
    d: &DrinfeldModule<RatFuncField>,
    a: &Poly<u64>,
    v: &Place,
    choice: BasisChoice,
) -> std::result::Result<FrobeniusSample, String> {
    let reduced = d
        .reduce_at(v)
        .map_err(|e| format!("bad reduction: {e}"))?;
    reduced
        .check_level(a)
        .map_err(|_| "level meets the residue characteristic".to_string())?;
    let opts = TorsionOptions {
        choice,
        ambient_degree: None,
    };
    let t = torsion_space_with(&reduced, a, &opts).map_err(|e| e.to_string())?;
    let matrix = t.frobenius_matrix().map_err(|e| e.to_string())?;
    let (char_poly, det, order) = describe(t.quotient(), &matrix);
    Ok(FrobeniusSample {
        place: v.pi().clone(),
        place_degree: v.degree(),
        level: t.level().clone(),
        matrix,
        char_poly,
        det,
        order,
    })
}

/// Frobenius matrices at every good place of degree `<= bound` whose residue
/// characteristic is prime to `a`, in place order.
pub fn sample_frobenii(
    d: &DrinfeldModule<RatFuncField>,
    a: &Poly<u64>,
    bound: usize,
    choice: BasisChoice,
) -> Result<SampleBatch> {
    d.check_level(a)?;
    let a = d.a_ring().monic(a);
    let places = places_up_to(d.field().prime_field(), bound);
    let results: Vec<_> = places
        .par_iter()
        .map(|v| (v.pi().clone(), sample_at(d, &a, v, choice)))
        .collect();
    let mut batch = SampleBatch::default();
    for (place, r) in results {
        match r {
            Ok(s) => batch.samples.push(s),
            Err(reason) => batch.skipped.push(SkipRecord { place, reason }),
        }
    }
    Ok(batch)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Closure {
    Complete { order: usize, elements: Vec<Matrix<Poly<u64>>> },
    Overflow { cap: usize },
}

impl Closure {
    pub fn order(&self) -> Option<usize> {
        match self {
            Closure::Complete { order, .. } => Some(*order),
            Closure::Overflow { .. } => None,
        }
    }
}

/// The subgroup generated by invertible matrices, by breadth-first closure.
pub fn group_closure(q: &QuotientRing, r: usize, gens: &[Matrix<Poly<u64>>], cap: usize) -> Closure {
    let mring = MatrixRing::new(q.clone(), r);
    let id = mring.identity();
    let mut seen: BTreeSet<Matrix<Poly<u64>>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = mring.mul(&x, g);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return Closure::Overflow { cap };
                }
                queue.push_back(y);
            }
        }
    }
    Closure::Complete {
        order: seen.len(),
        elements: seen.into_iter().collect(),
    }
}

/// Compact description of one subgroup of `GL_r(A/(a))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupInfo {
    pub order: usize,
    /// Indices into [`Lattice::classes`] of the classes the subgroup meets.
    pub classes: Vec<usize>,
    pub contains_sl: bool,
}

/// All subgroups of `GL_r(A/(a))` (not reduced modulo conjugacy), summarized
/// by the conjugacy-invariant classes they meet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub group_order: usize,
    pub classes: Vec<ClassKey>,
    pub subgroups: Vec<SubgroupInfo>,
}

#[derive(Serialize)]
struct LatticeKey {
    q: u64,
    r: usize,
    modulus: Vec<u64>,
}

/// Elements of `GL_r(A/(a))` in a fixed order, or `None` above the cap.
fn general_linear(q: &QuotientRing, r: usize) -> Option<Vec<Matrix<Poly<u64>>>> {
    let elems = q.elements();
    let total = (elems.len() as u128).checked_pow((r * r) as u32)?;
    if total > 50 * LATTICE_GROUP_CAP as u128 {
        return None;
    }
    let mring = MatrixRing::new(q.clone(), r);
    let mut out = Vec::new();
    for mut i in 0..total as usize {
        let entries: Vec<Poly<u64>> = (0..r * r)
            .map(|_| {
                let e = elems[i % elems.len()].clone();
                i /= elems.len();
                e
            })
            .collect();
        let m = Matrix::from_rows(entries.chunks(r).map(|c| c.to_vec()).collect());
        if q.inv(&mring.det(&m)).is_some() {
            out.push(m);
        }
    }
    (out.len() <= LATTICE_GROUP_CAP).then_some(out)
}

fn compute_lattice(q: &QuotientRing, r: usize) -> Option<Lattice> {
    let g = general_linear(q, r)?;
    let n = g.len();
    let mring = MatrixRing::new(q.clone(), r);
    let index: HashMap<&Matrix<Poly<u64>>, usize> = g.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mul = |a: usize, b: usize| index[&mring.mul(&g[a], &g[b])];
    let id = index[&mring.identity()];

    let mut class_ids: BTreeMap<ClassKey, usize> = BTreeMap::new();
    let mut elem_class = Vec::with_capacity(n);
    for m in &g {
        let (cp, _, ord) = describe(q, m);
        let key = (cp.iter().map(|c| q.to_coords(c)).collect(), ord);
        let next = class_ids.len();
        elem_class.push(*class_ids.entry(key).or_insert(next));
    }
    let sl: Vec<usize> = (0..n).filter(|&i| q.is_one(&mring.det(&g[i]))).collect();

    let words = n.div_ceil(64);
    let closure = |gens: &[usize]| -> Vec<u64> {
        let mut bits = vec![0u64; words];
        let mut queue = vec![id];
        bits[id / 64] |= 1 << (id % 64);
        while let Some(x) = queue.pop() {
            for &s in gens {
                let y = mul(x, s);
                if bits[y / 64] & (1 << (y % 64)) == 0 {
                    bits[y / 64] |= 1 << (y % 64);
                    queue.push(y);
                }
            }
        }
        bits
    };
    let has = |bits: &[u64], i: usize| bits[i / 64] & (1 << (i % 64)) != 0;

    // cyclic subgroups, then joins until nothing new appears
    let mut found: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    let mut cyclic: Vec<(Vec<u64>, usize)> = Vec::new();
    for i in 0..n {
        let bits = closure(&[i]);
        if !found.contains_key(&bits) {
            found.insert(bits.clone(), vec![i]);
            cyclic.push((bits, i));
        }
    }
    let mut frontier: Vec<Vec<u64>> = cyclic.iter().map(|(b, _)| b.clone()).collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in &frontier {
            let gens = found[h].clone();
            for (_, gi) in &cyclic {
                if has(h, *gi) {
                    continue;
                }
                let mut js = gens.clone();
                js.push(*gi);
                let j = closure(&js);
                if !found.contains_key(&j) {
                    found.insert(j.clone(), js);
                    next.push(j);
                    if found.len() > LATTICE_SIZE_CAP {
                        return None;
                    }
                }
            }
        }
        frontier = next;
    }
    let mut classes: Vec<ClassKey> = vec![Default::default(); class_ids.len()];
    for (k, v) in class_ids {
        classes[v] = k;
    }
    let mut subgroups: Vec<SubgroupInfo> = found
        .keys()
        .map(|bits| {
            let members: Vec<usize> = (0..n).filter(|&i| has(bits, i)).collect();
            let cls: BTreeSet<usize> = members.iter().map(|&i| elem_class[i]).collect();
            SubgroupInfo {
                order: members.len(),
                classes: cls.into_iter().collect(),
                contains_sl: sl.iter().all(|&i| has(bits, i)),
            }
        })
        .collect();
    subgroups.sort_by(|a, b| (a.order, &a.classes).cmp(&(b.order, &b.classes)));
    Some(Lattice {
        group_order: n,
        classes,
        subgroups,
    })
}

/// The subgroup lattice of `GL_r(A/(a))`, cached per `(q, r, a)`.
pub fn subgroup_lattice(q: &QuotientRing, r: usize) -> Option<Lattice> {
    let key = LatticeKey {
        q: q.field().p(),
        r,
        modulus: q.modulus().coeffs().to_vec(),
    };
    cache::global().get_or_compute(
        "subgroup-lattice",
        &key,
        |l: &Option<Lattice>| {
            l.as_ref().map_or(true, |l| {
                l.subgroups.last().map(|s| s.order) == Some(l.group_order)
                    && l.subgroups.iter().all(|s| l.group_order % s.order == 0)
            })
        },
        || compute_lattice(q, r),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Full,
    /// The image contains `SL_r`; `index_bound` bounds `[GL_r : image]`.
    ContainsSl { index_bound: usize },
    CyclicScalar,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub justification: String,
    /// The subgroup of `(A/(a))^×` generated by the sampled determinants.
    pub det_subgroup: Vec<Poly<u64>>,
    pub observed: Vec<ClassKey>,
    /// Order of the group generated by the raw matrices (informational only).
    pub raw_closure_order: Option<usize>,
    /// Fraction of samples with determinant 1.
    pub det_one_fraction: f64,
}

fn unit_group(q: &QuotientRing) -> Vec<Poly<u64>> {
    q.elements().into_iter().filter(|x| q.inv(x).is_some()).collect()
}

fn scalar_closure(q: &QuotientRing, gens: &[Poly<u64>]) -> BTreeSet<Vec<u64>> {
    let mut seen = BTreeSet::new();
    let mut queue = vec![q.one()];
    seen.insert(q.to_coords(&q.one()));
    while let Some(x) = queue.pop() {
        for g in gens {
            let y = q.mul(&x, g);
            if seen.insert(q.to_coords(&y)) {
                queue.push(y);
            }
        }
    }
    seen
}

/// Sound finite-level verdict from conjugacy-invariant evidence.
pub fn classify_image(samples: &[FrobeniusSample], q: &QuotientRing, r: usize) -> Result<Classification> {
    if samples.is_empty() {
        return Err(Error::Domain("classification needs at least one sample".into()));
    }
    let dets: Vec<Poly<u64>> = samples.iter().map(|s| s.det.clone()).collect();
    let det_set = scalar_closure(q, &dets);
    let det_subgroup: Vec<Poly<u64>> = det_set.iter().map(|c| q.from_coords(c)).collect();
    let observed: Vec<ClassKey> = samples
        .iter()
        .map(|s| s.class_key(q))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mats: Vec<Matrix<Poly<u64>>> = samples.iter().map(|s| s.matrix.clone()).collect();
    let raw_closure_order = group_closure(q, r, &mats, CLOSURE_CAP).order();
    let det_one_fraction =
        samples.iter().filter(|s| q.is_one(&s.det)).count() as f64 / samples.len() as f64;
    let units = unit_group(q).len();
    let mring = MatrixRing::new(q.clone(), r);

    let (verdict, justification) = if r == 1 {
        let image = scalar_closure(q, &samples.iter().map(|s| s.matrix.get(0, 0).clone()).collect::<Vec<_>>());
        if image.len() == units {
            (Verdict::Full, format!("sampled scalars generate all {units} units of A/(a)"))
        } else {
            (
                Verdict::ContainsSl {
                    index_bound: units / image.len(),
                },
                format!("sampled scalars generate {} of {units} units", image.len()),
            )
        }
    } else if samples.iter().all(|s| mring.is_scalar(&s.matrix)) {
        (
            Verdict::CyclicScalar,
            format!("all {} samples are scalar matrices", samples.len()),
        )
    } else {
        match subgroup_lattice(q, r) {
            None => (
                Verdict::Inconclusive,
                "GL_r(A/(a)) is too large for subgroup-lattice enumeration".to_string(),
            ),
            Some(lat) => {
                let wanted: Vec<usize> = observed
                    .iter()
                    .map(|k| lat.classes.iter().position(|c| c == k).expect("observed class occurs in GL"))
                    .collect();
                let candidates: Vec<&SubgroupInfo> = lat
                    .subgroups
                    .iter()
                    .filter(|s| wanted.iter().all(|w| s.classes.binary_search(w).is_ok()))
                    .collect();
                let n_sub = lat.subgroups.len();
                if candidates.iter().all(|s| s.order == lat.group_order) {
                    (
                        Verdict::Full,
                        format!(
                            "of {n_sub} subgroups of GL_{r}(A/(a)) (order {}), only the whole group meets all {} observed (char_poly, order) classes",
                            lat.group_order,
                            observed.len()
                        ),
                    )
                } else if candidates.iter().all(|s| s.contains_sl) {
                    let smallest = candidates.iter().map(|s| s.order).min().unwrap();
                    (
                        Verdict::ContainsSl {
                            index_bound: lat.group_order / smallest,
                        },
                        format!(
                            "every subgroup meeting the observed classes contains SL_{r}; smallest has order {smallest}"
                        ),
                    )
                } else {
                    (
                        Verdict::Inconclusive,
                        format!(
                            "{} proper subgroups meet all observed classes",
                            candidates.iter().filter(|s| s.order < lat.group_order).count()
                        ),
                    )
                }
            }
        }
    };
    Ok(Classification {
        verdict,
        justification,
        det_subgroup,
        observed,
        raw_closure_order,
        det_one_fraction,
    })
}

/// Sampling plus classification at one level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImageReport {
    pub module: serde_json::Value,
    pub level: Poly<u64>,
    pub bound: usize,
    pub samples: usize,
    pub skipped: Vec<SkipRecord>,
    pub classification: Option<Classification>,
}

pub fn image_report(d: &DrinfeldModule<RatFuncField>, a: &Poly<u64>, bound: usize) -> Result<ImageReport> {
    let batch = sample_frobenii(d, a, bound, BasisChoice::Least)?;
    let a = d.a_ring().monic(a);
    let q = QuotientRing::new(d.field().prime_field(), a.clone());
    let classification = if batch.samples.is_empty() {
        None
    } else {
        Some(classify_image(&batch.samples, &q, d.rank())?)
    };
    Ok(ImageReport {
        module: d.to_json(),
        level: a,
        bound,
        samples: batch.samples.len(),
        skipped: batch.skipped,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PolyRing, PrimeField, Var};

    fn carlitz(p: u64) -> DrinfeldModule<RatFuncField> {
        let k = RatFuncField::new(PrimeField::new(p).unwrap());
        DrinfeldModule::new(k.clone(), vec![k.theta(), k.one()]).unwrap()
    }

    #[test]
    fn carlitz_level_t_samples_are_one() {
        let d = carlitz(2);
        let ring = d.a_ring();
        let batch = sample_frobenii(&d, &ring.gen(), 3, BasisChoice::Least).unwrap();
        assert!(!batch.samples.is_empty());
        for s in &batch.samples {
            assert_eq!(s.matrix.get(0, 0), &ring.one());
        }
        // θ itself has residue characteristic t
        assert_eq!(batch.skipped.len(), 1);
    }

    #[test]
    fn carlitz_reciprocity_level_t2_t_1() {
        let d = carlitz(2);
        let ring = d.a_ring();
        let a = ring.from_ints(&[1, 1, 1]);
        let batch = sample_frobenii(&d, &a, 4, BasisChoice::Least).unwrap();
        for s in &batch.samples {
            assert_eq!(s.matrix.get(0, 0), &ring.rem(&s.place, &a));
        }
        let q = QuotientRing::new(PrimeField::new(2).unwrap(), a);
        let c = classify_image(&batch.samples, &q, 1).unwrap();
        assert_eq!(c.verdict, Verdict::Full);
    }

    #[test]
    fn closure_orders() {
        let f = PrimeField::new(2).unwrap();
        let ring = PolyRing::new(f, Var::T);
        let q = QuotientRing::new(f, ring.gen());
        let o = ring.one();
        let z = ring.zero();
        let id = Matrix::from_rows(vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()]]);
        assert_eq!(group_closure(&q, 2, &[id], 100).order(), Some(1));
        let a = Matrix::from_rows(vec![vec![o.clone(), o.clone()], vec![z.clone(), o.clone()]]);
        let b = Matrix::from_rows(vec![vec![z.clone(), o.clone()], vec![o.clone(), o.clone()]]);
        assert_eq!(group_closure(&q, 2, &[a.clone()], 100).order(), Some(2));
        assert_eq!(group_closure(&q, 2, &[a.clone(), b.clone()], 100).order(), Some(6));
        assert_eq!(group_closure(&q, 2, &[a, b], 3), Closure::Overflow { cap: 3 });
    }

    #[test]
    fn gl2_f2_lattice() {
        let f = PrimeField::new(2).unwrap();
        let ring = PolyRing::new(f, Var::T);
        let q = QuotientRing::new(f, ring.gen());
        let lat = compute_lattice(&q, 2).unwrap();
        assert_eq!(lat.group_order, 6);
        // S_3: trivial, three of order 2, one of order 3, whole group
        let orders: Vec<usize> = lat.subgroups.iter().map(|s| s.order).collect();
        assert_eq!(orders, vec![1, 2, 2, 2, 3, 6]);
    }
}
