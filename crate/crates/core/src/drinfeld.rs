//! Drinfeld `F_q[t]`-modules `φ: A -> L{τ}` given by `φ_t`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::fq_matrix::RowSpace;
use crate::algebra::{
    Field, FiniteField, FiniteFieldLike, FqMatrix, FrobeniusField, Poly, PolyRing, PrimeField, Ring, Var,
};
use crate::error::{Error, Result};
use crate::funcfield::{Place, RatFunc, RatFuncField};
use crate::ore::{OrePoly, OreRing};

/// Characteristic of a Drinfeld module: the kernel of `a -> dφ_a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Characteristic {
    Generic,
    /// Monic irreducible generator `p0` of the kernel.
    Special(Poly<u64>),
}

impl Characteristic {
    /// `true` when `a` is prime to the characteristic (always, for generic).
    pub fn is_prime_to(&self, ring: &PolyRing<PrimeField>, a: &Poly<u64>) -> bool {
        match self {
            Characteristic::Generic => true,
            Characteristic::Special(p0) => !ring.divides(p0, a),
        }
    }
}

/// Coefficient fields over which Drinfeld modules are handled.
pub trait BaseField: FrobeniusField {
    fn prime_field(&self) -> PrimeField;

    /// Characteristic of a module with `γ = gamma`.
    fn characteristic_of(&self, gamma: &Self::Elem) -> Characteristic;

    /// An `F_q`-spanning family for unknown coefficients in homomorphism
    /// searches; `theta_degree` bounds θ-degrees over `F_q(θ)`.
    fn window_basis(&self, theta_degree: usize) -> Vec<Self::Elem>;

    /// Flattens columns of coefficient lists to `F_q`-coordinate vectors,
    /// compatibly with `F_q`-linear combinations of the columns.
    fn flatten(&self, cols: &[Vec<Self::Elem>]) -> Vec<Vec<u64>>;

    fn spec(&self) -> serde_json::Value;

    fn elem_json(&self, a: &Self::Elem) -> serde_json::Value;

    fn display_elem(&self, a: &Self::Elem) -> String;
}

impl BaseField for FiniteField {
    fn prime_field(&self) -> PrimeField {
        self.base()
    }

    fn characteristic_of(&self, gamma: &Self::Elem) -> Characteristic {
        Characteristic::Special(self.minimal_polynomial(gamma))
    }

    fn window_basis(&self, _theta_degree: usize) -> Vec<Self::Elem> {
        (0..self.degree())
            .map(|i| {
                let mut v = vec![0; self.degree()];
                v[i] = 1;
                v
            })
            .collect()
    }

    fn flatten(&self, cols: &[Vec<Self::Elem>]) -> Vec<Vec<u64>> {
        cols.iter().map(|c| c.iter().flatten().copied().collect()).collect()
    }

    fn spec(&self) -> serde_json::Value {
        json!({"degree": self.degree(), "modulus": self.modulus()})
    }

    fn elem_json(&self, a: &Self::Elem) -> serde_json::Value {
        json!(a)
    }

    fn display_elem(&self, a: &Self::Elem) -> String {
        self.display(a)
    }
}

impl BaseField for RatFuncField {
    fn prime_field(&self) -> PrimeField {
        self.base()
    }

    fn characteristic_of(&self, gamma: &RatFunc) -> Characteristic {
        if self.is_constant(gamma) {
            let c = self.poly_ring().coeff_or_zero(&gamma.num, 0);
            let b = self.base();
            Characteristic::Special(PolyRing::new(b, Var::T).poly(vec![b.neg(&c), 1]))
        } else {
            // every nonconstant element of F_q(θ) is transcendental over F_q
            Characteristic::Generic
        }
    }

    fn window_basis(&self, theta_degree: usize) -> Vec<RatFunc> {
        let r = self.poly_ring();
        (0..=theta_degree)
            .map(|e| self.from_poly(r.monomial(1, e)))
            .collect()
    }

    fn flatten(&self, cols: &[Vec<RatFunc>]) -> Vec<Vec<u64>> {
        let r = self.poly_ring();
        let len = cols.first().map_or(0, |c| c.len());
        let mut out = vec![Vec::new(); cols.len()];
        for pos in 0..len {
            let mut l = r.one();
            for c in cols {
                let g = r.gcd(&l, &c[pos].den);
                l = r.div_exact(&r.mul(&l, &c[pos].den), &g).unwrap();
            }
            let nums: Vec<Poly<u64>> = cols
                .iter()
                .map(|c| r.mul(&c[pos].num, &r.div_exact(&l, &c[pos].den).unwrap()))
                .collect();
            let width = nums.iter().filter_map(|n| n.degree()).max().map_or(0, |d| d + 1);
            for (o, n) in out.iter_mut().zip(&nums) {
                o.extend((0..width).map(|i| r.coeff_or_zero(n, i)));
            }
        }
        out
    }

    fn spec(&self) -> serde_json::Value {
        json!("rational")
    }

    fn elem_json(&self, a: &RatFunc) -> serde_json::Value {
        json!({"num": a.num, "den": a.den})
    }

    fn display_elem(&self, a: &RatFunc) -> String {
        self.display(a)
    }
}

/// A Drinfeld `F_q[t]`-module over `field`, determined by `φ_t`.
#[derive(Clone, Debug)]
pub struct DrinfeldModule<F: BaseField> {
    ore: OreRing<F>,
    phi_t: OrePoly<F::Elem>,
}

impl<F: BaseField> DrinfeldModule<F> {
    /// Requires `deg_τ φ_t >= 1`.
    pub fn new(field: F, phi_t: Vec<F::Elem>) -> Result<Self> {
        let ore = OreRing::new(field);
        let phi_t = ore.poly(phi_t);
        if phi_t.degree().unwrap_or(0) < 1 {
            return Err(Error::Domain("φ_t must have positive τ-degree".into()));
        }
        Ok(Self { ore, phi_t })
    }

    pub fn field(&self) -> &F {
        self.ore.field()
    }

    pub fn ore(&self) -> &OreRing<F> {
        &self.ore
    }

    pub fn q(&self) -> u64 {
        self.field().prime_field().p()
    }

    pub fn phi_t(&self) -> &OrePoly<F::Elem> {
        &self.phi_t
    }

    pub fn rank(&self) -> usize {
        self.phi_t.degree().unwrap()
    }

    pub fn gamma(&self) -> F::Elem {
        self.ore.constant_term(&self.phi_t)
    }

    /// `F_q[t]`.
    pub fn a_ring(&self) -> PolyRing<PrimeField> {
        PolyRing::new(self.field().prime_field(), Var::T)
    }

    /// `φ_a` by Horner's rule in `L{τ}`.
    pub fn phi(&self, a: &Poly<u64>) -> OrePoly<F::Elem> {
        let k = self.field();
        let mut acc = self.ore.zero();
        for c in a.coeffs().iter().rev() {
            acc = self.ore.mul(&acc, &self.phi_t);
            acc = self.ore.add(&acc, &self.ore.constant(k.from_int(*c as i64)));
        }
        acc
    }

    /// `φ_a(x)`.
    pub fn act(&self, a: &Poly<u64>, x: &F::Elem) -> F::Elem {
        self.ore.evaluate(&self.phi(a), x)
    }

    pub fn characteristic(&self) -> Characteristic {
        self.field().characteristic_of(&self.gamma())
    }

    /// The level `a` is usable (étale torsion) iff it is prime to the characteristic.
    pub fn check_level(&self, a: &Poly<u64>) -> Result<()> {
        if a.degree().unwrap_or(0) < 1 {
            return Err(Error::Domain("level must be a nonconstant polynomial".into()));
        }
        if !self.characteristic().is_prime_to(&self.a_ring(), a) {
            return Err(Error::Domain(format!(
                "level {} meets characteristic",
                self.a_ring().display(a)
            )));
        }
        Ok(())
    }

    /// The restriction `ψ = φ|F_q[u]` along `u -> b(t)`: `ψ_u = φ_b`, rank `r deg b`.
    pub fn restrict(&self, b: &Poly<u64>) -> Result<Restriction<F>> {
        if b.degree().unwrap_or(0) < 1 {
            return Err(Error::Domain("restriction needs a nonconstant b".into()));
        }
        let psi = DrinfeldModule {
            ore: self.ore.clone(),
            phi_t: self.phi(b),
        };
        Ok(Restriction { b: b.clone(), psi })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let k = self.field();
        json!({
            "q": self.q(),
            "base": k.spec(),
            "phi_t": self.phi_t.coeffs().iter().map(|c| k.elem_json(c)).collect::<Vec<_>>(),
        })
    }

    pub fn display(&self) -> String {
        let k = self.field();
        let mut terms = Vec::new();
        for (i, c) in self.phi_t.coeffs().iter().enumerate() {
            if k.is_zero(c) {
                continue;
            }
            let cs = k.display_elem(c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            terms.push(match i {
                0 => cs,
                1 if k.is_one(c) => "τ".to_string(),
                1 => format!("{cs}τ"),
                _ if k.is_one(c) => format!("τ^{i}"),
                _ => format!("{cs}τ^{i}"),
            });
        }
        terms.join(" + ")
    }
}

/// Result of restricting to a subring `B = F_q[u]`, `u -> b`.
#[derive(Clone, Debug)]
pub struct Restriction<F: BaseField> {
    pub b: Poly<u64>,
    /// The restricted module, with `φ_t` playing the role of `ψ_u`.
    pub psi: DrinfeldModule<F>,
}

impl<F: BaseField> Restriction<F> {
    pub fn rank(&self) -> usize {
        self.psi.rank()
    }

    /// `q0`, the characteristic of `ψ` as a `B`-module (variable `u`).
    pub fn characteristic(&self) -> Characteristic {
        self.psi.characteristic()
    }
}

impl DrinfeldModule<RatFuncField> {
    /// Reduction at a place of good reduction.
    pub fn reduce_at(&self, v: &Place) -> Result<DrinfeldModule<FiniteField>> {
        let coeffs = self
            .phi_t
            .coeffs()
            .iter()
            .map(|c| v.reduce(c))
            .collect::<Result<Vec<_>>>()?;
        let k = v.residue_field().clone();
        if k.is_zero(coeffs.last().unwrap()) {
            return Err(Error::BadReduction(format!(
                "leading coefficient vanishes at place {}",
                v.display()
            )));
        }
        DrinfeldModule::new(k, coeffs)
    }

    /// Places of bad reduction are exactly those dividing a denominator or
    /// the numerator of the leading coefficient.
    pub fn has_good_reduction(&self, v: &Place) -> bool {
        let r = self.field().poly_ring();
        let lead = self.phi_t.lead().unwrap();
        !r.divides(v.pi(), &lead.num)
            && self.phi_t.coeffs().iter().all(|c| !r.divides(v.pi(), &c.den))
    }

    /// Isotriviality by the twist criterion on pairs of nonzero coefficients
    /// (index 0 included).
    pub fn is_isotrivial(&self) -> Isotriviality {
        let k = self.field();
        if self.phi_t.coeffs().iter().all(|c| k.is_constant(c)) {
            return Isotriviality::Yes;
        }
        let q = self.q();
        let idx: Vec<usize> = (0..=self.rank())
            .filter(|i| !k.is_zero(&self.phi_t.coeffs()[*i]))
            .collect();
        for (x, &i) in idx.iter().enumerate() {
            for &j in &idx[x + 1..] {
                let Some(ej) = q.checked_pow(j as u32).filter(|e| *e < 1 << 20) else {
                    return Isotriviality::Unknown;
                };
                let ei = q.pow(i as u32);
                let c = self.phi_t.coeffs();
                let num = k.pow(&c[i], ej - 1);
                let den = k.pow(&c[j], ei - 1);
                let ratio = k.div(&num, &den).unwrap();
                if !k.is_constant(&ratio) {
                    return Isotriviality::No;
                }
            }
        }
        Isotriviality::Yes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Isotriviality {
    Yes,
    No,
    Unknown,
}

/// An `F_q`-basis of `{u : deg_τ u <= max_degree, u φ_t = φ'_t u}` with
/// coefficients drawn from `window_basis(theta_degree)`.
pub fn hom_space<F: BaseField>(
    d: &DrinfeldModule<F>,
    d2: &DrinfeldModule<F>,
    max_degree: usize,
    theta_degree: usize,
) -> Vec<OrePoly<F::Elem>> {
    let ore = d.ore();
    let k = d.field();
    let window = k.window_basis(theta_degree);
    let len = max_degree + d.rank().max(d2.rank()) + 1;
    let mut unknowns = Vec::new();
    let mut images = Vec::new();
    for i in 0..=max_degree {
        for w in &window {
            let u = ore.monomial(w.clone(), i);
            let l = ore.sub(&ore.mul(&u, d.phi_t()), &ore.mul(d2.phi_t(), &u));
            images.push((0..len).map(|j| ore.coeff(&l, j)).collect::<Vec<_>>());
            unknowns.push(u);
        }
    }
    let cols = k.flatten(&images);
    let rows = cols.first().map_or(0, |c| c.len());
    let m = FqMatrix::from_columns(k.prime_field(), rows, &cols);
    m.kernel()
        .into_iter()
        .map(|v| {
            v.iter().zip(&unknowns).fold(ore.zero(), |acc, (c, u)| {
                if *c == 0 {
                    acc
                } else {
                    ore.add(&acc, &ore.scale_left(&k.from_int(*c as i64), u))
                }
            })
        })
        .collect()
}

/// Dimension of the span of `{φ_a}` inside a hom-space window, used to
/// report whether the window contains endomorphisms beyond `A`.
pub fn scalar_dimension<F: BaseField>(
    d: &DrinfeldModule<F>,
    basis: &[OrePoly<F::Elem>],
    max_degree: usize,
) -> usize {
    let ore = d.ore();
    let k = d.field();
    let len = max_degree + 1;
    let mut polys: Vec<Vec<F::Elem>> = basis
        .iter()
        .map(|u| (0..len).map(|j| ore.coeff(u, j)).collect())
        .collect();
    let n = polys.len();
    let a = d.a_ring();
    let mut j = 0;
    while d.rank() * j <= max_degree {
        let p = d.phi(&a.monomial(1, j));
        polys.push((0..len).map(|i| ore.coeff(&p, i)).collect());
        j += 1;
    }
    let flat = k.flatten(&polys);
    let mut window = RowSpace::new(k.prime_field(), flat[0].len());
    for v in &flat[..n] {
        window.insert(v);
    }
    let mut scalars = RowSpace::new(k.prime_field(), flat[0].len());
    for v in &flat[n..] {
        if window.contains(v) {
            scalars.insert(v);
        }
    }
    scalars.rank()
}

/// `f: φ -> φ'` with `f φ_t = φ'_t f`.
#[derive(Clone, Debug)]
pub struct Isogeny<F: BaseField> {
    pub f: OrePoly<F::Elem>,
    pub source: DrinfeldModule<F>,
    pub target: DrinfeldModule<F>,
}

impl<F: BaseField> Isogeny<F> {
    pub fn new(f: OrePoly<F::Elem>, source: DrinfeldModule<F>, target: DrinfeldModule<F>) -> Result<Self> {
        let ore = source.ore();
        if f.is_zero() {
            return Err(Error::Domain("isogeny must be nonzero".into()));
        }
        if ore.mul(&f, source.phi_t()) != ore.mul(target.phi_t(), &f) {
            return Err(Error::Domain("f φ_t != φ'_t f: not an isogeny".into()));
        }
        Ok(Self { f, source, target })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carlitz2() -> DrinfeldModule<RatFuncField> {
        let k = RatFuncField::new(PrimeField::new(2).unwrap());
        DrinfeldModule::new(k.clone(), vec![k.theta(), k.one()]).unwrap()
    }

    #[test]
    fn phi_t_squared() {
        let d = carlitz2();
        let k = d.field().clone();
        let a = d.a_ring();
        let th = k.theta();
        let th2 = k.mul(&th, &th);
        let p = d.phi(&a.from_ints(&[0, 0, 1]));
        assert_eq!(p, d.ore().poly(vec![th2, k.add(&th, &k.mul(&th, &th)), k.one()]));
        assert_eq!(d.phi(&a.one()), d.ore().one());
        let t = a.gen();
        let t1 = a.from_ints(&[1, 1]);
        assert_eq!(d.phi(&a.mul(&t, &t1)), d.ore().mul(&d.phi(&t), &d.phi(&t1)));
    }

    #[test]
    fn characteristics() {
        let d = carlitz2();
        assert_eq!(d.characteristic(), Characteristic::Generic);
        let f2 = FiniteField::standard(2, 1).unwrap();
        let s = DrinfeldModule::new(f2.clone(), vec![f2.one(), f2.one()]).unwrap();
        assert_eq!(s.characteristic(), Characteristic::Special(s.a_ring().from_ints(&[1, 1])));
        let v = Place::new(PrimeField::new(2).unwrap(), d.field().poly_ring().from_ints(&[1, 1, 1])).unwrap();
        let red = d.reduce_at(&v).unwrap();
        assert_eq!(red.characteristic(), Characteristic::Special(s.a_ring().from_ints(&[1, 1, 1])));
    }

    #[test]
    fn reduction_examples() {
        let d = carlitz2();
        let k = d.field().clone();
        let b = k.base();
        let v1 = Place::new(b, k.poly_ring().from_ints(&[1, 1])).unwrap();
        let red = d.reduce_at(&v1).unwrap();
        assert_eq!(red.phi_t().coeffs(), &[vec![1], vec![1]]);
        let bad = DrinfeldModule::new(k.clone(), vec![k.theta(), k.one(), k.inv(&k.theta()).unwrap()]).unwrap();
        let v0 = Place::new(b, k.poly_ring().from_ints(&[0, 1])).unwrap();
        assert!(matches!(bad.reduce_at(&v0), Err(Error::BadReduction(_))));
        assert!(!bad.has_good_reduction(&v0));
        let r2 = DrinfeldModule::new(k.clone(), vec![k.theta(), k.one(), k.one()]).unwrap();
        for v in crate::funcfield::places_up_to(b, 3) {
            assert_eq!(r2.reduce_at(&v).unwrap().rank(), 2);
        }
    }

    #[test]
    fn restriction() {
        let d = carlitz2();
        let a = d.a_ring();
        let res = d.restrict(&a.from_ints(&[0, 0, 1])).unwrap();
        assert_eq!(res.rank(), 2);
        assert!(d.restrict(&a.one()).is_err());
        let f2 = FiniteField::standard(2, 1).unwrap();
        let s = DrinfeldModule::new(f2.clone(), vec![f2.one(), f2.one()]).unwrap();
        let res = s.restrict(&a.from_ints(&[0, 0, 1])).unwrap();
        assert_eq!(res.characteristic(), Characteristic::Special(a.from_ints(&[1, 1])));
    }

    #[test]
    fn hom_space_examples() {
        let d = carlitz2();
        let k = d.field().clone();
        let basis = hom_space(&d, &d, 1, 1);
        assert_eq!(basis.len(), 2);
        for u in &basis {
            assert_eq!(d.ore().mul(u, d.phi_t()), d.ore().mul(d.phi_t(), u));
        }
        assert_eq!(scalar_dimension(&d, &basis, 1), 2);
        let d2 = DrinfeldModule::new(k.clone(), vec![k.theta(), k.theta()]).unwrap();
        assert!(hom_space(&d, &d2, 0, 2).is_empty());
        let f2 = FiniteField::standard(2, 1).unwrap();
        let s = DrinfeldModule::new(f2.clone(), vec![f2.one(), f2.one()]).unwrap();
        let basis = hom_space(&s, &s, 1, 0);
        assert!(basis.contains(&s.ore().tau()));
    }

    #[test]
    fn isotriviality() {
        let d = carlitz2();
        assert_eq!(d.is_isotrivial(), Isotriviality::No);
        let k = d.field().clone();
        let c = DrinfeldModule::new(k.clone(), vec![k.one(), k.one()]).unwrap();
        assert_eq!(c.is_isotrivial(), Isotriviality::Yes);
        let tw = DrinfeldModule::new(k.clone(), vec![k.zero(), k.theta(), k.one()]).unwrap();
        // a_1^(q^2-1) / a_2^(q-1) = θ^3: nonconstant
        assert_eq!(tw.is_isotrivial(), Isotriviality::No);
        let tw = DrinfeldModule::new(k.clone(), vec![k.one(), k.theta()]).unwrap();
        // ratio 1^(q-1)/θ^0 = 1 constant: a twist of 1 + τ by c^(q-1) = θ
        assert_eq!(tw.is_isotrivial(), Isotriviality::Yes);
        // γ = θ is an isomorphism invariant and is not constant
        let tw = DrinfeldModule::new(k.clone(), vec![k.theta(), k.theta()]).unwrap();
        assert_eq!(tw.is_isotrivial(), Isotriviality::No);
    }
}
