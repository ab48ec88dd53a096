//! The `a`-torsion `φ[a]` of a Drinfeld module over a finite field `k`:
//! its points in the splitting field, an `A/(a)`-basis, Frobenius matrices,
//! division points and the Kummer pairing `<δ, m> = δ(x) - x`.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::factor;
use crate::algebra::finite_field::Embedding;
use crate::algebra::fq_matrix::RowSpace;
use crate::algebra::matrix::MatrixRing;
use crate::algebra::{
    FiniteField, FiniteFieldLike, FqMatrix, FrobeniusField, GfElem, Matrix, Poly, PolyRing, PrimeField,
    QuotientRing, Ring, Var,
};
use crate::drinfeld::{DrinfeldModule, Isogeny};
use crate::error::{Error, Result};
use crate::ore::{OrePoly, OreRing};

/// Upper bound on `|φ[a]|` for anything that enumerates points.
pub const POINT_CAP: u64 = 1 << 20;

/// Tie-break for the greedy `A/(a)`-basis: scan candidate points in
/// increasing or decreasing canonical order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    #[default]
    Least,
    Greatest,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TorsionOptions {
    pub choice: BasisChoice,
    /// Absolute degree `[L : F_q]` of the ambient field; must be a multiple of
    /// the degree of the splitting field. `None` uses the splitting field.
    pub ambient_degree: Option<usize>,
}

/// `F_q`-independent vectors in `F_q^D` with a fast coordinate solver on a
/// set of pivot rows.
#[derive(Clone, Debug)]
struct Frame {
    p: PrimeField,
    vectors: Vec<GfElem>,
    pivots: Vec<usize>,
    inv: FqMatrix,
}

impl Frame {
    fn new(p: PrimeField, vectors: Vec<GfElem>) -> Self {
        if vectors.is_empty() {
            return Self {
                p,
                vectors,
                pivots: Vec::new(),
                inv: FqMatrix::zeros(p, 0, 0),
            };
        }
        let pivots = FqMatrix::from_rows(p, &vectors).echelon().pivots;
        assert_eq!(pivots.len(), vectors.len(), "frame vectors are dependent");
        let minor: Vec<Vec<u64>> = pivots
            .iter()
            .map(|&r| vectors.iter().map(|v| v[r]).collect())
            .collect();
        let inv = FqMatrix::from_rows(p, &minor).inverse().expect("pivot minor");
        Self {
            p,
            vectors,
            pivots,
            inv,
        }
    }

    fn dim(&self) -> usize {
        self.vectors.len()
    }

    fn combine(&self, c: &[u64]) -> GfElem {
        let p = self.p.p();
        let n = self.vectors.first().map_or(0, |v| v.len());
        let mut out = vec![0u64; n];
        for (ci, v) in c.iter().zip(&self.vectors) {
            if *ci == 0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o = (*o + ci * x) % p;
            }
        }
        out
    }

    /// Coordinates of `x`, or `None` if `x` is outside the span.
    fn coords(&self, x: &[u64]) -> Option<Vec<u64>> {
        if self.vectors.is_empty() {
            return x.iter().all(|c| *c == 0).then(Vec::new);
        }
        let sub: Vec<u64> = self.pivots.iter().map(|&r| x[r]).collect();
        let c = self.inv.mul_vec(&sub);
        (self.combine(&c) == x).then_some(c)
    }

    fn map(&self, f: impl Fn(&GfElem) -> GfElem) -> Frame {
        Frame::new(self.p, self.vectors.iter().map(f).collect())
    }
}

/// Data present only for étale levels.
#[derive(Clone, Debug)]
struct Etale {
    embedding: Embedding,
    phi_t: OrePoly<GfElem>,
    /// Canonical `F_q`-basis of the points (null-space basis order).
    kernel: Frame,
    basis: Vec<GfElem>,
    /// `φ_{t^j}(e_i)` at index `i * deg a + j`.
    frame: Frame,
    choice: BasisChoice,
}

/// `φ[a]` for a Drinfeld module over a finite field.
#[derive(Clone, Debug)]
pub struct TorsionModule {
    module: DrinfeldModule<FiniteField>,
    level: Poly<u64>,
    quotient: QuotientRing,
    count_exponent: usize,
    etale: Option<Etale>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn prime_power(p: PrimeField, e: usize) -> BigUint {
    BigUint::from(p.p()).pow(e as u32)
}

/// `[k(φ[a]) : k]`: the lcm of the degrees of the irreducible factors of
/// `φ_a(x)/x` over `k`. Requires an étale level.
pub fn splitting_degree(d: &DrinfeldModule<FiniteField>, a: &Poly<u64>) -> Result<usize> {
    let k = d.field().clone();
    let phi_a = d.phi(a);
    let q = d.q() as usize;
    if phi_a.coeffs().first().map_or(true, |c| k.is_zero(c)) {
        return Err(Error::Domain(format!(
            "level {} is not étale",
            d.a_ring().display(a)
        )));
    }
    let deg = phi_a.degree().unwrap();
    let top = q.pow(deg as u32) - 1;
    let mut coeffs = vec![k.zero(); top + 1];
    for (i, c) in phi_a.coeffs().iter().enumerate() {
        coeffs[q.pow(i as u32) - 1] = c.clone();
    }
    let ring = PolyRing::new(k, Var::X);
    let f = ring.poly(coeffs);
    Ok(factor::factor_degrees(&ring, &f)
        .into_iter()
        .fold(1, lcm))
}

/// The ambient field of absolute degree `deg` containing `k`: `k` itself when
/// the degrees agree, else the standard field with its canonical embedding.
pub fn ambient_field(k: &FiniteField, deg: usize) -> Result<Embedding> {
    if deg == k.degree() {
        return Ok(Embedding::identity(k));
    }
    let big = FiniteField::standard(k.base().p(), deg)?;
    big.embedding_from(k)
}

/// Matrix over `F_q` of the additive map `x -> f(x)` on `L`; column `j` is `f(x^j)`.
pub fn operator_matrix(field: &FiniteField, f: &OrePoly<GfElem>) -> FqMatrix {
    let ore = OreRing::new(field.clone());
    let n = field.degree();
    let cols: Vec<Vec<u64>> = (0..n)
        .map(|j| {
            let mut e = vec![0u64; n];
            e[j] = 1;
            ore.evaluate(f, &e)
        })
        .collect();
    FqMatrix::from_columns(field.base(), n, &cols)
}

pub fn torsion_space(d: &DrinfeldModule<FiniteField>, a: &Poly<u64>) -> Result<TorsionModule> {
    torsion_space_with(d, a, &TorsionOptions::default())
}

pub fn torsion_space_with(
    d: &DrinfeldModule<FiniteField>,
    a: &Poly<u64>,
    opts: &TorsionOptions,
) -> Result<TorsionModule> {
    let ring = d.a_ring();
    if a.degree().unwrap_or(0) < 1 {
        return Err(Error::Domain("level must be a nonconstant polynomial".into()));
    }
    let a = ring.monic(a);
    let k = d.field();
    let p = k.base();
    let r = d.rank();
    let deg_a = a.degree().unwrap();
    let quotient = QuotientRing::new(p, a.clone());
    let phi_a = d.phi(&a);
    let h = phi_a.coeffs().iter().position(|c| !k.is_zero(c)).unwrap();
    let count_exponent = r * deg_a - h;
    if h > 0 {
        return Ok(TorsionModule {
            module: d.clone(),
            level: a,
            quotient,
            count_exponent,
            etale: None,
        });
    }

    let n_split = splitting_degree(d, &a)?;
    let cap = 24 * deg_a * r;
    if n_split > cap {
        return Err(Error::BoundExceeded(format!(
            "splitting degree {n_split} exceeds cap {cap}"
        )));
    }
    let split_deg = k.degree() * n_split;
    let deg = match opts.ambient_degree {
        None => split_deg,
        Some(dd) if dd % split_deg == 0 => dd,
        Some(dd) => {
            return Err(Error::Domain(format!(
                "ambient degree {dd} is not a multiple of the splitting degree {split_deg}"
            )))
        }
    };
    if BigUint::from(p.p()).pow(count_exponent as u32) > BigUint::from(POINT_CAP) {
        return Err(Error::BoundExceeded(format!(
            "|φ[a]| = {}^{} exceeds the point cap",
            p.p(),
            count_exponent
        )));
    }
    let embedding = ambient_field(k, deg)?;
    let big = embedding.target().clone();
    let big_ore = OreRing::new(big.clone());
    let phi_a_big = d.ore().map_to(&phi_a, &big_ore, |c| embedding.apply(c));
    let phi_t_big = d.ore().map_to(d.phi_t(), &big_ore, |c| embedding.apply(c));

    let kernel = Frame::new(p, operator_matrix(&big, &phi_a_big).kernel());
    if kernel.dim() != count_exponent {
        return Err(Error::Domain(format!(
            "kernel has dimension {} in GF({}^{deg}), expected {count_exponent}",
            kernel.dim(),
            p.p()
        )));
    }
    let m = kernel.dim();
    // φ_t on kernel coordinates, column i = coords(φ_t(v_i))
    let t_cols: Vec<Vec<u64>> = kernel
        .vectors
        .iter()
        .map(|v| kernel.coords(&big_ore.evaluate(&phi_t_big, v)).expect("φ_t preserves φ[a]"))
        .collect();
    let t_mat = FqMatrix::from_columns(p, m, &t_cols);

    let mut candidates: Vec<(Vec<u64>, Vec<u64>)> = all_vectors(p.p(), m)
        .skip(1)
        .map(|c| {
            let x = kernel.combine(&c);
            let key: Vec<u64> = x.iter().rev().copied().collect();
            (key, c)
        })
        .collect();
    candidates.sort();
    if opts.choice == BasisChoice::Greatest {
        candidates.reverse();
    }
    let mut span = RowSpace::new(p, m);
    let mut chosen = Vec::new();
    for (_, c) in &candidates {
        if chosen.len() == r {
            break;
        }
        let mut trial = span.clone();
        let mut v = c.clone();
        let mut ok = true;
        for _ in 0..deg_a {
            if !trial.insert(&v) {
                ok = false;
                break;
            }
            v = t_mat.mul_vec(&v);
        }
        if ok {
            span = trial;
            chosen.push(c.clone());
        }
    }
    if chosen.len() != r {
        return Err(Error::Domain("no A/(a)-basis found".into()));
    }
    let basis: Vec<GfElem> = chosen.iter().map(|c| kernel.combine(c)).collect();
    let mut frame_vecs = Vec::with_capacity(m);
    for e in &basis {
        let mut y = e.clone();
        for _ in 0..deg_a {
            frame_vecs.push(y.clone());
            y = big_ore.evaluate(&phi_t_big, &y);
        }
    }
    let frame = Frame::new(p, frame_vecs);
    Ok(TorsionModule {
        module: d.clone(),
        level: a,
        quotient,
        count_exponent,
        etale: Some(Etale {
            embedding,
            phi_t: phi_t_big,
            kernel,
            basis,
            frame,
            choice: opts.choice,
        }),
    })
}

/// All vectors of `F_q^m` in base-`q` index order.
fn all_vectors(q: u64, m: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = q.pow(m as u32);
    (0..total).map(move |mut i| {
        (0..m)
            .map(|_| {
                let d = i % q;
                i /= q;
                d
            })
            .collect()
    })
}

impl TorsionModule {
    fn etale(&self) -> Result<&Etale> {
        self.etale.as_ref().ok_or_else(|| {
            Error::Domain(format!(
                "level {} meets the characteristic: φ[a] is not étale",
                self.quotient.display(&self.level)
            ))
        })
    }

    pub fn module(&self) -> &DrinfeldModule<FiniteField> {
        &self.module
    }

    pub fn level(&self) -> &Poly<u64> {
        &self.level
    }

    /// `A/(a)`.
    pub fn quotient(&self) -> &QuotientRing {
        &self.quotient
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    pub fn is_etale(&self) -> bool {
        self.etale.is_some()
    }

    /// `log_q |φ[a]|` over an algebraic closure.
    pub fn count_exponent(&self) -> usize {
        self.count_exponent
    }

    pub fn count(&self) -> BigUint {
        prime_power(self.quotient.field(), self.count_exponent)
    }

    pub fn basis_choice(&self) -> Option<BasisChoice> {
        self.etale.as_ref().map(|e| e.choice)
    }

    pub fn base(&self) -> &FiniteField {
        self.module.field()
    }

    pub fn ambient(&self) -> Result<&FiniteField> {
        Ok(self.etale()?.embedding.target())
    }

    pub fn embedding(&self) -> Result<&Embedding> {
        Ok(&self.etale()?.embedding)
    }

    /// `[L : k]` for the ambient `L`.
    pub fn relative_degree(&self) -> Result<usize> {
        Ok(self.ambient()?.degree() / self.base().degree())
    }

    pub fn basis(&self) -> Result<&[GfElem]> {
        Ok(&self.etale()?.basis)
    }

    /// Every point, in base-`q` order of the canonical kernel coordinates.
    pub fn points(&self) -> Result<Vec<GfElem>> {
        let e = self.etale()?;
        Ok(all_vectors(self.quotient.field().p(), e.kernel.dim())
            .map(|c| e.kernel.combine(&c))
            .collect())
    }

    /// `F_q`-basis of the points: `φ_{t^j}(e_i)`.
    pub fn fq_basis(&self) -> Result<&[GfElem]> {
        Ok(&self.etale()?.frame.vectors)
    }

    /// `F_q`-coordinates of a point with respect to [`Self::fq_basis`].
    pub fn fq_coords(&self, x: &GfElem) -> Result<Option<Vec<u64>>> {
        Ok(self.etale()?.frame.coords(x))
    }

    /// Coordinates in `(A/(a))^r`, or `None` if `x` is not a point.
    pub fn coords(&self, x: &GfElem) -> Result<Option<Vec<Poly<u64>>>> {
        let e = self.etale()?;
        let d = self.quotient.degree();
        Ok(e.frame.coords(x).map(|c| {
            c.chunks(d)
                .map(|ch| self.quotient.from_coords(ch))
                .collect()
        }))
    }

    pub fn contains(&self, x: &GfElem) -> Result<bool> {
        Ok(self.etale()?.frame.coords(x).is_some())
    }

    pub fn from_coords(&self, v: &[Poly<u64>]) -> Result<GfElem> {
        let e = self.etale()?;
        let c: Vec<u64> = v
            .iter()
            .flat_map(|x| self.quotient.to_coords(&self.quotient.reduce(x)))
            .collect();
        Ok(e.frame.combine(&c))
    }

    /// `φ_b(x)` for `x` in the ambient field.
    pub fn act(&self, b: &Poly<u64>, x: &GfElem) -> Result<GfElem> {
        let e = self.etale()?;
        let big = e.embedding.target();
        let ore = OreRing::new(big.clone());
        let mut acc = big.zero();
        for c in b.coeffs().iter().rev() {
            acc = ore.evaluate(&e.phi_t, &acc);
            acc = big.add(&acc, &big.mul(&big.from_prime(*c), x));
        }
        Ok(acc)
    }

    /// `x -> x^|k|` on the ambient field, iterated `times` times.
    pub fn frobenius(&self, x: &GfElem, times: usize) -> Result<GfElem> {
        let big = self.ambient()?;
        Ok(big.frobenius_iter(x, self.base().degree() * times))
    }

    /// Matrix of `x -> x^|k|` in the `A/(a)`-basis; column `i` is the image of `e_i`.
    pub fn frobenius_matrix(&self) -> Result<Matrix<Poly<u64>>> {
        let e = self.etale()?;
        let cols = e
            .basis
            .iter()
            .map(|b| {
                let y = self.frobenius(b, 1)?;
                self.coords(&y)?
                    .ok_or_else(|| Error::Domain("Frobenius image is not a torsion point".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(cols))
    }

    /// `φ_t` on the `F_q`-basis [`Self::fq_basis`].
    pub fn t_action(&self) -> Result<FqMatrix> {
        let e = self.etale()?;
        let p = self.quotient.field();
        let cols = e
            .frame
            .vectors
            .iter()
            .map(|v| Ok(e.frame.coords(&self.act(&self.quotient.poly_ring().gen(), v)?).unwrap()))
            .collect::<Result<Vec<_>>>()?;
        Ok(FqMatrix::from_columns(p, e.frame.dim(), &cols))
    }

    /// The same module and basis inside a larger field.
    pub fn extend_to(&self, larger: &FiniteField) -> Result<TorsionModule> {
        let e = self.etale()?;
        let up = larger.embedding_from(e.embedding.target())?;
        let big_ore = OreRing::new(larger.clone());
        let phi_t = big_ore.poly(e.phi_t.coeffs().iter().map(|c| up.apply(c)).collect());
        Ok(TorsionModule {
            module: self.module.clone(),
            level: self.level.clone(),
            quotient: self.quotient.clone(),
            count_exponent: self.count_exponent,
            etale: Some(Etale {
                embedding: e.embedding.then(&up),
                phi_t,
                kernel: e.kernel.map(|v| up.apply(v)),
                basis: e.basis.iter().map(|v| up.apply(v)).collect(),
                frame: e.frame.map(|v| up.apply(v)),
                choice: e.choice,
            }),
        })
    }

    /// `φ_a` as an operator on the ambient field.
    pub fn level_operator(&self) -> Result<FqMatrix> {
        let e = self.etale()?;
        let big = e.embedding.target();
        let ore = OreRing::new(big.clone());
        let phi_a = self
            .module
            .ore()
            .map_to(&self.module.phi(&self.level), &ore, |c| e.embedding.apply(c));
        Ok(operator_matrix(big, &phi_a))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let ring = self.quotient.poly_ring();
        let mut out = json!({
            "module": self.module.to_json(),
            "level": ring.display(&self.level),
            "count_exponent": self.count_exponent,
            "etale": self.is_etale(),
        });
        if let Some(e) = &self.etale {
            let r = self.rank();
            let t = ring.gen();
            let t_mat: Vec<Vec<Vec<u64>>> = (0..r)
                .map(|i| {
                    (0..r)
                        .map(|j| {
                            let x = if i == j { self.quotient.reduce(&t) } else { ring.zero() };
                            self.quotient.to_coords(&x)
                        })
                        .collect()
                })
                .collect();
            let frob: Vec<Vec<Vec<u64>>> = self
                .frobenius_matrix()
                .map(|m| {
                    m.to_rows()
                        .iter()
                        .map(|row| row.iter().map(|x| self.quotient.to_coords(x)).collect())
                        .collect()
                })
                .unwrap_or_default();
            out["ambient_modulus"] = json!(e.embedding.target().modulus());
            out["basis"] = json!(e.basis);
            out["basis_choice"] = json!(e.choice);
            out["t_action"] = json!(t_mat);
            out["frobenius"] = json!(frob);
        }
        out
    }
}

/// Solutions of `φ_a(x) = m` in the smallest field among the torsion ambient
/// `L` and its degree-`p` extension.
#[derive(Clone, Debug)]
pub struct DivisionFiber {
    pub m: GfElem,
    pub level: Poly<u64>,
    /// Absolute degree of the field holding the solutions.
    pub extension_degree: usize,
    pub field: FiniteField,
    pub solutions: Vec<GfElem>,
    /// The torsion module transported into `field`.
    pub torsion: TorsionModule,
}

pub fn division_fiber(t: &TorsionModule, m: &GfElem) -> Result<DivisionFiber> {
    let emb = t.embedding()?;
    let target = emb.apply(m);
    let (torsion, x0) = match t.level_operator()?.solve(&target) {
        Some(x0) => (t.clone(), x0),
        None => {
            let ctx = KummerContext::new(t)?;
            let x0 = ctx.division_point(m)?;
            (ctx.lifted, x0)
        }
    };
    let field = torsion.ambient()?.clone();
    let solutions = torsion
        .points()?
        .iter()
        .map(|v| field.add(&x0, v))
        .collect();
    Ok(DivisionFiber {
        m: m.clone(),
        level: t.level.clone(),
        extension_degree: field.degree(),
        field,
        solutions,
        torsion,
    })
}

/// `<σ', m> = σ'(x) - x` in `(A/(a))^r`, for `σ'` the Frobenius of the
/// splitting field `k(φ[a])`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KummerValue {
    pub m: GfElem,
    pub level: Poly<u64>,
    pub value: Vec<Poly<u64>>,
    pub well_defined: bool,
    /// Absolute degree of `k(φ[a])`.
    pub splitting_degree: usize,
}

/// Torsion data moved into the degree-`p` extension of the splitting field,
/// where every division point of an element of `k` lives.
#[derive(Clone, Debug)]
pub struct KummerContext {
    base: TorsionModule,
    lifted: TorsionModule,
    operator: FqMatrix,
}

impl KummerContext {
    pub fn new(t: &TorsionModule) -> Result<Self> {
        let big = t.ambient()?;
        let p = big.base().p() as usize;
        let larger = FiniteField::standard(big.base().p(), big.degree() * p)?;
        let lifted = t.extend_to(&larger)?;
        let operator = lifted.level_operator()?;
        Ok(Self {
            base: t.clone(),
            lifted,
            operator,
        })
    }

    pub fn torsion(&self) -> &TorsionModule {
        &self.base
    }

    /// The torsion module inside the extension field.
    pub fn lifted(&self) -> &TorsionModule {
        &self.lifted
    }

    /// A solution of `φ_a(x) = m` in the extension field.
    pub fn division_point(&self, m: &GfElem) -> Result<GfElem> {
        let target = self.lifted.embedding()?.apply(m);
        self.operator
            .solve(&target)
            .ok_or_else(|| Error::Domain("φ_a(x) = m has no solution in the degree-p extension".into()))
    }

    fn coords(&self, x: &GfElem) -> Result<Vec<Poly<u64>>> {
        self.lifted
            .coords(x)?
            .ok_or_else(|| Error::Domain("cocycle value is not a torsion point".into()))
    }

    /// `σ^j(x) - x` for `σ = Frob_k` and the chosen division point `x` of `m`.
    pub fn cocycle(&self, m: &GfElem, j: usize) -> Result<Vec<Poly<u64>>> {
        let x = self.division_point(m)?;
        self.cocycle_at(&x, j)
    }

    fn cocycle_at(&self, x: &GfElem, j: usize) -> Result<Vec<Poly<u64>>> {
        let field = self.lifted.ambient()?;
        let y = self.lifted.frobenius(x, j)?;
        self.coords(&field.sub(&y, x))
    }

    pub fn value(&self, m: &GfElem) -> Result<KummerValue> {
        self.value_power(m, 1)
    }

    /// `<σ'^j, m>`.
    pub fn value_power(&self, m: &GfElem, j: usize) -> Result<KummerValue> {
        let n_rel = self.base.relative_degree()?;
        let x = self.division_point(m)?;
        let value = self.cocycle_at(&x, n_rel * j)?;
        let field = self.lifted.ambient()?;
        let e1 = &self.lifted.basis()?[0];
        let other = self.cocycle_at(&field.add(&x, e1), n_rel * j)?;
        Ok(KummerValue {
            m: m.clone(),
            level: self.base.level.clone(),
            well_defined: other == value,
            value,
            splitting_degree: self.base.ambient()?.degree(),
        })
    }

    /// Checks that `σ(x) - x` for every division point `x` of `m` is
    /// predicted by the Frobenius matrix `F` and one cocycle value `w0`:
    /// `σ(x0 + v) - (x0 + v) = w0 + (F - 1) v`, and that
    /// `<σ', m> = sum_{i<N} F^i w0`.
    pub fn reconstruction_check(&self, m: &GfElem) -> Result<Reconstruction> {
        let q = self.base.quotient();
        let r = self.base.rank();
        let mring = MatrixRing::new(q.clone(), r);
        let f = self.lifted.frobenius_matrix()?;
        let x0 = self.division_point(m)?;
        let w0 = self.cocycle_at(&x0, 1)?;
        let field = self.lifted.ambient()?;
        let fm1 = mring.sub(&f, &mring.identity());
        let mut checked = 0;
        let mut holds = true;
        for v in self.lifted.points()? {
            let cv = self.coords(&v)?;
            let predicted: Vec<Poly<u64>> = mring
                .mul_vec(&fm1, &cv)
                .iter()
                .zip(&w0)
                .map(|(a, b)| q.add(a, b))
                .collect();
            let direct = self.cocycle_at(&field.add(&x0, &v), 1)?;
            holds &= predicted == direct;
            checked += 1;
        }
        let n_rel = self.base.relative_degree()?;
        let mut acc = vec![q.zero(); r];
        let mut term = w0.clone();
        for _ in 0..n_rel {
            acc = acc.iter().zip(&term).map(|(a, b)| q.add(a, b)).collect();
            term = mring.mul_vec(&f, &term);
        }
        let pairing = self.value(m)?.value;
        Ok(Reconstruction {
            fiber_points: checked,
            fiber_holds: holds,
            pairing_holds: acc == pairing,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub fiber_points: usize,
    pub fiber_holds: bool,
    pub pairing_holds: bool,
}

impl Reconstruction {
    pub fn holds(&self) -> bool {
        self.fiber_holds && self.pairing_holds
    }
}

pub fn kummer_value(t: &TorsionModule, m: &GfElem) -> Result<KummerValue> {
    KummerContext::new(t)?.value(m)
}

/// The finite-level `Δ`: the subgroup of `φ[a]^s` generated by the tuple of
/// Kummer values of the generators and its Frobenius translates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaImage {
    pub level: Poly<u64>,
    pub tuple: Vec<Vec<Poly<u64>>>,
    /// `F_q`-basis of the subgroup in concatenated coordinates.
    pub span: Vec<Vec<u64>>,
    #[serde(with = "crate::algebra::decimal")]
    pub order: BigUint,
}

impl DeltaImage {
    /// Every element, as tuples of coordinate vectors.
    pub fn elements(&self, t: &TorsionModule) -> Vec<Vec<Vec<Poly<u64>>>> {
        let q = t.quotient();
        let d = q.degree();
        let r = t.rank();
        let p = q.field().p();
        all_vectors(p, self.span.len())
            .map(|c| {
                let mut flat = vec![0u64; self.span.first().map_or(0, |v| v.len())];
                for (ci, v) in c.iter().zip(&self.span) {
                    for (o, x) in flat.iter_mut().zip(v) {
                        *o = (*o + ci * x) % p;
                    }
                }
                unflatten(q, &flat, r, d)
            })
            .collect()
    }

    pub fn contains(&self, t: &TorsionModule, tuple: &[Vec<Poly<u64>>]) -> bool {
        let q = t.quotient();
        let mut space = RowSpace::new(q.field(), flatten(q, tuple).len());
        for v in &self.span {
            space.insert(v);
        }
        space.contains(&flatten(q, tuple))
    }
}

pub(crate) fn flatten(q: &QuotientRing, tuple: &[Vec<Poly<u64>>]) -> Vec<u64> {
    tuple
        .iter()
        .flat_map(|v| v.iter().flat_map(|x| q.to_coords(x)))
        .collect()
}

pub(crate) fn unflatten(q: &QuotientRing, flat: &[u64], r: usize, d: usize) -> Vec<Vec<Poly<u64>>> {
    flat.chunks(r * d)
        .map(|v| v.chunks(d).map(|c| q.from_coords(c)).collect())
        .collect()
}

/// Monic polynomials of degree `1..=deg` together with `1`.
pub(crate) fn monic_up_to(p: PrimeField, deg: usize) -> Vec<Poly<u64>> {
    let ring = PolyRing::new(p, Var::T);
    let mut out = vec![ring.one()];
    for n in 1..=deg {
        out.extend(crate::algebra::irreducible::monic_of_degree(p.p(), n).map(|c| ring.poly(c)));
    }
    out
}

/// Rejects generators killed by some `φ_b` with `deg b <= deg a`.
pub fn check_torsion_free(d: &DrinfeldModule<FiniteField>, gens: &[GfElem], deg: usize) -> Result<()> {
    let k = d.field();
    let ring = d.a_ring();
    for g in gens {
        for b in monic_up_to(k.base(), deg) {
            if k.is_zero(&d.act(&b, g)) {
                return Err(Error::Domain(format!(
                    "generator {} is torsion: φ_b kills it for b = {}",
                    k.display(g),
                    ring.display(&b)
                )));
            }
        }
    }
    Ok(())
}

pub fn delta_image(t: &TorsionModule, gens: &[GfElem]) -> Result<DeltaImage> {
    t.etale()?;
    check_torsion_free(t.module(), gens, t.level.degree().unwrap())?;
    let ctx = KummerContext::new(t)?;
    delta_from_values(t, &ctx, gens)
}

/// `Δ` without the torsion-freeness precheck.
pub(crate) fn delta_from_values(t: &TorsionModule, ctx: &KummerContext, gens: &[GfElem]) -> Result<DeltaImage> {
    let q = t.quotient();
    let r = t.rank();
    let tuple = gens
        .iter()
        .map(|g| Ok(ctx.value(g)?.value))
        .collect::<Result<Vec<_>>>()?;
    let f = t.frobenius_matrix()?;
    let mring = MatrixRing::new(q.clone(), r);
    let dim = gens.len() * r * q.degree();
    let mut space = RowSpace::new(q.field(), dim);
    let mut span = Vec::new();
    let mut cur = tuple.clone();
    // the Γ-orbit of the tuple is finite; stop when it returns
    loop {
        let flat = flatten(q, &cur);
        if space.insert(&flat) {
            span.push(flat);
        }
        cur = cur.iter().map(|v| mring.mul_vec(&f, v)).collect();
        if cur == tuple {
            break;
        }
    }
    let order = prime_power(q.field(), span.len());
    Ok(DeltaImage {
        level: t.level.clone(),
        tuple,
        span,
        order,
    })
}

/// The map `φ[a] -> φ'[a]` induced by an isogeny, in `A/(a)`-coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsogenyTorsionMap {
    pub level: Poly<u64>,
    pub matrix: Matrix<Poly<u64>>,
    pub source_frobenius: Matrix<Poly<u64>>,
    pub target_frobenius: Matrix<Poly<u64>>,
    /// `dim_{F_q}` of `ker f ∩ φ[a]`.
    pub kernel_dimension: usize,
    /// `F' f = f F`.
    pub commutes: bool,
    /// `F' = f F f^{-1}`, when `f` is invertible on `φ[a]`.
    pub conjugation: Option<bool>,
}

pub fn isogeny_torsion_map(f: &Isogeny<FiniteField>, a: &Poly<u64>) -> Result<IsogenyTorsionMap> {
    f.source.check_level(a)?;
    f.target.check_level(a)?;
    let k = f.source.field();
    let n = lcm(splitting_degree(&f.source, a)?, splitting_degree(&f.target, a)?);
    let opts = TorsionOptions {
        choice: BasisChoice::Least,
        ambient_degree: Some(k.degree() * n),
    };
    let src = torsion_space_with(&f.source, a, &opts)?;
    let tgt = torsion_space_with(&f.target, a, &opts)?;
    let big = src.ambient()?.clone();
    let ore = OreRing::new(big.clone());
    let emb = src.embedding()?;
    let fb = f.source.ore().map_to(&f.f, &ore, |c| emb.apply(c));
    let image = |x: &GfElem| ore.evaluate(&fb, x);
    let cols = src
        .basis()?
        .iter()
        .map(|e| {
            tgt.coords(&image(e))?
                .ok_or_else(|| Error::Domain("isogeny image is not a torsion point".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let matrix = Matrix::from_columns(cols);
    let p = k.base();
    let fq_cols = src
        .fq_basis()?
        .iter()
        .map(|v| Ok(tgt.fq_coords(&image(v))?.unwrap()))
        .collect::<Result<Vec<_>>>()?;
    let m = src.count_exponent();
    let rank = FqMatrix::from_columns(p, tgt.count_exponent(), &fq_cols).rank();
    let fs = src.frobenius_matrix()?;
    let ft = tgt.frobenius_matrix()?;
    let mring = MatrixRing::new(src.quotient().clone(), src.rank());
    let commutes = mring.mul(&ft, &matrix) == mring.mul(&matrix, &fs);
    let conjugation = mring
        .inverse(&matrix)
        .map(|inv| ft == mring.mul(&mring.mul(&matrix, &fs), &inv));
    Ok(IsogenyTorsionMap {
        level: src.level.clone(),
        matrix,
        source_frobenius: fs,
        target_frobenius: ft,
        kernel_dimension: m - rank,
        commutes,
        conjugation,
    })
}

/// Compatibility of torsion with restriction to `B = F_q[u]`, `u -> b`:
/// `ψ[w]` computed directly against the sum of the `φ`-primary parts
/// `φ[p^e]` for `p^e || w(b)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictionCheck {
    pub b: Poly<u64>,
    pub w: Poly<u64>,
    /// `w(b(t))` factored in `A`.
    pub components: Vec<(Poly<u64>, usize)>,
    /// Primes of `A` dividing `q0(b(t))`.
    pub primes_above_q0: Vec<Poly<u64>>,
    pub unique_prime: bool,
    pub direct_dimension: usize,
    pub expected_dimension: usize,
    /// The sum of the primary parts equals `ψ[w]` as a subspace.
    pub equal: bool,
    /// `ψ[w]` is free of rank `r deg b` over `B/(w)`.
    pub free: bool,
}

pub fn restriction_check(
    d: &DrinfeldModule<FiniteField>,
    b: &Poly<u64>,
    w: &Poly<u64>,
) -> Result<RestrictionCheck> {
    let res = d.restrict(b)?;
    let psi = &res.psi;
    psi.check_level(w)?;
    let ring = d.a_ring();
    let p = d.field().base();
    let wb = ring.monic(&ring.compose(w, b));
    let (_, components) = factor::factor(&ring, &wb, 0);
    let q0 = match psi.characteristic() {
        crate::drinfeld::Characteristic::Special(q0) => q0,
        crate::drinfeld::Characteristic::Generic => unreachable!("finite base"),
    };
    let (_, above) = factor::factor(&ring, &ring.compose(&q0, b), 0);
    let primes_above_q0: Vec<Poly<u64>> = above.into_iter().map(|(f, _)| f).collect();

    let k = d.field();
    let mut n = splitting_degree(psi, w)?;
    for (f, e) in &components {
        n = lcm(n, splitting_degree(d, &ring.pow(f, *e as u64))?);
    }
    let opts = TorsionOptions {
        choice: BasisChoice::Least,
        ambient_degree: Some(k.degree() * n),
    };
    let direct = torsion_space_with(psi, w, &opts)?;
    let dim = direct.ambient()?.degree();
    let mut direct_space = RowSpace::new(p, dim);
    for v in direct.fq_basis()? {
        direct_space.insert(v);
    }
    let mut sum = RowSpace::new(p, dim);
    for (f, e) in &components {
        let part = torsion_space_with(d, &ring.pow(f, *e as u64), &opts)?;
        for v in part.fq_basis()? {
            sum.insert(v);
        }
    }
    let equal = sum.rank() == direct_space.rank()
        && direct.fq_basis()?.iter().all(|v| sum.contains(v));
    let expected = d.rank() * b.degree().unwrap() * w.degree().unwrap();
    Ok(RestrictionCheck {
        b: b.clone(),
        w: w.clone(),
        unique_prime: primes_above_q0.len() == 1,
        components,
        primes_above_q0,
        direct_dimension: direct.count_exponent(),
        expected_dimension: expected,
        equal,
        free: direct.count_exponent() == expected && direct.basis()?.len() == psi.rank(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteFieldLike;

    fn f2() -> FiniteField {
        FiniteField::standard(2, 1).unwrap()
    }

    fn module(k: &FiniteField, coeffs: &[Vec<u64>]) -> DrinfeldModule<FiniteField> {
        DrinfeldModule::new(k.clone(), coeffs.iter().map(|c| k.from_coords(c)).collect()).unwrap()
    }

    fn poly(c: &[u64]) -> Poly<u64> {
        PolyRing::new(PrimeField::new(7).unwrap(), Var::T).poly(c.to_vec())
    }

    #[test]
    fn one_plus_tau_over_f2() {
        let k = f2();
        let d = module(&k, &[vec![1], vec![1]]);
        let t = torsion_space(&d, &poly(&[0, 1])).unwrap();
        assert_eq!(t.count_exponent(), 1);
        assert_eq!(t.points().unwrap(), vec![vec![0], vec![1]]);
        assert_eq!(t.basis().unwrap(), &[vec![1]]);
        let bad = torsion_space(&d, &poly(&[1, 1])).unwrap();
        assert!(!bad.is_etale());
        assert_eq!(bad.count(), BigUint::from(1u32));
        assert!(bad.frobenius_matrix().is_err());
    }

    #[test]
    fn quadratic_fiber() {
        let k = f2();
        let d = module(&k, &[vec![1], vec![1]]);
        let t = torsion_space(&d, &poly(&[0, 1])).unwrap();
        let fib = division_fiber(&t, &vec![1]).unwrap();
        assert_eq!(fib.extension_degree, 2);
        assert_eq!(fib.solutions.len(), 2);
        for x in &fib.solutions {
            let f = &fib.field;
            assert!(f.is_one(&f.add(&f.mul(x, x), x)));
        }
        let zero = division_fiber(&t, &vec![0]).unwrap();
        assert_eq!(zero.solutions, t.points().unwrap());
    }

    #[test]
    fn carlitz_reduction_level_t() {
        // θ̄ = w in F_4 = F_2[w]/(w^2+w+1)
        let k = FiniteField::new(PrimeField::new(2).unwrap(), vec![1, 1, 1]).unwrap();
        let d = module(&k, &[vec![0, 1], vec![1]]);
        let t = torsion_space(&d, &poly(&[0, 1])).unwrap();
        assert_eq!(t.count_exponent(), 1);
        // x^2 + w x = x (x + w): the point w is already in F_4
        assert_eq!(t.relative_degree().unwrap(), 1);
        assert_eq!(t.basis().unwrap(), &[vec![0, 1]]);
        // π = T^2+T+1 ≡ 1 mod t
        let f = t.frobenius_matrix().unwrap();
        assert_eq!(f.get(0, 0), &poly(&[1]));
    }

    #[test]
    fn carlitz_frobenius_is_pi_mod_level() {
        let p = PrimeField::new(3).unwrap();
        let ring = PolyRing::new(p, Var::T);
        let pi = poly(&[1, 2, 0, 1]); // T^3 + 2T + 1
        let k = FiniteField::new(p, pi.coeffs().to_vec()).unwrap();
        let d = module(&k, &[vec![0, 1, 0], vec![1, 0, 0]]);
        for a in [poly(&[1, 1]), poly(&[1, 0, 1]), poly(&[2, 1, 1])] {
            for choice in [BasisChoice::Least, BasisChoice::Greatest] {
                let t = torsion_space_with(&d, &a, &TorsionOptions { choice, ambient_degree: None }).unwrap();
                let f = t.frobenius_matrix().unwrap();
                assert_eq!(f.get(0, 0), &ring.rem(&pi, &a), "level {}", ring.display(&a));
            }
        }
    }

    #[test]
    fn kummer_pairing_laws_small() {
        // 1+τ over F_4, level t
        let k = FiniteField::standard(2, 2).unwrap();
        let d = module(&k, &[vec![1, 0], vec![1, 0]]);
        let t = torsion_space(&d, &poly(&[0, 1])).unwrap();
        let ctx = KummerContext::new(&t).unwrap();
        let w = vec![0, 1];
        let v = ctx.value(&w).unwrap();
        assert!(v.well_defined);
        assert_eq!(v.value, vec![poly(&[1])]);
        assert!(ctx.value(&vec![1, 0]).unwrap().value.iter().all(|x| x.is_zero()));
        assert!(ctx.reconstruction_check(&w).unwrap().holds());
        let delta = delta_image(&t, &[w]).unwrap();
        assert_eq!(delta.order, BigUint::from(2u32));
    }

    #[test]
    fn isogeny_between_twists_over_f4() {
        let k = FiniteField::standard(2, 2).unwrap();
        let src = module(&k, &[vec![1, 0], vec![1, 0]]);
        let tgt = module(&k, &[vec![1, 0], vec![0, 1]]);
        let w2 = k.mul(&k.generator(), &k.generator());
        let f = Isogeny::new(src.ore().constant(w2), src, tgt).unwrap();
        for a in [poly(&[0, 1]), poly(&[1, 1, 1])] {
            let m = isogeny_torsion_map(&f, &a).unwrap();
            assert!(m.commutes);
            assert_eq!(m.conjugation, Some(true));
            assert_eq!(m.kernel_dimension, 0);
        }
    }

    #[test]
    fn restriction_components() {
        let k = FiniteField::standard(2, 2).unwrap();
        let d = module(&k, &[vec![0, 1], vec![1, 0]]);
        let c = restriction_check(&d, &poly(&[0, 0, 1]), &poly(&[1, 1])).unwrap();
        assert!(c.equal && c.free);
        assert_eq!(c.direct_dimension, 2);
    }

    #[test]
    fn frame_coordinates_round_trip() {
        let k = FiniteField::standard(3, 2).unwrap();
        let d = module(&k, &[vec![0, 1], vec![1, 0], vec![1, 1]]);
        let t = torsion_space(&d, &poly(&[1, 1])).unwrap();
        assert_eq!(t.count_exponent(), 2);
        for x in t.points().unwrap() {
            let c = t.coords(&x).unwrap().unwrap();
            assert_eq!(t.from_coords(&c).unwrap(), x);
            let tx = t.act(&poly(&[0, 1]), &x).unwrap();
            let tc: Vec<Poly<u64>> = c.iter().map(|ci| t.quotient().mul(ci, &poly(&[0, 1]))).collect();
            assert_eq!(t.coords(&tx).unwrap().unwrap(), tc);
        }
        assert_eq!(t.points().unwrap().len() as u64, 9);
        assert!(k.order() > BigUint::from(1u32));
    }
}
