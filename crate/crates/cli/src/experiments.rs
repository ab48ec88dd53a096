//! Dispatch from a validated config to the library operations.

use drinfeld_core::algebra::{FiniteField, PolyRing, QuotientRing, Var};
use drinfeld_core::drinfeld::{hom_space, scalar_dimension, BaseField, DrinfeldModule, Isogeny, Isotriviality};
use drinfeld_core::funcfield::{Place, RatFuncField};
use drinfeld_core::galois::{image_report, sample_at, sample_frobenii, Verdict};
use drinfeld_core::kummer::{
    divisibility_lemma_check, division_hull, kummer_density, verify_index_bound, ImageModel, IndexBoundStatus,
};
use drinfeld_core::parse::{evaluate, parse_expr, parse_gf, parse_ratfunc};
use drinfeld_core::torsion::{
    isogeny_torsion_map, restriction_check, torsion_space_with, TorsionModule, TorsionOptions,
};
use drinfeld_core::Error;
use serde_json::{json, Value};

use crate::config::{Config, ConfigError, Kind, Module};

/// Acceptance threshold on `|z|` for density experiments.
pub const DENSITY_SIGMAS: f64 = 3.0;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub payload: Value,
    pub verdict: String,
    pub exit_code: i32,
}

impl Outcome {
    fn new(payload: Value, verdict: &str, exit_code: i32) -> Self {
        Self {
            payload,
            verdict: verdict.to_string(),
            exit_code,
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    /// A computation that could not reach a verdict; still reported.
    Inconclusive(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(s) | RunError::Inconclusive(s) => f.write_str(s),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnderSample(_) | Error::BoundExceeded(_) => RunError::Inconclusive(e.to_string()),
            _ => RunError::Config(e.to_string()),
        }
    }
}

type Run = Result<Outcome, RunError>;

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn rational(cfg: &Config) -> Result<DrinfeldModule<RatFuncField>, RunError> {
    match cfg.module()? {
        Module::Rational(d) => Ok(d),
        Module::Finite(_) => Err(RunError::Config("this experiment needs base = \"rational\"".into())),
    }
}

fn finite(cfg: &Config) -> Result<DrinfeldModule<FiniteField>, RunError> {
    match cfg.module()? {
        Module::Finite(d) => Ok(d),
        Module::Rational(_) => Err(RunError::Config("this experiment needs a finite base".into())),
    }
}

fn place(cfg: &Config, d: &DrinfeldModule<RatFuncField>) -> Result<Place, RunError> {
    let s = cfg
        .place
        .as_ref()
        .ok_or_else(|| RunError::Config("missing `place`".into()))?;
    let pf = d.field().prime_field();
    let ring = PolyRing::new(pf, Var::T);
    let pi = evaluate(&ring, &parse_expr(s)?, &["T", "theta"], &ring.gen())?;
    Ok(Place::new(pf, pi)?)
}

fn torsion_of(cfg: &Config) -> Result<TorsionModule, RunError> {
    let a = cfg.level()?;
    let opts = TorsionOptions {
        choice: cfg.basis_choice(),
        ambient_degree: None,
    };
    let d = match cfg.module()? {
        Module::Finite(d) => d,
        Module::Rational(d) => {
            let v = place(cfg, &d)?;
            d.reduce_at(&v)?
        }
    };
    d.check_level(&a)?;
    Ok(torsion_space_with(&d, &a, &opts)?)
}

pub fn run(kind: Kind, cfg: &Config) -> Run {
    cfg.validate(kind)?;
    match kind {
        Kind::Torsion => torsion(cfg),
        Kind::Frobenius => frobenius(cfg),
        Kind::Image => image(cfg),
        Kind::KummerDensity => density(cfg),
        Kind::DivisionHull => hull(cfg),
        Kind::Endring => endring(cfg),
        Kind::IndexBound => index_bound(cfg),
        Kind::IsogenyCheck => isogeny(cfg),
        Kind::RestrictCheck => restrict(cfg),
    }
}

fn torsion(cfg: &Config) -> Run {
    let t = torsion_of(cfg)?;
    Ok(Outcome::new(t.to_json(), "computed", EXIT_OK))
}

fn frobenius(cfg: &Config) -> Run {
    let a = cfg.level()?;
    if let Module::Finite(_) = cfg.module()? {
        let t = torsion_of(cfg)?;
        let m = t.frobenius_matrix()?;
        return Ok(Outcome::new(
            json!({"torsion": t.to_json(), "frobenius": m}),
            "computed",
            EXIT_OK,
        ));
    }
    let d = rational(cfg)?;
    d.check_level(&a)?;
    if cfg.place.is_some() {
        let v = place(cfg, &d)?;
        let s = sample_at(&d, &a, &v, cfg.basis_choice()).map_err(RunError::Config)?;
        return Ok(Outcome::new(to_json(&s), "computed", EXIT_OK));
    }
    let bound = cfg
        .place_bound
        .ok_or_else(|| RunError::Config("frobenius needs `place` or `place_bound`".into()))?;
    let batch = sample_frobenii(&d, &a, bound, cfg.basis_choice())?;
    Ok(Outcome::new(to_json(&batch), "computed", EXIT_OK))
}

fn image(cfg: &Config) -> Run {
    let d = rational(cfg)?;
    let a = cfg.level()?;
    let rep = image_report(&d, &a, cfg.place_bound.unwrap())?;
    let (verdict, code) = match rep.classification.as_ref().map(|c| &c.verdict) {
        Some(Verdict::Full) => ("full", EXIT_OK),
        Some(Verdict::ContainsSl { .. }) => ("contains-sl", EXIT_OK),
        Some(Verdict::CyclicScalar) => ("cyclic-scalar", EXIT_OK),
        Some(Verdict::Inconclusive) | None => ("inconclusive", EXIT_INCONCLUSIVE),
    };
    Ok(Outcome::new(to_json(&rep), verdict, code))
}

fn density(cfg: &Config) -> Run {
    let d = rational(cfg)?;
    let a = cfg.level()?;
    d.check_level(&a)?;
    let m = parse_ratfunc(d.field(), &cfg.m[0])?;
    let quo = QuotientRing::new(d.field().prime_field(), d.a_ring().monic(&a));
    let model = ImageModel::full(&quo, d.rank())?;
    let rep = kummer_density(&d, &m, &a, cfg.place_bound.unwrap(), &model)?;
    let ok = rep.z_score.is_some_and(|z| z.abs() <= DENSITY_SIGMAS);
    let (verdict, code) = if ok {
        ("holds", EXIT_OK)
    } else {
        ("fails", EXIT_NEGATIVE)
    };
    Ok(Outcome::new(to_json(&rep), verdict, code))
}

fn hull(cfg: &Config) -> Run {
    let d = rational(cfg)?;
    let gens = cfg
        .m
        .iter()
        .map(|s| parse_ratfunc(d.field(), s))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = division_hull(&d, &gens, cfg.hull_bound.unwrap())?;
    let (verdict, code) = if !rep.double_witnesses_consistent {
        ("inconsistent", EXIT_NEGATIVE)
    } else if rep.stabilized {
        ("stabilized", EXIT_OK)
    } else {
        ("not-stabilized", EXIT_INCONCLUSIVE)
    };
    Ok(Outcome::new(to_json(&rep), verdict, code))
}

fn endomorphisms<F: BaseField>(d: &DrinfeldModule<F>, cfg: &Config) -> Value {
    let deg = cfg.window_degree.unwrap_or(2);
    let theta = cfg.window_theta.unwrap_or(1);
    let basis = hom_space(d, d, deg, theta);
    let k = d.field();
    json!({
        "module": d.to_json(),
        "window_degree": deg,
        "window_theta": theta,
        "basis": basis
            .iter()
            .map(|u| u.coeffs().iter().map(|c| k.elem_json(c)).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "dimension": basis.len(),
        "scalar_dimension": scalar_dimension(d, &basis, deg),
    })
}

fn endring(cfg: &Config) -> Run {
    let payload = match cfg.module()? {
        Module::Finite(d) => endomorphisms(&d, cfg),
        Module::Rational(d) => {
            let mut v = endomorphisms(&d, cfg);
            v["isotrivial"] = json!(match d.is_isotrivial() {
                Isotriviality::Yes => "yes",
                Isotriviality::No => "no",
                Isotriviality::Unknown => "unknown",
            });
            v
        }
    };
    Ok(Outcome::new(payload, "computed", EXIT_OK))
}

fn index_bound(cfg: &Config) -> Run {
    let d = finite(cfg)?;
    let a = cfg.level()?;
    let gens = cfg
        .m
        .iter()
        .map(|s| parse_gf(d.field(), s))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = verify_index_bound(&d, &gens, &a, cfg.window_degree.unwrap_or(2))?;
    let mut lemma = Vec::new();
    let mut lemma_ok = true;
    if cfg.lemma_prime.is_some() {
        let p = cfg.a_poly("lemma_prime", &cfg.lemma_prime)?;
        let level = match cfg.lemma_level {
            Some(_) => cfg.a_poly("lemma_level", &cfg.lemma_level)?,
            None => a.clone(),
        };
        if let (Some(b), Some(c)) = (&rep.b, &rep.c) {
            for m in &gens {
                let r = divisibility_lemma_check(&d, m, &p, b, c, &level)?;
                lemma_ok &= r.holds;
                lemma.push(r);
            }
        }
    }
    let (verdict, code) = match rep.status {
        IndexBoundStatus::Holds if lemma_ok => ("holds", EXIT_OK),
        IndexBoundStatus::Holds | IndexBoundStatus::Fails => ("fails", EXIT_NEGATIVE),
        IndexBoundStatus::Inapplicable => ("inapplicable", EXIT_INCONCLUSIVE),
    };
    Ok(Outcome::new(
        json!({"index_bound": rep, "divisibility_lemma": lemma}),
        verdict,
        code,
    ))
}

fn isogeny(cfg: &Config) -> Run {
    let src = finite(cfg)?;
    let tgt = cfg.finite_module(&cfg.target_phi_t)?;
    let a = cfg.level()?;
    let coeffs = cfg
        .isogeny
        .iter()
        .map(|s| parse_gf(src.field(), s))
        .collect::<Result<Vec<_>, _>>()?;
    let f = src.ore().poly(coeffs);
    let iso = Isogeny::new(f, src, tgt)?;
    let m = isogeny_torsion_map(&iso, &a)?;
    let ok = m.commutes && m.conjugation != Some(false);
    Ok(Outcome::new(
        to_json(&m),
        if ok { "holds" } else { "fails" },
        if ok { EXIT_OK } else { EXIT_NEGATIVE },
    ))
}

fn restrict(cfg: &Config) -> Run {
    let d = finite(cfg)?;
    let b = cfg.a_poly("subring", &cfg.subring)?;
    let w = cfg.level()?;
    let c = restriction_check(&d, &b, &w)?;
    let ok = c.equal && c.free;
    Ok(Outcome::new(
        to_json(&c),
        if ok { "holds" } else { "fails" },
        if ok { EXIT_OK } else { EXIT_NEGATIVE },
    ))
}
