//! Flat experiment configs (TOML) and their canonical JSON form.

use std::path::Path;

use drinfeld_core::algebra::{FiniteField, Poly, PrimeField};
use drinfeld_core::drinfeld::DrinfeldModule;
use drinfeld_core::funcfield::RatFuncField;
use drinfeld_core::parse::{parse_a, parse_gf, parse_ratfunc};
use drinfeld_core::torsion::BasisChoice;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Torsion,
    Frobenius,
    Image,
    KummerDensity,
    DivisionHull,
    Endring,
    IndexBound,
    IsogenyCheck,
    RestrictCheck,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Torsion => "torsion",
            Kind::Frobenius => "frobenius",
            Kind::Image => "image",
            Kind::KummerDensity => "kummer-density",
            Kind::DivisionHull => "division-hull",
            Kind::Endring => "endring",
            Kind::IndexBound => "index-bound",
            Kind::IsogenyCheck => "isogeny-check",
            Kind::RestrictCheck => "restrict-check",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    #[default]
    Rational,
    Finite,
}

/// One experiment. Elements of `F_q(θ)` are written in `T`, elements of a
/// finite base in its generator `w`, polynomials of `A` in `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kind: Option<Kind>,
    pub q: u64,
    #[serde(default)]
    pub base: Base,
    /// `[k : F_q]` for a finite base.
    pub base_degree: Option<usize>,
    /// Coefficients of `φ_t`, constant term first.
    pub phi_t: Vec<String>,
    pub level: Option<String>,
    /// A place of `F_q(θ)`, as a monic irreducible in `T`.
    pub place: Option<String>,
    pub place_bound: Option<usize>,
    pub hull_bound: Option<usize>,
    pub window_degree: Option<usize>,
    pub window_theta: Option<usize>,
    #[serde(default)]
    pub m: Vec<String>,
    /// Coefficients of the isogeny, constant term first.
    #[serde(default)]
    pub isogeny: Vec<String>,
    #[serde(default)]
    pub target_phi_t: Vec<String>,
    pub subring: Option<String>,
    pub lemma_prime: Option<String>,
    pub lemma_level: Option<String>,
    pub basis: Option<BasisChoice>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<drinfeld_core::Error> for ConfigError {
    fn from(e: drinfeld_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub enum Module {
    Rational(DrinfeldModule<RatFuncField>),
    Finite(DrinfeldModule<FiniteField>),
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical JSON with run-local keys (`workers`, `out`) removed.
    pub fn canonical(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.workers = None;
        c.out = None;
        serde_json::to_value(&c).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let s = serde_json::to_string(&self.canonical()).expect("config serializes");
        hex::encode(Sha256::digest(s.as_bytes()))
    }

    /// Checks that do not depend on the experiment kind.
    pub fn validate(&self, kind: Kind) -> Result<(), ConfigError> {
        if let Some(k) = self.kind {
            if k != kind {
                return err(format!(
                    "config is for {} but {} was requested",
                    k.name(),
                    kind.name()
                ));
            }
        }
        if self.seed.is_none() {
            return err("seed is mandatory (config key `seed` or --seed)");
        }
        if self.phi_t.len() < 2 {
            return err("phi_t needs at least two coefficients");
        }
        if self.workers == Some(0) {
            return err("workers must be positive");
        }
        match (self.base, self.base_degree) {
            (Base::Rational, Some(_)) => return err("base_degree only applies to a finite base"),
            (Base::Finite, None) => return err("a finite base needs base_degree"),
            _ => {}
        }
        let needs_level = !matches!(kind, Kind::Endring | Kind::DivisionHull);
        if needs_level && self.level.is_none() {
            return err(format!("{} needs `level`", kind.name()));
        }
        let finite_only = matches!(kind, Kind::IndexBound | Kind::IsogenyCheck | Kind::RestrictCheck);
        let rational_only = matches!(kind, Kind::Image | Kind::KummerDensity | Kind::DivisionHull);
        if finite_only && self.base != Base::Finite {
            return err(format!("{} needs a finite base", kind.name()));
        }
        if rational_only && self.base != Base::Rational {
            return err(format!("{} needs base = \"rational\"", kind.name()));
        }
        if matches!(kind, Kind::Image | Kind::KummerDensity) && self.place_bound.is_none() {
            return err(format!("{} needs `place_bound`", kind.name()));
        }
        if matches!(kind, Kind::KummerDensity) && self.m.len() != 1 {
            return err("kummer-density needs exactly one element in `m`");
        }
        if matches!(kind, Kind::DivisionHull | Kind::IndexBound) && self.m.is_empty() {
            return err(format!("{} needs generators in `m`", kind.name()));
        }
        if matches!(kind, Kind::DivisionHull) && self.hull_bound.is_none() {
            return err("division-hull needs `hull_bound`");
        }
        if matches!(kind, Kind::IsogenyCheck) && (self.isogeny.is_empty() || self.target_phi_t.is_empty()) {
            return err("isogeny-check needs `isogeny` and `target_phi_t`");
        }
        if matches!(kind, Kind::RestrictCheck) && self.subring.is_none() {
            return err("restrict-check needs `subring`");
        }
        Ok(())
    }

    pub fn prime_field(&self) -> Result<PrimeField, ConfigError> {
        PrimeField::new(self.q).map_err(|e| ConfigError(format!("q = {}: {e}", self.q)))
    }

    pub fn finite_field(&self) -> Result<FiniteField, ConfigError> {
        let n = self.base_degree.unwrap_or(1);
        if n == 0 {
            return err("base_degree must be positive");
        }
        self.prime_field()?;
        Ok(FiniteField::standard(self.q, n)?)
    }

    pub fn module(&self) -> Result<Module, ConfigError> {
        match self.base {
            Base::Rational => {
                let k = RatFuncField::new(self.prime_field()?);
                let coeffs = self
                    .phi_t
                    .iter()
                    .map(|s| parse_ratfunc(&k, s))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Module::Rational(DrinfeldModule::new(k, coeffs)?))
            }
            Base::Finite => Ok(Module::Finite(self.finite_module(&self.phi_t)?)),
        }
    }

    pub fn finite_module(&self, coeffs: &[String]) -> Result<DrinfeldModule<FiniteField>, ConfigError> {
        let k = self.finite_field()?;
        let coeffs = coeffs
            .iter()
            .map(|s| parse_gf(&k, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DrinfeldModule::new(k, coeffs)?)
    }

    pub fn a_poly(&self, key: &str, s: &Option<String>) -> Result<Poly<u64>, ConfigError> {
        let s = s.as_ref().ok_or_else(|| ConfigError(format!("missing `{key}`")))?;
        let ring = drinfeld_core::algebra::PolyRing::new(self.prime_field()?, drinfeld_core::algebra::Var::T);
        Ok(parse_a(&ring, s)?)
    }

    pub fn level(&self) -> Result<Poly<u64>, ConfigError> {
        self.a_poly("level", &self.level)
    }

    pub fn basis_choice(&self) -> BasisChoice {
        self.basis.unwrap_or(BasisChoice::Least)
    }
}
