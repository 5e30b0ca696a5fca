//! Deviation and risk functionals: the evaluable catalog plus combinators.
//!
//! A [`DeviationFunctional`] maps a random variable into `[0, +inf]`; a
//! [`RiskFunctional`] into the reals. Both carry declared axiom profiles.
//! Declarations are not verified here; the audit engine in
//! [`crate::axioms`] is the only place that tests them.

pub mod catalog;
mod formulas;
mod ids;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::RandomVariable;

pub use formulas::{
    es_alpha, full_range, ied, iqd, ld_f, loss_deviation, lower_range, lvar_d, minkowski,
    regular_based, sd, sd_minus, sd_plus, ud_f, upper_range, var_alpha, BenchmarkCurve,
    DEFAULT_GAUGE_CEILING,
};
pub use ids::{parse_catalog_id, CatalogEntry, CATALOG_IDS};

/// Anything that can be evaluated on a random variable.
pub trait Functional: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, x: &RandomVariable) -> Result<f64>;
}

impl<T: Functional + ?Sized> Functional for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn evaluate(&self, x: &RandomVariable) -> Result<f64> {
        (**self).evaluate(x)
    }
}

type EvalFn = Arc<dyn Fn(&RandomVariable) -> Result<f64> + Send + Sync>;

/// Declared axiom flags of a deviation functional.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationProfile {
    pub non_negative: bool,
    pub translation_insensitive: bool,
    pub convex: bool,
    pub positively_homogeneous: bool,
    pub star_shaped: bool,
    pub lower_range_dominated: bool,
    pub law_invariant: bool,
}

impl DeviationProfile {
    /// Proper, convex, positively homogeneous and law invariant.
    pub const GENERALIZED: Self = Self {
        non_negative: true,
        translation_insensitive: true,
        convex: true,
        positively_homogeneous: true,
        star_shaped: true,
        lower_range_dominated: false,
        law_invariant: true,
    };

    pub const fn lrd(mut self) -> Self {
        self.lower_range_dominated = true;
        self
    }
}

/// Declared axiom flags of a risk functional.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub monotone: bool,
    pub translation_invariant: bool,
    pub normalized: bool,
    pub star_shaped: bool,
    pub positively_homogeneous: bool,
    pub convex: bool,
    pub law_invariant: bool,
}

impl RiskProfile {
    pub const COHERENT: Self = Self {
        monotone: true,
        translation_invariant: true,
        normalized: true,
        star_shaped: true,
        positively_homogeneous: true,
        convex: true,
        law_invariant: true,
    };
}

/// A named map `RandomVariable -> [0, +inf]`.
#[derive(Clone)]
pub struct DeviationFunctional {
    name: String,
    profile: DeviationProfile,
    eval: EvalFn,
}

impl fmt::Debug for DeviationFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeviationFunctional")
            .field("name", &self.name)
            .field("profile", &self.profile)
            .finish()
    }
}

impl DeviationFunctional {
    pub fn new<F>(name: impl Into<String>, profile: DeviationProfile, eval: F) -> Self
    where
        F: Fn(&RandomVariable) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            profile,
            eval: Arc::new(eval),
        }
    }

    pub fn infallible<F>(name: impl Into<String>, profile: DeviationProfile, eval: F) -> Self
    where
        F: Fn(&RandomVariable) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, profile, move |x| Ok(eval(x)))
    }

    pub fn profile(&self) -> DeviationProfile {
        self.profile
    }

    pub fn with_profile(mut self, profile: DeviationProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Functional for DeviationFunctional {
    fn name(&self) -> &str {
        &self.name
    }
    fn evaluate(&self, x: &RandomVariable) -> Result<f64> {
        (self.eval)(x)
    }
}

/// A named map `RandomVariable -> R`.
#[derive(Clone)]
pub struct RiskFunctional {
    name: String,
    profile: RiskProfile,
    eval: EvalFn,
}

impl fmt::Debug for RiskFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RiskFunctional")
            .field("name", &self.name)
            .field("profile", &self.profile)
            .finish()
    }
}

impl RiskFunctional {
    pub fn new<F>(name: impl Into<String>, profile: RiskProfile, eval: F) -> Self
    where
        F: Fn(&RandomVariable) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            profile,
            eval: Arc::new(eval),
        }
    }

    pub fn infallible<F>(name: impl Into<String>, profile: RiskProfile, eval: F) -> Self
    where
        F: Fn(&RandomVariable) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, profile, move |x| Ok(eval(x)))
    }

    pub fn profile(&self) -> RiskProfile {
        self.profile
    }

    pub fn with_profile(mut self, profile: RiskProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl Functional for RiskFunctional {
    fn name(&self) -> &str {
        &self.name
    }
    fn evaluate(&self, x: &RandomVariable) -> Result<f64> {
        (self.eval)(x)
    }
}

/// `t * v` with `0 * inf = 0`.
pub fn scale_extended(t: f64, v: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * v
    }
}

/// Pointwise sum `D1 + D2`.
pub fn add(d1: &DeviationFunctional, d2: &DeviationFunctional) -> DeviationFunctional {
    let (p, q) = (d1.profile, d2.profile);
    let profile = DeviationProfile {
        non_negative: p.non_negative || q.non_negative,
        translation_insensitive: p.translation_insensitive && q.translation_insensitive,
        convex: p.convex && q.convex,
        positively_homogeneous: p.positively_homogeneous && q.positively_homogeneous,
        star_shaped: p.star_shaped && q.star_shaped,
        lower_range_dominated: false,
        law_invariant: p.law_invariant && q.law_invariant,
    };
    let (a, b) = (d1.clone(), d2.clone());
    DeviationFunctional::new(format!("{}+{}", d1.name, d2.name), profile, move |x| {
        Ok(a.evaluate(x)? + b.evaluate(x)?)
    })
}

/// `t * D` for `t > 0`.
pub fn scale_functional(d: &DeviationFunctional, t: f64) -> Result<DeviationFunctional> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale factor {t} must be positive")));
    }
    let mut profile = d.profile;
    profile.lower_range_dominated &= t <= 1.0;
    let inner = d.clone();
    Ok(DeviationFunctional::new(
        format!("{t}*{}", d.name),
        profile,
        move |x| Ok(t * inner.evaluate(x)?),
    ))
}

/// `D^2`. Squaring keeps star-shapedness of a nonnegative functional but not convexity or homogeneity.
pub fn square(d: &DeviationFunctional) -> DeviationFunctional {
    let p = d.profile;
    let profile = DeviationProfile {
        convex: false,
        positively_homogeneous: false,
        lower_range_dominated: false,
        ..p
    };
    let inner = d.clone();
    DeviationFunctional::new(format!("({})^2", d.name), profile, move |x| {
        let v = inner.evaluate(x)?;
        Ok(v * v)
    })
}

/// Pointwise minimum over a finite family; ties resolve to the lowest index.
pub fn min_of(family: &[DeviationFunctional]) -> Result<DeviationFunctional> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let all = |f: fn(&DeviationProfile) -> bool| family.iter().all(|d| f(&d.profile));
    let profile = DeviationProfile {
        non_negative: all(|p| p.non_negative),
        translation_insensitive: all(|p| p.translation_insensitive),
        convex: family.len() == 1 && family[0].profile.convex,
        positively_homogeneous: all(|p| p.positively_homogeneous),
        star_shaped: all(|p| p.star_shaped),
        lower_range_dominated: family.iter().any(|d| d.profile.lower_range_dominated),
        law_invariant: all(|p| p.law_invariant),
    };
    let name = format!(
        "min{{{}}}",
        family.iter().map(|d| d.name.as_str()).collect::<Vec<_>>().join(",")
    );
    let members = family.to_vec();
    Ok(DeviationFunctional::new(name, profile, move |x| {
        Ok(min_family(&members, x)?.0)
    }))
}

/// `min_i D_i(X)` with the attaining index (lowest index wins ties).
pub fn min_family<F: Functional>(family: &[F], x: &RandomVariable) -> Result<(f64, usize)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best = (f64::INFINITY, 0usize);
    let mut seen = false;
    for (i, d) in family.iter().enumerate() {
        let v = d.evaluate(x)?;
        if !seen || v < best.0 {
            best = (v, i);
            seen = true;
        }
    }
    Ok(best)
}

/// `D^alpha = (IQD^alpha)^2 + SD`.
pub fn composite_iqd_sq_plus_sd(alpha: f64) -> Result<DeviationFunctional> {
    let d = add(&square(&catalog::iqd(alpha)?), &catalog::sd());
    Ok(d.renamed(format!("iqd2+sd@{alpha}")))
}

/// `chi_R`: zero on constants, `+inf` elsewhere.
pub fn chi_constants() -> DeviationFunctional {
    catalog::chi_constants()
}
