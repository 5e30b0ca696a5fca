//! Factories for the named catalog functionals.

use super::formulas as f;
use super::{
    BenchmarkCurve, DeviationFunctional, DeviationProfile, Functional, RiskFunctional, RiskProfile,
};
use crate::envelopes::AcceptanceSet;
use crate::error::{Error, Result};
use crate::space::RandomVariable;

const NOT_NON_NEGATIVE: DeviationProfile = DeviationProfile {
    non_negative: false,
    ..DeviationProfile::GENERALIZED
};

pub fn sd() -> DeviationFunctional {
    DeviationFunctional::infallible("sd", DeviationProfile::GENERALIZED, f::sd)
}

pub fn sd_minus() -> DeviationFunctional {
    DeviationFunctional::infallible("sd_minus", DeviationProfile::GENERALIZED.lrd(), f::sd_minus)
}

pub fn sd_plus() -> DeviationFunctional {
    DeviationFunctional::infallible("sd_plus", DeviationProfile::GENERALIZED, f::sd_plus)
}

pub fn fr() -> DeviationFunctional {
    DeviationFunctional::infallible("fr", DeviationProfile::GENERALIZED, f::full_range)
}

pub fn lr() -> DeviationFunctional {
    DeviationFunctional::infallible("lr", DeviationProfile::GENERALIZED.lrd(), f::lower_range)
}

pub fn ur() -> DeviationFunctional {
    DeviationFunctional::infallible("ur", DeviationProfile::GENERALIZED, f::upper_range)
}

/// Interquantile difference; vanishes on some non-constant variables.
pub fn iqd(alpha: f64) -> Result<DeviationFunctional> {
    check(alpha, f::iqd)?;
    let profile = DeviationProfile {
        convex: false,
        ..NOT_NON_NEGATIVE
    };
    Ok(DeviationFunctional::new(format!("iqd@{alpha}"), profile, move |x| {
        f::iqd(x, alpha)
    }))
}

/// Inter-ES difference.
pub fn ied(alpha: f64) -> Result<DeviationFunctional> {
    check(alpha, f::ied)?;
    Ok(DeviationFunctional::new(
        format!("ied@{alpha}"),
        NOT_NON_NEGATIVE.lrd(),
        move |x| f::ied(x, alpha),
    ))
}

pub fn lvard(curve: BenchmarkCurve) -> DeviationFunctional {
    let constant_alpha = curve.breakpoints().len() == 1;
    let profile = DeviationProfile {
        non_negative: false,
        convex: false,
        positively_homogeneous: constant_alpha,
        ..DeviationProfile::GENERALIZED.lrd()
    };
    DeviationFunctional::infallible(format!("lvard@{curve}"), profile, move |x| {
        f::lvar_d(x, &curve)
    })
}

pub fn chi_constants() -> DeviationFunctional {
    DeviationFunctional::infallible("chi_const", DeviationProfile::GENERALIZED, |x| {
        if x.is_constant() {
            0.0
        } else {
            f64::INFINITY
        }
    })
}

/// `D_f(X) = f(X - E X)` for a monotone star-shaped `f`.
pub fn regular_based(rho: &RiskFunctional) -> DeviationFunctional {
    let r = rho.clone();
    let profile = DeviationProfile {
        non_negative: true,
        translation_insensitive: true,
        convex: rho.profile().convex,
        positively_homogeneous: rho.profile().positively_homogeneous,
        star_shaped: rho.profile().star_shaped,
        lower_range_dominated: rho.profile().monotone,
        law_invariant: rho.profile().law_invariant,
    };
    DeviationFunctional::new(format!("rbd[{}]", rho.name()), profile, move |x| {
        f::regular_based(&r, x)
    })
}

pub fn ld(rho: &RiskFunctional) -> DeviationFunctional {
    let r = rho.clone();
    let profile = DeviationProfile {
        convex: false,
        ..regular_based(rho).profile()
    };
    DeviationFunctional::new(format!("ld[{}]", rho.name()), profile, move |x| {
        f::ld_f(&r, x)
    })
}

pub fn ud(rho: &RiskFunctional) -> DeviationFunctional {
    let r = rho.clone();
    let profile = DeviationProfile {
        convex: false,
        lower_range_dominated: false,
        ..regular_based(rho).profile()
    };
    DeviationFunctional::new(format!("ud[{}]", rho.name()), profile, move |x| {
        f::ud_f(&r, x)
    })
}

/// `|| (X + rho(X))^- ||_p`.
pub fn loss_deviation(rho: &RiskFunctional, p: f64) -> Result<DeviationFunctional> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("norm exponent {p} must be in [1, inf]")));
    }
    let r = rho.clone();
    let profile = DeviationProfile {
        convex: false,
        lower_range_dominated: true,
        ..DeviationProfile::GENERALIZED
    };
    Ok(DeviationFunctional::new(
        format!("lossdev[{},{p}]", rho.name()),
        profile,
        move |x| f::loss_deviation(&r, p, x),
    ))
}

/// Minkowski gauge of a star-shaped set.
pub fn minkowski(set: AcceptanceSet, m_max: f64) -> DeviationFunctional {
    let profile = DeviationProfile {
        convex: set.flags().convex,
        ..DeviationProfile::GENERALIZED
    };
    DeviationFunctional::new(format!("md[{}]", set.description()), profile, move |x| {
        f::minkowski(&set, x, m_max)
    })
}

/// `rho(X) = -E[X]`.
pub fn neg_mean() -> RiskFunctional {
    RiskFunctional::infallible("neg_mean", RiskProfile::COHERENT, |x| -x.expectation())
}

/// `rho(X) = -ess inf X`.
pub fn neg_ess_inf() -> RiskFunctional {
    RiskFunctional::infallible("neg_ess_inf", RiskProfile::COHERENT, |x| -x.ess_inf())
}

/// `f(X) = ess sup X`; increasing rather than decreasing, used as the upper-range generator.
pub fn ess_sup_risk() -> RiskFunctional {
    let profile = RiskProfile {
        monotone: false,
        translation_invariant: false,
        ..RiskProfile::COHERENT
    };
    RiskFunctional::infallible("ess_sup", profile, |x| x.ess_sup())
}

pub fn var_risk(alpha: f64) -> Result<RiskFunctional> {
    check(alpha, f::var_alpha)?;
    let profile = RiskProfile {
        convex: false,
        ..RiskProfile::COHERENT
    };
    Ok(RiskFunctional::new(format!("var@{alpha}"), profile, move |x| {
        f::var_alpha(x, alpha)
    }))
}

pub fn es_risk(alpha: f64) -> Result<RiskFunctional> {
    check(alpha, f::es_alpha)?;
    Ok(RiskFunctional::new(format!("es@{alpha}"), RiskProfile::COHERENT, move |x| {
        f::es_alpha(x, alpha)
    }))
}

/// Validates a level parameter by evaluating once on a one-atom variable.
fn check(alpha: f64, eval: fn(&RandomVariable, f64) -> Result<f64>) -> Result<()> {
    let probe = RandomVariable::uniform(vec![0.0])?;
    eval(&probe, alpha).map(|_| ())
}
