use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Functional, RiskFunctional};
use crate::envelopes::AcceptanceSet;
use crate::error::{Error, Result};
use crate::space::{compensated_sum, RandomVariable};

/// Default search ceiling for Minkowski gauges.
pub const DEFAULT_GAUGE_CEILING: f64 = 1e6;
const GAUGE_TOL: f64 = 1e-9;

fn centered_moment(x: &RandomVariable, part: impl Fn(f64) -> f64) -> f64 {
    let xc = x.center();
    let m2 = compensated_sum(
        xc.values()
            .iter()
            .zip(x.probs())
            .map(|(&v, &p)| p * part(v) * part(v)),
    );
    m2.sqrt()
}

/// `SD(X) = E[(X - E X)^2]^{1/2}`.
pub fn sd(x: &RandomVariable) -> f64 {
    centered_moment(x, |v| v)
}

/// Lower semi-deviation.
pub fn sd_minus(x: &RandomVariable) -> f64 {
    centered_moment(x, |v| v.min(0.0))
}

/// Upper semi-deviation.
pub fn sd_plus(x: &RandomVariable) -> f64 {
    centered_moment(x, |v| v.max(0.0))
}

pub fn full_range(x: &RandomVariable) -> f64 {
    x.ess_sup() - x.ess_inf()
}

/// `E[X] - ess inf X`.
pub fn lower_range(x: &RandomVariable) -> f64 {
    (x.expectation() - x.ess_inf()).max(0.0)
}

/// `ess sup X - E[X]`.
pub fn upper_range(x: &RandomVariable) -> f64 {
    (x.ess_sup() - x.expectation()).max(0.0)
}

fn open_unit(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(alpha))
    }
}

fn lower_half(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(alpha))
    }
}

/// `VaR^alpha(X) = -F_X^{-1}(alpha)`.
pub fn var_alpha(x: &RandomVariable, alpha: f64) -> Result<f64> {
    open_unit(alpha)?;
    Ok(-x.distribution().quantile(alpha))
}

/// `ES^alpha(X) = (1/alpha) \int_0^alpha VaR^s(X) ds`, exact on the cumulative breakpoints.
pub fn es_alpha(x: &RandomVariable, alpha: f64) -> Result<f64> {
    open_unit(alpha)?;
    Ok(-x.distribution().lower_tail_integral(alpha) / alpha)
}

/// `IQD^alpha(X) = VaR^alpha(X) - VaR^{1-alpha}(X)` for `alpha` in `(0, 1/2)`.
pub fn iqd(x: &RandomVariable, alpha: f64) -> Result<f64> {
    lower_half(alpha)?;
    let d = x.distribution();
    Ok((d.quantile(1.0 - alpha) - d.quantile(alpha)).max(0.0))
}

/// Inter-ES difference: mean of the upper `alpha`-tail minus mean of the lower `alpha`-tail,
/// i.e. `ES^alpha(X) + ES^alpha(-X)`. Dominates `IQD^alpha` and is convex.
pub fn ied(x: &RandomVariable, alpha: f64) -> Result<f64> {
    lower_half(alpha)?;
    let lower = es_alpha(x, alpha)?;
    let upper = es_alpha(&x.negate(), alpha)?;
    Ok((lower + upper).max(0.0))
}

/// Right-continuous non-decreasing step function `u -> alpha(u)` on `[0, inf)`.
///
/// Breakpoint `(u_k, a_k)` sets `alpha(u) = a_k` for `u` in `[u_k, u_{k+1})`;
/// the last level extends to infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct BenchmarkCurve {
    breakpoints: Vec<(f64, f64)>,
}

impl BenchmarkCurve {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(u0, _)) = breakpoints.first() else {
            return Err(Error::InvalidCurve("no breakpoints".into()));
        };
        if u0 != 0.0 {
            return Err(Error::InvalidCurve(format!("first breakpoint must be at u = 0, got {u0}")));
        }
        for &(u, a) in &breakpoints {
            if !u.is_finite() || !(a > 0.0 && a <= 1.0) {
                return Err(Error::InvalidCurve(format!("bad breakpoint ({u}, {a})")));
            }
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidCurve("u values must be strictly increasing".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidCurve("alpha must be non-decreasing".into()));
            }
        }
        Ok(Self { breakpoints })
    }

    pub fn constant(alpha: f64) -> Result<Self> {
        Self::new(vec![(0.0, alpha)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn alpha_at(&self, u: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&(b, _)| b <= u);
        self.breakpoints[k.saturating_sub(1)].1
    }
}

impl TryFrom<Vec<(f64, f64)>> for BenchmarkCurve {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BenchmarkCurve> for Vec<(f64, f64)> {
    fn from(c: BenchmarkCurve) -> Self {
        c.breakpoints
    }
}

impl fmt::Display for BenchmarkCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .breakpoints
            .iter()
            .map(|(u, a)| format!("{u}:{a}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `u0:a0,u1:a1,...`.
impl FromStr for BenchmarkCurve {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCurve(format!("cannot parse `{s}`"));
        let mut pts = Vec::new();
        for part in s.split(',') {
            let (u, a) = part.split_once(':').ok_or_else(bad)?;
            let u: f64 = u.trim().parse().map_err(|_| bad())?;
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            pts.push((u, a));
        }
        Self::new(pts)
    }
}

/// `LVaRD(X) = sup_{u >= 0} { -F^{-1}_{X - E X}(alpha(u)) - u }`.
///
/// On each step of the curve the objective decreases in `u`, so the supremum
/// is attained at one of the breakpoints.
pub fn lvar_d(x: &RandomVariable, curve: &BenchmarkCurve) -> f64 {
    let dist = x.center().distribution().clone();
    curve
        .breakpoints()
        .iter()
        .map(|&(u, a)| -dist.quantile(a) - u)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

/// `f(X - E[X])`.
pub fn regular_based(f: &RiskFunctional, x: &RandomVariable) -> Result<f64> {
    f.evaluate(&x.center())
}

/// `f((X - E[X])^-)` with the signed negative part `min(., 0)`.
pub fn ld_f(f: &RiskFunctional, x: &RandomVariable) -> Result<f64> {
    f.evaluate(&x.center().negative_part())
}

/// `f((X - E[X])^+)`.
pub fn ud_f(f: &RiskFunctional, x: &RandomVariable) -> Result<f64> {
    f.evaluate(&x.center().positive_part())
}

/// `|| (X - b(X))^- ||_p` with benchmark `b(X) = -rho(X)`, `p` in `[1, inf]`.
pub fn loss_deviation(rho: &RiskFunctional, p: f64, x: &RandomVariable) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("norm exponent {p} must be in [1, inf]")));
    }
    let r = rho.evaluate(x)?;
    let shortfall = x.values().iter().map(move |&v| (-(v + r)).max(0.0));
    if p.is_infinite() {
        return Ok(shortfall.fold(0.0, f64::max));
    }
    let moment = compensated_sum(shortfall.zip(x.probs()).map(|(s, &w)| w * s.powf(p)));
    Ok(moment.powf(1.0 / p))
}

/// `MD_A(X) = inf{ m > 0 : X/m in A }` by bisection on `(0, m_max]`.
///
/// Returns `+inf` if `X/m_max` is rejected. The predicate is probed on a
/// geometric grid first; a rejection above an acceptance means `A` is not
/// star-shaped along this ray.
pub fn minkowski(a: &AcceptanceSet, x: &RandomVariable, m_max: f64) -> Result<f64> {
    if !(m_max > 0.0) {
        return Err(Error::InvalidParameter(format!("gauge ceiling {m_max} must be positive")));
    }
    let accepts = |m: f64| a.contains(&x.scale(1.0 / m));
    let probes: Vec<f64> = (0..=24).rev().map(|j| m_max * 10f64.powi(-j)).collect();
    let mut lowest_member: Option<f64> = None;
    for &m in &probes {
        match (accepts(m), lowest_member) {
            (true, None) => lowest_member = Some(m),
            (false, Some(member)) => return Err(Error::NotStarShapedSet { member, rejected: m }),
            _ => {}
        }
    }
    if !accepts(m_max) {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0, m_max);
    while hi - lo > GAUGE_TOL {
        let mid = 0.5 * (lo + hi);
        if accepts(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if lowest_member == Some(probes[0]) && hi <= GAUGE_TOL {
        0.0
    } else {
        hi
    })
}
