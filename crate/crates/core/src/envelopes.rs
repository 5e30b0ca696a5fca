//! Acceptance sets, ray envelopes and minimum representations.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::axioms::generate::Generator;
use crate::axioms::{run_cases, AuditConfig, Case, Corpus, Fragment, Outcome, Property};
use crate::error::{Error, Result};
use crate::measures::{
    lower_range, scale_extended, DeviationFunctional, DeviationProfile, Functional,
};
use crate::space::{compensated_sum, ProbSpace, RandomVariable, VariableRecord};

pub use crate::measures::min_family;

/// Slack used by acceptance predicates `D(X) <= E[X]`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Relative residual allowed by the ray test.
pub const RAY_TOL: f64 = 1e-10;
/// Bisection width for [`deviation_of`].
pub const BISECTION_TOL: f64 = 1e-9;
/// Default bracket half-width for [`deviation_of`].
pub const DEFAULT_BRACKET: f64 = 1e6;

type Predicate = Arc<dyn Fn(&RandomVariable) -> bool + Send + Sync>;

/// Declared structure of an acceptance set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFlags {
    pub star_shaped: bool,
    pub convex: bool,
    pub cone: bool,
    pub monotone: bool,
}

/// A set of random variables given by a deterministic membership predicate.
#[derive(Clone)]
pub struct AcceptanceSet {
    contains: Predicate,
    flags: SetFlags,
    description: String,
}

impl fmt::Debug for AcceptanceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AcceptanceSet")
            .field("description", &self.description)
            .field("flags", &self.flags)
            .finish()
    }
}

impl AcceptanceSet {
    /// A cone flag implies the star-shaped flag.
    pub fn new<F>(description: impl Into<String>, mut flags: SetFlags, contains: F) -> Self
    where
        F: Fn(&RandomVariable) -> bool + Send + Sync + 'static,
    {
        flags.star_shaped |= flags.cone;
        Self {
            contains: Arc::new(contains),
            flags,
            description: description.into(),
        }
    }

    /// `{X : D(X) <= level}`. Evaluation errors count as rejection.
    pub fn sublevel(d: &DeviationFunctional, level: f64) -> Self {
        let p = d.profile();
        let flags = SetFlags {
            star_shaped: p.star_shaped && level >= 0.0,
            convex: p.convex,
            cone: false,
            monotone: false,
        };
        let inner = d.clone();
        Self::new(format!("{}<={level}", d.name()), flags, move |x| {
            matches!(inner.evaluate(x), Ok(v) if v <= level)
        })
    }

    /// Every variable.
    pub fn everything() -> Self {
        let flags = SetFlags {
            star_shaped: true,
            convex: true,
            cone: true,
            monotone: true,
        };
        Self::new("all", flags, |_| true)
    }

    pub fn contains(&self, x: &RandomVariable) -> bool {
        (self.contains)(x)
    }

    pub fn flags(&self) -> SetFlags {
        self.flags
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// `A_D = {X : D(X) <= E[X]}`.
pub fn acceptance_of(d: &DeviationFunctional) -> AcceptanceSet {
    let p = d.profile();
    let flags = SetFlags {
        star_shaped: p.star_shaped,
        convex: p.convex,
        cone: p.positively_homogeneous && p.star_shaped,
        monotone: p.lower_range_dominated,
    };
    let inner = d.clone();
    AcceptanceSet::new(format!("A[{}]", d.name()), flags, move |x| {
        matches!(inner.evaluate(x), Ok(v) if v <= x.expectation() + MEMBERSHIP_TOL)
    })
}

/// `D_A(X) = inf{m : X + m in A} + E[X]`, by bisection over `[m_lo, m_hi]`.
///
/// Membership is probed on a coarse grid first; non-monotone answers raise
/// [`Error::NotUpwardClosed`].
pub fn deviation_of(a: &AcceptanceSet, x: &RandomVariable, m_lo: f64, m_hi: f64) -> Result<f64> {
    if !(m_lo < m_hi && m_lo.is_finite() && m_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("bracket [{m_lo}, {m_hi}]")));
    }
    let inside = |m: f64| a.contains(&x.shift(m));
    let mut probes = vec![m_lo, 0.0, m_hi];
    for j in -6..=6 {
        let t = 10f64.powi(j);
        probes.extend([t, -t]);
    }
    probes.retain(|m| (m_lo..=m_hi).contains(m));
    probes.sort_by(f64::total_cmp);
    probes.dedup();
    let marks: Vec<(f64, bool)> = probes.iter().map(|&m| (m, inside(m))).collect();
    if let Some(&(member, _)) = marks.iter().find(|(_, inn)| *inn) {
        if let Some(&(rejected, _)) = marks.iter().find(|(m, inn)| *m > member && !inn) {
            return Err(Error::NotUpwardClosed { member, rejected });
        }
    }
    if marks[0].1 {
        return Err(Error::BracketTooSmall { m_lo });
    }
    if !marks[marks.len() - 1].1 {
        return Ok(f64::INFINITY);
    }
    let mut lo = marks.iter().rev().find(|(_, inn)| !inn).map(|p| p.0).unwrap_or(m_lo);
    let mut hi = marks.iter().find(|(_, inn)| *inn).map(|p| p.0).unwrap_or(m_hi);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi + x.expectation())
}

/// [`deviation_of`] with brackets `[-1e6, 1e6]`.
pub fn deviation_of_default(a: &AcceptanceSet, x: &RandomVariable) -> Result<f64> {
    deviation_of(a, x, -DEFAULT_BRACKET, DEFAULT_BRACKET)
}

/// Pool of candidate members: corpus variables and their shifts.
pub fn membership_pool(config: &AuditConfig) -> Vec<RandomVariable> {
    let corpus = Corpus::new(config);
    let mut pool = Vec::new();
    for x in corpus.variables() {
        pool.push(x.clone());
        pool.extend(config.shift_grid.iter().map(|&c| x.shift(c)));
    }
    pool
}

/// Checks `lambda X in A` for members `X` of the generated pool and `lambda` in the unit grid.
pub fn is_star_shaped_set(a: &AcceptanceSet, config: &AuditConfig) -> Fragment {
    is_star_shaped_set_on(a, &membership_pool(config), &config.unit_lambdas(), config.tolerance)
}

pub fn is_star_shaped_set_on(
    a: &AcceptanceSet,
    pool: &[RandomVariable],
    lambdas: &[f64],
    tol: f64,
) -> Fragment {
    let cases = pool.iter().filter(|x| a.contains(x)).flat_map(|x| {
        lambdas.iter().map(move |&lambda| Case::Membership { x: x.clone(), lambda })
    });
    let fragment = run_cases(Property::SetStarShaped, cases, tol, |case| match case {
        Case::Membership { x, lambda } => {
            let kept = if a.contains(&x.scale(*lambda)) { 1.0 } else { 0.0 };
            Ok(Outcome::eq(kept, 1.0))
        }
        _ => unreachable!("membership cases only"),
    });
    fragment.with_note(format!("set {}", a.description()))
}

/// The four envelope shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Star,
    Cone,
    Lrd,
    Halfline,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Self::Star),
            "cone" => Ok(Self::Cone),
            "lrd" => Ok(Self::Lrd),
            "halfline" => Ok(Self::Halfline),
            _ => Err(Error::InvalidParameter(format!("unknown envelope variant `{s}`"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Star => "star",
            Self::Cone => "cone",
            Self::Lrd => "lrd",
            Self::Halfline => "halfline",
        })
    }
}

/// Convex functional built from one anchor `Y` and its value `D(Y)`.
#[derive(Debug, Clone)]
pub struct RayEnvelope {
    anchor: RandomVariable,
    anchor_value: f64,
    variant: Variant,
    centered: Vec<f64>,
    norm2: f64,
    trivial: bool,
    name: String,
}

/// Serializable envelope description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRecord {
    pub anchor: VariableRecord,
    pub anchor_value: f64,
    pub variant: Variant,
}

fn inner(x: &[f64], y: &[f64], p: &[f64]) -> f64 {
    compensated_sum(x.iter().zip(y).zip(p).map(|((a, b), w)| w * a * b))
}

impl RayEnvelope {
    pub fn new(anchor: RandomVariable, anchor_value: f64, variant: Variant) -> Result<Self> {
        if !(anchor_value >= 0.0 && anchor_value.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "anchor value {anchor_value} must be finite and non-negative"
            )));
        }
        let c = anchor.center();
        let centered = c.values().to_vec();
        let norm2 = inner(&centered, &centered, anchor.probs());
        let trivial = anchor.is_constant() || norm2 == 0.0;
        Ok(Self {
            name: format!("ray[{variant}]"),
            anchor,
            anchor_value,
            variant,
            centered,
            norm2,
            trivial,
        })
    }

    pub fn anchor(&self) -> &RandomVariable {
        &self.anchor
    }

    pub fn anchor_value(&self) -> f64 {
        self.anchor_value
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn record(&self) -> EnvelopeRecord {
        EnvelopeRecord {
            anchor: (&self.anchor).into(),
            anchor_value: self.anchor_value,
            variant: self.variant,
        }
    }

    /// `lambda` with `center(X) = lambda center(Y)`, if the residual test passes.
    pub fn ray_coefficient(&self, x: &RandomVariable) -> Option<f64> {
        if !x.same_space(&self.anchor) || self.trivial {
            return None;
        }
        let xc = x.center();
        let lambda = inner(xc.values(), &self.centered, x.probs()) / self.norm2;
        let residual = xc
            .values()
            .iter()
            .zip(&self.centered)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max);
        let scale = x.sup_norm().max(f64::MIN_POSITIVE);
        if residual > RAY_TOL * scale {
            return None;
        }
        // Report the ratio across the anchor's extreme atoms: equal to the
        // least-squares value on the ray, and exact for commensurate data.
        let y = self.anchor.values();
        let (mut lo, mut hi) = (0, 0);
        for (i, v) in y.iter().enumerate() {
            if *v < y[lo] {
                lo = i;
            }
            if *v > y[hi] {
                hi = i;
            }
        }
        let xv = x.values();
        Some((xv[hi] - xv[lo]) / (y[hi] - y[lo]))
    }

    pub fn eval(&self, x: &RandomVariable) -> f64 {
        if !x.same_space(&self.anchor) {
            return f64::INFINITY;
        }
        if self.variant == Variant::Lrd {
            return self.eval_lrd(x);
        }
        if self.trivial {
            return if x.is_constant() { 0.0 } else { f64::INFINITY };
        }
        if self.variant != Variant::Halfline && x.is_constant() {
            return 0.0;
        }
        let Some(lambda) = self.ray_coefficient(x) else {
            return f64::INFINITY;
        };
        let d = self.anchor_value;
        match self.variant {
            Variant::Star if (-RAY_TOL..=1.0 + RAY_TOL).contains(&lambda) => {
                scale_extended(lambda.clamp(0.0, 1.0), d)
            }
            Variant::Cone if lambda >= -RAY_TOL => scale_extended(lambda.max(0.0), d),
            Variant::Halfline if (lambda - 1.0).abs() <= RAY_TOL => d,
            _ => f64::INFINITY,
        }
    }

    /// `min_{lambda in [0,1]} ess sup(lambda Z - X) + E[X]` with `Z = center(Y) + D(Y)`.
    ///
    /// The objective is the upper envelope of the lines `lambda Z_i - X_i`;
    /// its minimum over `[0, 1]` sits at an endpoint or a hull vertex.
    fn eval_lrd(&self, x: &RandomVariable) -> f64 {
        let z: Vec<f64> = self.centered.iter().map(|c| c + self.anchor_value).collect();
        let lines: Vec<(f64, f64)> = z.iter().zip(x.values()).map(|(&a, &b)| (a, -b)).collect();
        let objective = |l: f64| lines.iter().map(|(a, b)| l * a + b).fold(f64::NEG_INFINITY, f64::max);
        let best = upper_hull_vertices(&lines)
            .into_iter()
            .filter(|l| (0.0..=1.0).contains(l))
            .chain([0.0, 1.0])
            .map(objective)
            .fold(f64::INFINITY, f64::min);
        best + x.expectation()
    }

    /// Wraps the envelope as a deviation functional.
    pub fn to_deviation(&self) -> DeviationFunctional {
        let positive = self.anchor_value > 0.0 && !self.trivial;
        let profile = DeviationProfile {
            non_negative: positive && self.variant != Variant::Halfline,
            translation_insensitive: true,
            convex: true,
            positively_homogeneous: self.variant == Variant::Cone,
            star_shaped: self.variant != Variant::Halfline,
            lower_range_dominated: self.variant == Variant::Lrd,
            law_invariant: false,
        };
        let env = self.clone();
        DeviationFunctional::infallible(self.name.clone(), profile, move |x| env.eval(x))
    }

    /// Points `lambda center(Y) + c` where the finite part of the envelope lives.
    pub fn locus(&self, lambdas: &[f64], shifts: &[f64]) -> Vec<RandomVariable> {
        let yc = self.anchor.center();
        let mut out = Vec::new();
        for &l in lambdas {
            let base = yc.scale(l);
            out.push(base.clone());
            out.extend(shifts.iter().map(|&c| base.shift(c)));
        }
        out
    }
}

impl Functional for RayEnvelope {
    fn name(&self) -> &str {
        &self.name
    }
    fn evaluate(&self, x: &RandomVariable) -> Result<f64> {
        Ok(self.eval(x))
    }
}

/// Abscissae of the vertices of the upper envelope of `a x + b`.
fn upper_hull_vertices(lines: &[(f64, f64)]) -> Vec<f64> {
    let mut sorted = lines.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    // for equal slopes keep the highest intercept
    let mut uniq: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for l in sorted {
        match uniq.last_mut() {
            Some(last) if last.0 == l.0 => *last = l,
            _ => uniq.push(l),
        }
    }
    let cross = |p: (f64, f64), q: (f64, f64)| (p.1 - q.1) / (q.0 - p.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for l in uniq {
        while hull.len() >= 2 {
            let (p, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if cross(p, l) <= cross(p, q) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }
    hull.windows(2).map(|w| cross(w[0], w[1])).collect()
}

pub fn ray_envelope(y: &RandomVariable, d_y: f64, variant: Variant) -> Result<RayEnvelope> {
    RayEnvelope::new(y.clone(), d_y, variant)
}

pub fn ray_envelope_lrd(y: &RandomVariable, d_y: f64) -> Result<RayEnvelope> {
    RayEnvelope::new(y.clone(), d_y, Variant::Lrd)
}

/// Envelopes of `variant` anchored at every `Y` in `anchors`, valued at `D(Y)`.
pub fn envelope_family(
    d: &dyn Functional,
    anchors: &[RandomVariable],
    variant: Variant,
) -> Result<Vec<RayEnvelope>> {
    anchors
        .iter()
        .map(|y| RayEnvelope::new(y.clone(), d.evaluate(y)?, variant))
        .collect()
}

/// Checks `D(P) <= env(P)` on the envelope's finite-value locus.
pub fn verify_domination(d: &dyn Functional, env: &RayEnvelope, config: &AuditConfig) -> Fragment {
    let lambdas: Vec<f64> = match env.variant {
        Variant::Star => config.unit_lambdas(),
        Variant::Halfline => vec![1.0],
        Variant::Cone | Variant::Lrd => config.lambda_grid.clone(),
    };
    let points = env.locus(&lambdas, &config.shift_grid);
    let cases = points.into_iter().map(|x| Case::Single { x });
    run_cases(Property::EnvelopeDomination, cases, config.tolerance, |case| match case {
        Case::Single { x } => Ok(Outcome::le(d.evaluate(x)?, env.eval(x))),
        _ => unreachable!("single cases only"),
    })
}

/// Checks `env(lambda P + (1 - lambda) Q) <= lambda env(P) + (1 - lambda) env(Q)` over locus pairs.
pub fn check_locus_convexity(env: &RayEnvelope, config: &AuditConfig) -> Fragment {
    let lambdas: Vec<f64> = match env.variant {
        Variant::Halfline => vec![1.0],
        Variant::Star => config.unit_lambdas(),
        _ => config.lambda_grid.clone(),
    };
    let points: Vec<RandomVariable> = env
        .locus(&lambdas, &config.shift_grid)
        .into_iter()
        .filter(|p| env.eval(p).is_finite())
        .collect();
    let mut cases = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            for &lambda in &config.unit_lambdas() {
                cases.push(Case::Mix { x: p.clone(), y: q.clone(), lambda });
            }
        }
    }
    run_cases(Property::LocusConvexity, cases, config.tolerance, |case| match case {
        Case::Mix { x, y, lambda } => {
            let l = *lambda;
            let rhs = scale_extended(l, env.eval(x)) + scale_extended(1.0 - l, env.eval(y));
            Ok(Outcome::le(env.eval(&x.mix(y, l)?), rhs))
        }
        _ => unreachable!("mix cases only"),
    })
}

/// `X in A_D  <=>  X in A_{D_i} for some i  <=>  -E[X] + D(X) <= tol`, on `pool`.
///
/// Variables where any evaluated quantity is infinite are skipped.
pub fn acceptance_union_identity<F: Functional>(
    d: &dyn Functional,
    family: &[F],
    pool: &[RandomVariable],
    tol: f64,
) -> Fragment {
    let cases = pool.iter().map(|x| Case::Single { x: x.clone() });
    let mut skipped = 0usize;
    let mut fragment = run_cases(Property::AcceptanceUnion, cases, tol, |case| {
        let Case::Single { x } = case else { unreachable!("single cases only") };
        let e = x.expectation();
        let dx = d.evaluate(x)?;
        let members: Vec<f64> = family.iter().map(|f| f.evaluate(x)).collect::<Result<_>>()?;
        if !dx.is_finite() || members.iter().any(|v| !v.is_finite()) {
            skipped += 1;
            return Ok(Outcome::eq(0.0, 0.0));
        }
        let in_d = dx <= e + MEMBERSHIP_TOL;
        let in_union = members.iter().any(|&v| v <= e + MEMBERSHIP_TOL);
        let in_rho = -e + dx <= MEMBERSHIP_TOL;
        let agree = in_d == in_union && in_d == in_rho;
        Ok(Outcome::eq(if agree { 0.0 } else { 1.0 }, 0.0))
    });
    if skipped > 0 {
        fragment = fragment.with_note(format!("{skipped} variables with infinite values skipped"));
    }
    fragment
}

/// Pool for the union identity: corpus variables and their non-negative shifts.
pub fn union_pool(config: &AuditConfig) -> Vec<RandomVariable> {
    let corpus = Corpus::new(config);
    let mut pool = Vec::new();
    for x in corpus.variables() {
        pool.push(x.clone());
        pool.extend(config.shift_grid.iter().filter(|c| **c >= 0.0).map(|&c| x.shift(c)));
    }
    pool
}

/// `max_X |min_i env_i(X) - D(X)|` over `pool`, with the family extended by each `X`'s own envelope.
pub fn attainment_residual(
    d: &dyn Functional,
    anchors: &[RandomVariable],
    pool: &[RandomVariable],
    variant: Variant,
) -> Result<f64> {
    let family = envelope_family(d, anchors, variant)?;
    let mut worst: f64 = 0.0;
    for x in pool {
        let own = RayEnvelope::new(x.clone(), d.evaluate(x)?, variant)?;
        let (m, _) = min_family(&family, x)?;
        let m = m.min(own.eval(x));
        let r = m - d.evaluate(x)?;
        worst = worst.max(if r == 0.0 { 0.0 } else { r.abs() });
    }
    Ok(worst)
}

/// Seeded anchors on a shared space, used by envelope demonstrations.
pub fn seeded_anchors(config: &AuditConfig, count: usize, stream: &str) -> Vec<RandomVariable> {
    let mut g = Generator::new(config, stream);
    let space = g.space();
    (0..count).filter_map(|_| g.non_constant_on(&space)).collect()
}

/// Seeded non-constant variables on a given space.
pub fn seeded_variables_on(
    config: &AuditConfig,
    space: &Arc<ProbSpace>,
    count: usize,
    stream: &str,
) -> Vec<RandomVariable> {
    let mut g = Generator::new(config, stream);
    (0..count).filter_map(|_| g.non_constant_on(space)).collect()
}

/// `E[X] - ess inf X` bound satisfied by LRD envelopes.
pub fn lrd_bound(x: &RandomVariable) -> f64 {
    lower_range(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{add, catalog, composite_iqd_sq_plus_sd, min_of, scale_functional};

    fn fair(v: &[f64]) -> RandomVariable {
        RandomVariable::uniform(v.to_vec()).unwrap()
    }

    fn small() -> AuditConfig {
        AuditConfig {
            n_variables: 40,
            n_pairs: 40,
            ..AuditConfig::default()
        }
    }

    #[test]
    fn acceptance_examples() {
        let a = acceptance_of(&catalog::sd());
        assert!(a.contains(&fair(&[0.0, 4.0])));
        assert!(!a.contains(&fair(&[-1.0, 1.0])));
        assert!(a.contains(&fair(&[1.0, 1.0])));
        assert!(a.flags().star_shaped && a.flags().cone);
    }

    #[test]
    fn deviation_of_round_trips() {
        let x = fair(&[0.0, 3.0, 1.0, -2.0]);
        let a = acceptance_of(&catalog::sd());
        let v = deviation_of_default(&a, &x).unwrap();
        assert!((v - crate::measures::sd(&x)).abs() < 1e-8);
        assert!(deviation_of_default(&a, &fair(&[2.0, 2.0])).unwrap().abs() < 1e-8);
        let (rx, _, _) = crate::axioms::generate::counterexample_triple(20);
        let d = composite_iqd_sq_plus_sd(0.4).unwrap();
        let v = deviation_of_default(&acceptance_of(&d), &rx).unwrap();
        assert!((v - d.evaluate(&rx).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn deviation_of_errors() {
        let x = fair(&[0.0, 1.0]);
        let a = acceptance_of(&catalog::sd());
        assert_eq!(deviation_of(&a, &x, 10.0, 20.0), Err(Error::BracketTooSmall { m_lo: 10.0 }));
        assert_eq!(deviation_of(&a, &x, -20.0, -10.0).unwrap(), f64::INFINITY);
        let band = AcceptanceSet::new("band", SetFlags::default(), |x| {
            (0.0..=1.0).contains(&x.expectation())
        });
        assert!(matches!(deviation_of_default(&band, &x), Err(Error::NotUpwardClosed { .. })));
    }

    #[test]
    fn star_shaped_sets() {
        let cfg = small();
        assert!(is_star_shaped_set(&acceptance_of(&catalog::sd()), &cfg).passed());
        assert!(is_star_shaped_set(&AcceptanceSet::everything(), &cfg).passed());
        let band = AcceptanceSet::new("fr-band", SetFlags::default(), |x| {
            (1.0..=2.0).contains(&crate::measures::full_range(x))
        });
        let f = is_star_shaped_set_on(&band, &[fair(&[0.0, 1.5])], &cfg.unit_lambdas(), 1e-9);
        assert!(f.failed());
        assert!(matches!(f.witnesses[0].case, Case::Membership { lambda, .. } if lambda < 0.5));
    }

    #[test]
    fn containment_in_induced_acceptance_set() {
        // A star-shaped set is contained in the acceptance set of its induced deviation
        let a = acceptance_of(&catalog::sd_minus());
        let induced = catalog::sd_minus();
        for x in membership_pool(&small()).iter().filter(|x| a.contains(x)) {
            assert!(acceptance_of(&induced).contains(x));
        }
    }

    #[test]
    fn star_and_cone_envelopes() {
        let y = fair(&[0.0, 1.0, 3.0]);
        let dy = 2.5;
        let star = ray_envelope(&y, dy, Variant::Star).unwrap();
        assert_eq!(star.eval(&y), dy);
        assert_eq!(star.eval(&fair(&[4.0, 4.0, 4.0])), 0.0);
        assert_eq!(star.eval(&y.scale(0.5)), 0.5 * dy);
        assert_eq!(star.eval(&y.scale(2.0)), f64::INFINITY);
        assert_eq!(star.eval(&fair(&[1.0, 0.0, 3.0])), f64::INFINITY);
        let cone = ray_envelope(&y, dy, Variant::Cone).unwrap();
        assert!((cone.eval(&y.scale(3.0).shift(5.0)) - 3.0 * dy).abs() < 1e-12);
        let half = ray_envelope(&y, dy, Variant::Halfline).unwrap();
        assert_eq!(half.eval(&y.shift(-7.0)), dy);
        assert_eq!(half.eval(&y.scale(0.5)), f64::INFINITY);
        assert_eq!(half.eval(&fair(&[1.0, 1.0, 1.0])), f64::INFINITY);
        let other_space = RandomVariable::uniform(vec![0.0, 1.0]).unwrap();
        assert_eq!(star.eval(&other_space), f64::INFINITY);
    }

    #[test]
    fn cone_value_matches_bisection_over_the_set() {
        // A_Y for the cone is {t (Yc + dY) + r : t >= 0, r >= 0 constant}; D_A(X) = inf{m : X + m in A} + E X
        let y = fair(&[0.0, 1.0, 3.0]);
        let dy = 2.5;
        let yc = y.center();
        let x = y.scale(3.0).shift(5.0);
        let inside = |m: f64| {
            let w = x.shift(m);
            let xc = w.center();
            let t = 3.0;
            let rest: Vec<f64> = xc.values().iter().zip(yc.values()).map(|(a, b)| a - t * b).collect();
            rest.iter().all(|r| r.abs() < 1e-12) && w.expectation() - t * dy >= -1e-12
        };
        let (mut lo, mut hi) = (-100.0, 100.0);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) { hi = mid } else { lo = mid }
        }
        let oracle = hi + x.expectation();
        let cone = ray_envelope(&y, dy, Variant::Cone).unwrap();
        assert!((cone.eval(&x) - oracle).abs() < 1e-9);
    }

    #[test]
    fn trivial_envelope_for_constant_anchor() {
        let y = fair(&[2.0, 2.0]);
        let e = ray_envelope(&y, 0.0, Variant::Star).unwrap();
        assert_eq!(e.eval(&fair(&[1.0, 1.0])), 0.0);
        assert_eq!(e.eval(&fair(&[0.0, 1.0])), f64::INFINITY);
    }

    fn lrd_brute(y: &RandomVariable, dy: f64, x: &RandomVariable) -> f64 {
        let yc = y.center();
        let z: Vec<f64> = yc.values().iter().map(|v| v + dy).collect();
        let xs = x.values();
        let f = |l: f64| (0..xs.len()).map(|i| l * z[i] - xs[i]).fold(f64::NEG_INFINITY, f64::max);
        let mut candidates = vec![0.0, 1.0];
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if z[i] != z[j] {
                    let l = (xs[i] - xs[j]) / (z[i] - z[j]);
                    if (0.0..=1.0).contains(&l) {
                        candidates.push(l);
                    }
                }
            }
        }
        candidates.into_iter().map(f).fold(f64::INFINITY, f64::min) + x.expectation()
    }

    #[test]
    fn lrd_envelope_matches_brute_force() {
        let cfg = small();
        let mut g = Generator::new(&cfg, "lrd-test");
        for _ in 0..200 {
            let space = g.space();
            let Some(y) = g.non_constant_on(&space) else { continue };
            let x = g.variable_on(&space);
            let dy = catalog::sd().evaluate(&y).unwrap();
            let env = ray_envelope_lrd(&y, dy).unwrap();
            let got = env.eval(&x);
            let want = lrd_brute(&y, dy, &x);
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            assert!(got <= lower_range(&x) + 1e-10);
        }
    }

    #[test]
    fn lrd_envelope_examples() {
        let y = fair(&[0.0, 1.0, 5.0]);
        let dy = 1.5;
        let env = ray_envelope_lrd(&y, dy).unwrap();
        let z = y.center().shift(dy);
        assert!(env.eval(&z) <= dy + 1e-12);
        assert!(env.eval(&fair(&[3.0, 3.0, 3.0])).abs() < 1e-12);
    }

    #[test]
    fn min_family_tie_rule_and_attainment() {
        let fam = vec![catalog::fr(), scale_functional(&catalog::sd(), 2.0).unwrap()];
        let x = fair(&[-2.0, 2.0]);
        assert_eq!(min_family(&fam, &x).unwrap(), (4.0, 0));
        let d = composite_iqd_sq_plus_sd(0.4).unwrap();
        let env = ray_envelope(&x, d.evaluate(&x).unwrap(), Variant::Star).unwrap();
        assert_eq!(min_family(&[env], &x).unwrap().0, d.evaluate(&x).unwrap());
    }

    #[test]
    fn domination_on_locus() {
        let cfg = small();
        let d = composite_iqd_sq_plus_sd(0.4).unwrap();
        for y in seeded_anchors(&cfg, 10, "dom") {
            let env = ray_envelope(&y, d.evaluate(&y).unwrap(), Variant::Star).unwrap();
            assert!(verify_domination(&d, &env, &cfg).passed());
        }
        let iqd = add(&catalog::iqd(0.4).unwrap(), &catalog::sd());
        for y in seeded_anchors(&cfg, 10, "cone") {
            let env = ray_envelope(&y, iqd.evaluate(&y).unwrap(), Variant::Cone).unwrap();
            assert!(verify_domination(&iqd, &env, &cfg).passed());
        }
    }

    #[test]
    fn union_identity_for_min_family() {
        let cfg = small();
        let fam = vec![scale_functional(&catalog::sd(), 2.0).unwrap(), catalog::fr()];
        let d = min_of(&fam).unwrap();
        let f = acceptance_union_identity(&d, &fam, &union_pool(&cfg), cfg.tolerance);
        assert!(f.passed());
        let single = [catalog::sd()];
        assert!(acceptance_union_identity(&catalog::sd(), &single, &union_pool(&cfg), 1e-9).passed());
    }

    #[test]
    fn halfline_envelopes_reproduce_proper_d() {
        let cfg = small();
        let d = composite_iqd_sq_plus_sd(0.4).unwrap();
        let pool = seeded_anchors(&cfg, 20, "half");
        let mut fam: Vec<DeviationFunctional> = envelope_family(&d, &pool, Variant::Halfline)
            .unwrap()
            .iter()
            .map(RayEnvelope::to_deviation)
            .collect();
        fam.push(catalog::chi_constants());
        for x in &pool {
            assert_eq!(min_family(&fam, x).unwrap().0, d.evaluate(x).unwrap());
        }
        let env = ray_envelope(&pool[0], d.evaluate(&pool[0]).unwrap(), Variant::Halfline).unwrap();
        assert!(check_locus_convexity(&env, &cfg).passed());
    }

    #[test]
    fn attainment_residual_is_zero() {
        let cfg = small();
        let d = add(&catalog::iqd(0.3).unwrap(), &catalog::sd());
        let anchors = seeded_anchors(&cfg, 20, "anchors");
        let tests = seeded_variables_on(&cfg, anchors[0].space(), 20, "anchors-x");
        assert_eq!(tests.len(), 20);
        assert_eq!(attainment_residual(&d, &anchors, &tests, Variant::Star).unwrap(), 0.0);
    }
}
