//! Risk/deviation transforms, dual VaR and ES representations, and the
//! convex-order counterexample.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::axioms::generate::{counterexample_triple, stream_rng};
use crate::axioms::{run_cases, AuditConfig, Case, Corpus, Fragment, Outcome, Property};
use crate::error::{Error, Result};
use crate::measures::{
    add, catalog, es_alpha, var_alpha, DeviationFunctional, DeviationProfile, Functional,
    RiskFunctional, RiskProfile,
};
use crate::space::{convex_order_leq, same_distribution, RandomVariable};

/// Values within this of zero count as zero in contracts and curve checks.
pub const CONTRACT_TOL: f64 = 1e-12;
/// Scalings used by the star-closure surrogate.
pub const STAR_CLOSURE_LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];

/// `D(X) = rho(X - E[X])`.
///
/// Raises [`Error::ContractViolation`] when the value is negative, or when it
/// vanishes on a non-constant input (the requirement `rho(X) > -E[X]` fails).
pub fn deviation_from_risk(rho: &RiskFunctional) -> DeviationFunctional {
    let p = rho.profile();
    let profile = DeviationProfile {
        non_negative: true,
        translation_insensitive: true,
        convex: p.convex,
        positively_homogeneous: p.positively_homogeneous,
        star_shaped: p.star_shaped,
        lower_range_dominated: p.monotone && p.translation_invariant,
        law_invariant: p.law_invariant,
    };
    let r = rho.clone();
    let name = format!("dev[{}]", rho.name());
    let label = name.clone();
    DeviationFunctional::new(name, profile, move |x| {
        let v = r.evaluate(&x.center())?;
        let violation = |detail: String| Error::ContractViolation {
            functional: label.clone(),
            detail,
        };
        if v < -CONTRACT_TOL {
            return Err(violation(format!("negative value {v}")));
        }
        if !x.is_constant() && v <= CONTRACT_TOL {
            return Err(violation(format!(
                "value {v} on a non-constant input; rho(X) > -E[X] fails"
            )));
        }
        Ok(v.max(0.0))
    })
}

/// `rho(X) = -E[X] + D(X)`.
pub fn risk_from_deviation(d: &DeviationFunctional) -> RiskFunctional {
    let p = d.profile();
    let profile = RiskProfile {
        monotone: p.lower_range_dominated && p.star_shaped,
        translation_invariant: p.translation_insensitive,
        normalized: p.non_negative,
        star_shaped: p.star_shaped,
        positively_homogeneous: p.positively_homogeneous,
        convex: p.convex,
        law_invariant: p.law_invariant,
    };
    let inner = d.clone();
    RiskFunctional::new(format!("risk[{}]", d.name()), profile, move |x| {
        Ok(-x.expectation() + inner.evaluate(x)?)
    })
}

/// `mu(X) + D(X) <= -ess inf X` over the corpus.
pub fn check_limitedness(mu: &RiskFunctional, d: &DeviationFunctional, config: &AuditConfig) -> Fragment {
    let corpus = Corpus::new(config);
    let cases = corpus.variables().map(|x| Case::Single { x: x.clone() });
    run_cases(Property::Limitedness, cases, config.tolerance, |case| {
        let Case::Single { x } = case else { unreachable!("single cases only") };
        Ok(Outcome::le(mu.evaluate(x)? + d.evaluate(x)?, -x.ess_inf()))
    })
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvariantViolation("alpha grid is empty".into()));
    }
    if grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::InvariantViolation("alpha grid must lie in (0, 1)".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvariantViolation("alpha grid must be strictly increasing".into()));
    }
    Ok(())
}

fn validate_values(grid: &[f64], values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::InvariantViolation(format!(
            "curve has {} values for {} grid points",
            values.len(),
            grid.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvariantViolation("curve values must be finite".into()));
    }
    if let Some(k) = values.windows(2).position(|w| w[1] > w[0] + CONTRACT_TOL) {
        return Err(Error::InvariantViolation(format!(
            "curve increases between alpha {} and {}",
            grid[k],
            grid[k + 1]
        )));
    }
    let last = values[values.len() - 1];
    if last < -CONTRACT_TOL {
        return Err(Error::InvariantViolation(format!("curve ends at {last} < 0")));
    }
    Ok(())
}

/// A non-increasing function on a finite alpha grid, ending at a non-negative value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurve")]
pub struct GCurve {
    alpha_grid: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawCurve {
    alpha_grid: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawCurve> for GCurve {
    type Error = Error;
    fn try_from(r: RawCurve) -> Result<Self> {
        Self::new(r.alpha_grid, r.values)
    }
}

impl GCurve {
    pub fn new(alpha_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_grid(&alpha_grid)?;
        validate_values(&alpha_grid, &values)?;
        Ok(Self { alpha_grid, values })
    }

    pub fn zero(alpha_grid: Vec<f64>) -> Result<Self> {
        let values = vec![0.0; alpha_grid.len()];
        Self::new(alpha_grid, values)
    }

    pub fn alpha_grid(&self) -> &[f64] {
        &self.alpha_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Finite family of curves on one shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct GFamily {
    alpha_grid: Vec<f64>,
    curves: Vec<Vec<f64>>,
    star_closed: bool,
}

#[derive(Deserialize)]
struct RawFamily {
    alpha_grid: Vec<f64>,
    curves: Vec<Vec<f64>>,
    #[serde(default)]
    star_closed: bool,
}

impl TryFrom<RawFamily> for GFamily {
    type Error = Error;
    fn try_from(r: RawFamily) -> Result<Self> {
        Self::new(r.alpha_grid, r.curves, r.star_closed)
    }
}

impl GFamily {
    /// Validates every curve; a `star_closed` claim is checked against the surrogate.
    pub fn new(alpha_grid: Vec<f64>, curves: Vec<Vec<f64>>, star_closed: bool) -> Result<Self> {
        validate_grid(&alpha_grid)?;
        if curves.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for c in &curves {
            validate_values(&alpha_grid, c)?;
        }
        let family = Self {
            alpha_grid,
            curves,
            star_closed: false,
        };
        if star_closed && !family.satisfies_star_closure() {
            return Err(Error::InvariantViolation(
                "family is not closed under the star scalings".into(),
            ));
        }
        Ok(Self { star_closed, ..family })
    }

    pub fn from_curves(curves: &[GCurve], star_closed: bool) -> Result<Self> {
        let first = curves.first().ok_or(Error::EmptyFamily)?;
        if curves.iter().any(|c| c.alpha_grid != first.alpha_grid) {
            return Err(Error::InvariantViolation("curves use different grids".into()));
        }
        Self::new(
            first.alpha_grid.clone(),
            curves.iter().map(|c| c.values.clone()).collect(),
            star_closed,
        )
    }

    /// The single curve `g = 0`.
    pub fn zero(alpha_grid: Vec<f64>) -> Result<Self> {
        let n = alpha_grid.len();
        Self::new(alpha_grid, vec![vec![0.0; n]], true)
    }

    /// For each curve `g` and each `lambda` in the star scalings, some member `h >= lambda g`.
    pub fn satisfies_star_closure(&self) -> bool {
        self.curves.iter().all(|g| {
            STAR_CLOSURE_LAMBDAS.iter().all(|&l| {
                self.curves
                    .iter()
                    .any(|h| h.iter().zip(g).all(|(hk, gk)| *hk >= l * gk - CONTRACT_TOL))
            })
        })
    }

    pub fn alpha_grid(&self) -> &[f64] {
        &self.alpha_grid
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn star_closed(&self) -> bool {
        self.star_closed
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

/// `{k / (2 n_max) : k = 1..2 n_max - 1}`.
pub fn default_alpha_grid(n_max: usize) -> Vec<f64> {
    let m = 2 * n_max.max(1);
    (1..m).map(|k| k as f64 / m as f64).collect()
}

/// Seeded family of non-negative non-increasing curves; always star closed.
pub fn seeded_family(alpha_grid: Vec<f64>, count: usize, seed: u64) -> Result<GFamily> {
    let mut rng = stream_rng(seed, "gfamily");
    let curves = (0..count)
        .map(|_| {
            let mut level: f64 = rng.gen_range(0.0..2.0);
            alpha_grid
                .iter()
                .map(|_| {
                    let v = level;
                    level = (level - rng.gen_range(0.0..0.1)).max(0.0);
                    v
                })
                .collect()
        })
        .collect();
    GFamily::new(alpha_grid, curves, true)
}

fn dual_eval(
    g: &GFamily,
    x: &RandomVariable,
    level: fn(&RandomVariable, f64) -> Result<f64>,
) -> Result<f64> {
    let min_prob = x.space().min_prob();
    let min_alpha = g.alpha_grid[0];
    if min_alpha > min_prob + CONTRACT_TOL {
        return Err(Error::GridTooCoarse { min_alpha, min_prob });
    }
    let xc = x.center();
    let at_levels: Vec<f64> = g.alpha_grid.iter().map(|&a| level(&xc, a)).collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    for curve in &g.curves {
        let sup = at_levels
            .iter()
            .zip(curve)
            .map(|(v, gk)| v - gk)
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min(sup);
    }
    Ok(best)
}

/// `min_g max_alpha VaR^alpha(X - E X) - g(alpha)`.
pub fn dual_var_eval(g: &GFamily, x: &RandomVariable) -> Result<f64> {
    dual_eval(g, x, var_alpha)
}

/// `min_g max_alpha ES^alpha(X - E X) - g(alpha)`.
pub fn dual_es_eval(g: &GFamily, x: &RandomVariable) -> Result<f64> {
    dual_eval(g, x, es_alpha)
}

fn dual_profile() -> DeviationProfile {
    DeviationProfile {
        non_negative: false,
        translation_insensitive: true,
        convex: false,
        positively_homogeneous: false,
        star_shaped: true,
        lower_range_dominated: false,
        law_invariant: true,
    }
}

/// `X -> dual_var_eval(G, X)` as a functional.
pub fn dual_var_functional(g: &GFamily) -> DeviationFunctional {
    let fam = g.clone();
    DeviationFunctional::new("dual-var", dual_profile(), move |x| dual_var_eval(&fam, x))
}

/// `X -> dual_es_eval(G, X)` as a functional.
pub fn dual_es_functional(g: &GFamily) -> DeviationFunctional {
    let fam = g.clone();
    DeviationFunctional::new("dual-es", dual_profile(), move |x| dual_es_eval(&fam, x))
}

/// `alpha -> ES^alpha(Y)` when `-E[Y] + D(Y) <= 0`, else `None`.
pub fn g_from_acceptance(
    y: &RandomVariable,
    d: &dyn Functional,
    alpha_grid: &[f64],
) -> Result<Option<GCurve>> {
    if -y.expectation() + d.evaluate(y)? > CONTRACT_TOL {
        return Ok(None);
    }
    let values = alpha_grid.iter().map(|&a| es_alpha(y, a)).collect::<Result<Vec<_>>>()?;
    GCurve::new(alpha_grid.to_vec(), values).map(Some)
}

/// The three variables of the convex-order counterexample and their deviations.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleBundle {
    pub n: usize,
    pub alpha: f64,
    pub functional: String,
    pub d_x: f64,
    pub d_y: f64,
    pub d_z: f64,
    pub margin: f64,
    pub convex_order_ok: bool,
    pub same_dist_ok: bool,
    pub inequality_ok: bool,
    #[serde(skip)]
    pub x: RandomVariable,
    #[serde(skip)]
    pub y: RandomVariable,
    #[serde(skip)]
    pub z: RandomVariable,
}

/// Builds `X`, `Y`, `Z` on `n` equally likely atoms and evaluates `IQD^alpha + SD` on them.
pub fn build_counterexample(n: usize, alpha: f64) -> Result<CounterexampleBundle> {
    if n < 10 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("atom count {n} must be even and at least 10")));
    }
    let d = add(&catalog::iqd(alpha)?, &catalog::sd());
    let (x, y, z) = counterexample_triple(n);
    let d_x = d.evaluate(&x)?;
    let d_y = d.evaluate(&y)?;
    let d_z = d.evaluate(&z)?;
    Ok(CounterexampleBundle {
        n,
        alpha,
        functional: d.name().to_string(),
        d_x,
        d_y,
        d_z,
        margin: d_z - d_x,
        convex_order_ok: convex_order_leq(&z, &x),
        same_dist_ok: same_distribution(&x, &y),
        inequality_ok: d_z > d_x,
        x,
        y,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{check_risk_axioms, audit_deviation};
    use crate::measures::lower_range;

    fn fair(v: &[f64]) -> RandomVariable {
        RandomVariable::uniform(v.to_vec()).unwrap()
    }

    fn small() -> AuditConfig {
        AuditConfig {
            n_variables: 60,
            n_pairs: 60,
            ..AuditConfig::default()
        }
    }

    #[test]
    fn deviation_from_risk_contract() {
        let es = deviation_from_risk(&catalog::es_risk(0.1).unwrap());
        assert!(es.evaluate(&fair(&[0.0, 1.0, 2.0])).unwrap() > 0.0);
        assert_eq!(es.evaluate(&fair(&[3.0, 3.0])).unwrap(), 0.0);
        let zero = deviation_from_risk(&catalog::neg_mean());
        assert!(matches!(zero.evaluate(&fair(&[0.0, 1.0])), Err(Error::ContractViolation { .. })));
        assert_eq!(zero.evaluate(&fair(&[1.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn risk_from_lower_range_is_neg_ess_inf() {
        let rho = risk_from_deviation(&catalog::lr());
        let x = fair(&[-2.0, 0.5, 3.0]);
        assert!((rho.evaluate(&x).unwrap() - 2.0).abs() < 1e-12);
        assert!((rho.evaluate(&fair(&[4.0, 4.0])).unwrap() + 4.0).abs() < 1e-12);
    }

    #[test]
    fn risk_from_sd_minus_is_a_risk_measure() {
        let r = check_risk_axioms(&risk_from_deviation(&catalog::sd_minus()), &small());
        assert!(r.fragments.iter().all(Fragment::passed));
    }

    #[test]
    fn es_deviation_is_proper_and_star_shaped() {
        let d = deviation_from_risk(&catalog::es_risk(0.1).unwrap());
        let r = audit_deviation(&d, &small());
        let c = r.classification.unwrap();
        assert!(c.proper && c.star_shaped, "{:?}", r.fragments);
    }

    #[test]
    fn limitedness_examples() {
        let cfg = small();
        assert!(check_limitedness(&catalog::neg_mean(), &catalog::lr(), &cfg).passed());
        assert!(check_limitedness(&catalog::neg_mean(), &catalog::sd_minus(), &cfg).passed());
        let f = check_limitedness(&catalog::neg_mean(), &catalog::fr(), &cfg);
        assert!(f.failed());
        let two_point = Case::Single { x: (&fair(&[0.0, 2.0])).into() };
        assert!(f.witnesses.iter().any(|w| w.case == two_point));
    }

    #[test]
    fn curves_are_validated() {
        let grid = vec![0.25, 0.5, 0.75];
        assert!(GCurve::new(grid.clone(), vec![1.0, 0.5, 0.0]).is_ok());
        assert!(GCurve::new(grid.clone(), vec![1.0, 1.5, 0.0]).is_err());
        assert!(GCurve::new(grid.clone(), vec![1.0, 0.5, -0.1]).is_err());
        assert!(GCurve::new(vec![0.5, 0.25], vec![0.0, 0.0]).is_err());
        assert!(GFamily::new(grid, vec![], false).is_err());
        let fam: GFamily = serde_json::from_str(r#"{"alpha_grid":[0.5],"curves":[[0.0]],"star_closed":true}"#).unwrap();
        assert!(fam.star_closed());
    }

    #[test]
    fn zero_family_duals_equal_lower_range() {
        let g = GFamily::zero(default_alpha_grid(4)).unwrap();
        let x = fair(&[-1.0, 0.0, 0.0, 3.0]);
        assert!((dual_var_eval(&g, &x).unwrap() - lower_range(&x)).abs() < 1e-12);
        assert!((dual_es_eval(&g, &x).unwrap() - lower_range(&x)).abs() < 1e-12);
        assert_eq!(dual_var_eval(&g, &fair(&[2.0; 4])).unwrap(), 0.0);
        let coarse = GFamily::zero(vec![0.5]).unwrap();
        assert!(matches!(dual_var_eval(&coarse, &x), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn es_dual_dominates_var_dual() {
        let g = seeded_family(default_alpha_grid(10), 3, 5).unwrap();
        for x in Corpus::new(&AuditConfig { uniform_weights: true, ..small() }).generated {
            assert!(dual_es_eval(&g, &x).unwrap() >= dual_var_eval(&g, &x).unwrap() - 1e-10);
        }
    }

    #[test]
    fn g_from_acceptance_examples() {
        let grid = default_alpha_grid(4);
        let sd = catalog::sd();
        assert!(matches!(g_from_acceptance(&fair(&[1.0, 1.0]), &sd, &grid), Err(Error::InvariantViolation(_))));
        assert!(matches!(g_from_acceptance(&fair(&[0.0, 4.0]), &sd, &grid), Err(Error::InvariantViolation(_))));
        assert_eq!(g_from_acceptance(&fair(&[-2.0, 2.0]), &sd, &grid).unwrap(), None);
        let zero = g_from_acceptance(&fair(&[0.0, 0.0]), &sd, &grid).unwrap().unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn counterexample_small_n() {
        let b = build_counterexample(10, 0.4).unwrap();
        assert!(b.convex_order_ok && b.same_dist_ok && b.inequality_ok);
        assert!(build_counterexample(11, 0.4).is_err());
        assert!(build_counterexample(8, 0.4).is_err());
    }
}
