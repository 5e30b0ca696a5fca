//! Seeded property audits for deviation and risk functionals.
//!
//! Checks over finite corpora can only falsify. A `pass` means no violation
//! was found on the corpus; a `fail` carries replayable witnesses.

mod checks;
pub mod generate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::scale_extended;
use crate::report::ExtReal;
use crate::space::{RandomVariable, VariableRecord};

pub use checks::{
    audit_deviation, check_convex_order_consistency, check_convexity, check_law_invariance,
    check_lower_range_dominance, check_non_negativity, check_positive_homogeneity,
    check_risk_axioms, check_star_shapedness, check_subadditivity,
    check_translation_insensitivity, evaluate_case, replay, run_property, AuditReport, Classification,
    ProfileMismatch, SubjectKind,
};
pub use generate::Corpus;

/// Maximum number of witnesses kept per fragment.
pub const MAX_WITNESSES: usize = 5;
/// Generated non-constant variables with a full range below this are skipped by the positivity check.
pub const FR_EXCLUSION: f64 = 1e-6;

/// Knobs for corpus generation and comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub seed: u64,
    pub n_variables: usize,
    pub n_pairs: usize,
    pub lambda_grid: Vec<f64>,
    pub shift_grid: Vec<f64>,
    pub atom_counts: Vec<usize>,
    pub value_range: (f64, f64),
    pub tolerance: f64,
    /// Restrict generated spaces to equal weights.
    pub uniform_weights: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_917,
            n_variables: 200,
            n_pairs: 200,
            lambda_grid: vec![0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0, 1.5, 2.0, 5.0, 10.0],
            shift_grid: vec![-10.0, -1.0, -0.1, 0.1, 1.0, 10.0],
            atom_counts: vec![2, 3, 4, 5, 6, 8, 10],
            value_range: (-5.0, 5.0),
            tolerance: 1e-9,
            uniform_weights: false,
        }
    }
}

impl AuditConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return bad("lambda grid must contain finite values >= 0");
        }
        let has = |p: fn(f64) -> bool| self.lambda_grid.iter().any(|&l| p(l));
        if !(has(|l| l > 0.0 && l < 1.0) && has(|l| l > 1.0) && has(|l| l == 1.0)) {
            return bad("lambda grid must contain 1 and values in (0,1) and (1,inf)");
        }
        if self.shift_grid.iter().any(|c| !c.is_finite()) {
            return bad("shift grid must be finite");
        }
        if self.atom_counts.is_empty() || self.atom_counts.contains(&0) {
            return bad("atom counts must be non-empty and positive");
        }
        let (lo, hi) = self.value_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad("value range must be a finite interval");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        Ok(())
    }

    pub fn unit_lambdas(&self) -> Vec<f64> {
        self.lambda_grid.iter().copied().filter(|l| (0.0..=1.0).contains(l)).collect()
    }

    pub fn positive_lambdas(&self) -> Vec<f64> {
        self.lambda_grid.iter().copied().filter(|&l| l > 0.0).collect()
    }
}

/// Audited properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    NonNegativity,
    TranslationInsensitivity,
    Convexity,
    PositiveHomogeneity,
    /// `D(mu W) >= mu D(W)` for `mu > 1`.
    StarShapedUpper,
    /// `D(nu V) <= nu D(V)` for `nu in (0, 1)`.
    StarShapedLower,
    /// `lambda -> D(lambda X) / lambda` non-decreasing.
    StarShapedRatio,
    LowerRangeDominance,
    LawInvariance,
    ConvexOrderConsistency,
    Subadditivity,
    Monotonicity,
    TranslationInvariance,
    Normalization,
    Limitedness,
    SetStarShaped,
    EnvelopeDomination,
    LocusConvexity,
    AcceptanceUnion,
}

impl Property {
    pub const STAR_FORMS: [Property; 3] = [
        Property::StarShapedUpper,
        Property::StarShapedLower,
        Property::StarShapedRatio,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs <= rhs`
    Le,
    /// `lhs == rhs`
    Eq,
    /// `lhs > rhs`
    Gt,
}

/// One test instance. Evaluated with `RandomVariable`s, serialized with records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Case<V = RandomVariable> {
    Single { x: V },
    Shift { x: V, c: f64 },
    Mix { x: V, y: V, lambda: f64 },
    Scale { x: V, lambda: f64 },
    ScalePair { x: V, small: f64, large: f64 },
    Pair { x: V, y: V },
    Sum { x: V, y: V },
    Ordered { x: V, y: V },
    Membership { x: V, lambda: f64 },
}

impl<V> Case<V> {
    pub fn try_map<W, E>(&self, f: impl Fn(&V) -> std::result::Result<W, E>) -> std::result::Result<Case<W>, E> {
        Ok(match self {
            Case::Single { x } => Case::Single { x: f(x)? },
            Case::Shift { x, c } => Case::Shift { x: f(x)?, c: *c },
            Case::Mix { x, y, lambda } => Case::Mix { x: f(x)?, y: f(y)?, lambda: *lambda },
            Case::Scale { x, lambda } => Case::Scale { x: f(x)?, lambda: *lambda },
            Case::ScalePair { x, small, large } => Case::ScalePair {
                x: f(x)?,
                small: *small,
                large: *large,
            },
            Case::Pair { x, y } => Case::Pair { x: f(x)?, y: f(y)? },
            Case::Sum { x, y } => Case::Sum { x: f(x)?, y: f(y)? },
            Case::Ordered { x, y } => Case::Ordered { x: f(x)?, y: f(y)? },
            Case::Membership { x, lambda } => Case::Membership { x: f(x)?, lambda: *lambda },
        })
    }
}

impl Case {
    pub fn record(&self) -> Case<VariableRecord> {
        self.try_map(|x| Ok::<_, Error>(VariableRecord::from(x)))
            .expect("record conversion is infallible")
    }
}

impl Case<VariableRecord> {
    pub fn to_case(&self) -> Result<Case> {
        self.try_map(|r| r.to_variable())
    }
}

/// Both sides of a checked relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
}

impl Outcome {
    pub fn le(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, relation: Relation::Le }
    }
    pub fn eq(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, relation: Relation::Eq }
    }
    pub fn gt(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, relation: Relation::Gt }
    }

    /// Mixed tolerance: `tol * max(1, |lhs|, |rhs|)` on finite sides, plain `tol` for `Gt`.
    pub fn holds(&self, tol: f64) -> bool {
        let (a, b) = (self.lhs, self.rhs);
        if a.is_nan() || b.is_nan() {
            return false;
        }
        let slack = || tol * 1f64.max(a.abs()).max(b.abs());
        match self.relation {
            Relation::Le => b == f64::INFINITY || a == f64::NEG_INFINITY || (a.is_finite() && b.is_finite() && a <= b + slack()),
            Relation::Eq => {
                if a.is_infinite() || b.is_infinite() {
                    a == b
                } else {
                    (a - b).abs() <= slack()
                }
            }
            Relation::Gt => a == f64::INFINITY && b < f64::INFINITY || a > b + tol,
        }
    }

    /// Size of the violation (positive means violated direction), with infinities as limits.
    pub fn margin(&self) -> f64 {
        let (a, b) = (self.lhs, self.rhs);
        let diff = |p: f64, q: f64| if p == q { 0.0 } else { p - q };
        match self.relation {
            Relation::Le => diff(a, b),
            Relation::Eq => diff(a, b).abs(),
            Relation::Gt => diff(b, a),
        }
    }
}

/// Two affine combinations with the `0 * inf = 0` convention.
pub(crate) fn combine(l1: f64, v1: f64, l2: f64, v2: f64) -> f64 {
    scale_extended(l1, v1) + scale_extended(l2, v2)
}

/// A reproducible violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub case: Case<VariableRecord>,
    pub lhs: Option<ExtReal>,
    pub rhs: Option<ExtReal>,
    pub relation: Option<Relation>,
    pub margin: Option<ExtReal>,
    /// Set when evaluating the case raised an error.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Result of one property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    pub property: Property,
    pub status: Status,
    pub cases: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
    /// Largest finite violation margin seen (0 when none).
    pub worst_margin: ExtReal,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Fragment {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn nan_free(v: f64) -> ExtReal {
    ExtReal(if v.is_nan() { f64::INFINITY } else { v })
}

/// Evaluates every case and folds the outcomes into a fragment.
///
/// Evaluation errors count as violations and keep the error text in the witness.
pub fn run_cases<I, F>(property: Property, cases: I, tol: f64, mut eval: F) -> Fragment
where
    I: IntoIterator<Item = Case>,
    F: FnMut(&Case) -> Result<Outcome>,
{
    let mut fragment = Fragment {
        property,
        status: Status::NotApplicable,
        cases: 0,
        violations: 0,
        witnesses: Vec::new(),
        worst_margin: ExtReal(0.0),
        note: None,
    };
    for case in cases {
        fragment.cases += 1;
        let witness = match eval(&case) {
            Ok(out) if out.holds(tol) => continue,
            Ok(out) => {
                let m = out.margin();
                if m > fragment.worst_margin.0 || m.is_nan() {
                    fragment.worst_margin = nan_free(m);
                }
                Witness {
                    case: case.record(),
                    lhs: Some(nan_free(out.lhs)),
                    rhs: Some(nan_free(out.rhs)),
                    relation: Some(out.relation),
                    margin: Some(nan_free(m)),
                    error: None,
                }
            }
            Err(e) => Witness {
                case: case.record(),
                lhs: None,
                rhs: None,
                relation: None,
                margin: None,
                error: Some(e.to_string()),
            },
        };
        fragment.violations += 1;
        if fragment.witnesses.len() < MAX_WITNESSES {
            fragment.witnesses.push(witness);
        }
    }
    fragment.status = match (fragment.cases, fragment.violations) {
        (0, _) => Status::NotApplicable,
        (_, 0) => Status::Pass,
        _ => Status::Fail,
    };
    fragment
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        AuditConfig::default().validate().unwrap();
        let c = AuditConfig { lambda_grid: vec![0.5, 1.0], ..AuditConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn infinity_conventions() {
        let inf = f64::INFINITY;
        assert!(Outcome::le(inf, inf).holds(1e-9));
        assert!(Outcome::le(3.0, inf).holds(1e-9));
        assert!(!Outcome::le(inf, 3.0).holds(1e-9));
        assert!(Outcome::eq(inf, inf).holds(1e-9));
        assert!(!Outcome::eq(inf, 1.0).holds(1e-9));
        assert!(Outcome::gt(inf, 0.0).holds(1e-9));
        assert!(!Outcome::gt(1e-10, 0.0).holds(1e-9));
        assert!(!Outcome::le(f64::NAN, 1.0).holds(1e-9));
        assert_eq!(combine(0.0, inf, 1.0, 2.0), 2.0);
    }

    #[test]
    fn mixed_tolerance_scales_with_magnitude() {
        assert!(Outcome::eq(1e6, 1e6 + 1e-4).holds(1e-9));
        assert!(!Outcome::eq(1.0, 1.0 + 1e-8).holds(1e-9));
    }

    #[test]
    fn fragment_status_and_witness_cap() {
        let x = RandomVariable::uniform(vec![0.0, 1.0]).unwrap();
        let cases = (0..10).map(|i| Case::Shift { x: x.clone(), c: i as f64 });
        let f = run_cases(Property::TranslationInsensitivity, cases, 1e-9, |c| match c {
            Case::Shift { c, .. } => Ok(Outcome::eq(*c, 0.0)),
            _ => unreachable!(),
        });
        assert_eq!(f.status, Status::Fail);
        assert_eq!(f.cases, 10);
        assert_eq!(f.violations, 9);
        assert_eq!(f.witnesses.len(), MAX_WITNESSES);
        assert_eq!(f.worst_margin.0, 9.0);
        let empty = run_cases(Property::Convexity, Vec::new(), 1e-9, |_| unreachable!());
        assert_eq!(empty.status, Status::NotApplicable);
    }

    #[test]
    fn case_records_round_trip() {
        let x = RandomVariable::uniform(vec![0.0, 1.0]).unwrap();
        let c = Case::Mix { x: x.clone(), y: x.scale(2.0), lambda: 0.5 };
        let json = serde_json::to_string(&c.record()).unwrap();
        let back: Case<VariableRecord> = serde_json::from_str(&json).unwrap();
        match back.to_case().unwrap() {
            Case::Mix { y, lambda, .. } => {
                assert_eq!(y.values(), &[0.0, 2.0]);
                assert_eq!(lambda, 0.5);
            }
            _ => panic!("wrong kind"),
        }
    }
}
