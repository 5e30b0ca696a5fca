use serde::{Deserialize, Serialize};

use super::generate::{permute_atoms, Corpus, Generator};
use super::{combine, run_cases, AuditConfig, Case, Fragment, Outcome, Property, Witness};
use crate::error::{Error, Result};
use crate::measures::{lower_range, scale_extended, DeviationFunctional, Functional, RiskFunctional};
use crate::space::RandomVariable;

/// Evaluates one case of `property` for `f`.
pub fn evaluate_case(property: Property, f: &dyn Functional, case: &Case) -> Result<Outcome> {
    use Property as P;
    let d = |x: &RandomVariable| f.evaluate(x);
    Ok(match (property, case) {
        (P::NonNegativity, Case::Single { x }) => {
            if x.is_constant() {
                Outcome::le(d(x)?, 0.0)
            } else {
                Outcome::gt(d(x)?, 0.0)
            }
        }
        (P::TranslationInsensitivity, Case::Shift { x, c }) => Outcome::eq(d(&x.shift(*c))?, d(x)?),
        (P::Convexity, Case::Mix { x, y, lambda }) => {
            let l = *lambda;
            Outcome::le(d(&x.mix(y, l)?)?, combine(l, d(x)?, 1.0 - l, d(y)?))
        }
        (P::PositiveHomogeneity, Case::Scale { x, lambda }) => {
            Outcome::eq(d(&x.scale(*lambda))?, scale_extended(*lambda, d(x)?))
        }
        (P::StarShapedUpper | P::StarShapedLower | P::StarShapedRatio, Case::ScalePair { x, small, large }) => {
            let (s, l) = (*small, *large);
            if !(s > 0.0 && l > s) {
                return Err(Error::InvalidParameter(format!("scale pair ({s}, {l})")));
            }
            let w = d(&x.scale(s))?;
            let v = d(&x.scale(l))?;
            match property {
                P::StarShapedUpper => Outcome::le(scale_extended(l / s, w), v),
                P::StarShapedLower => Outcome::le(w, scale_extended(s / l, v)),
                _ => Outcome::le(scale_extended(1.0 / s, w), scale_extended(1.0 / l, v)),
            }
        }
        (P::LowerRangeDominance, Case::Single { x }) => Outcome::le(d(x)?, lower_range(x)),
        (P::LawInvariance, Case::Pair { x, y }) => Outcome::eq(d(x)?, d(y)?),
        (P::ConvexOrderConsistency, Case::Pair { x, y }) => Outcome::le(d(x)?, d(y)?),
        (P::Subadditivity, Case::Sum { x, y }) => Outcome::le(d(&x.add(y)?)?, d(x)? + d(y)?),
        (P::Monotonicity, Case::Ordered { x, y }) => Outcome::le(d(y)?, d(x)?),
        (P::TranslationInvariance, Case::Shift { x, c }) => Outcome::eq(d(&x.shift(*c))?, d(x)? - c),
        (P::Normalization, Case::Single { x }) => Outcome::eq(d(x)?, 0.0),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "case kind does not belong to {property:?}"
            )))
        }
    })
}

/// Re-evaluates a stored witness.
pub fn replay(property: Property, f: &dyn Functional, witness: &Witness) -> Result<Outcome> {
    evaluate_case(property, f, &witness.case.to_case()?)
}

/// Builds the cases for a functional property from the corpus and its own sub-stream.
pub(crate) fn cases_for(property: Property, config: &AuditConfig, corpus: &Corpus) -> Vec<Case> {
    use Property as P;
    let mut g = Generator::new(config, &format!("{property:?}"));
    let vars = || corpus.variables();
    match property {
        P::NonNegativity => {
            let mut cases = Vec::new();
            for &n in &config.atom_counts {
                let space = crate::space::ProbSpace::uniform(n).expect("n > 0");
                for &c in std::iter::once(&0.0).chain(&config.shift_grid) {
                    cases.push(Case::Single { x: RandomVariable::constant(space.clone(), c) });
                }
            }
            let keep = |x: &&RandomVariable| x.ess_sup() - x.ess_inf() >= super::FR_EXCLUSION;
            cases.extend(vars().filter(keep).map(|x| Case::Single { x: x.clone() }));
            cases
        }
        P::TranslationInsensitivity | P::TranslationInvariance => vars()
            .flat_map(|x| config.shift_grid.iter().map(move |&c| Case::Shift { x: x.clone(), c }))
            .collect(),
        P::Convexity => {
            let lambdas = config.unit_lambdas();
            let (x, y, _) = &corpus.triple;
            let mut pairs = vec![(x.clone(), y.clone())];
            pairs.extend((0..config.n_pairs).filter_map(|_| g.pair()));
            let mut cases = vec![Case::Mix { x: x.clone(), y: y.clone(), lambda: 0.5 }];
            for (x, y) in pairs {
                cases.extend(lambdas.iter().map(|&lambda| Case::Mix { x: x.clone(), y: y.clone(), lambda }));
            }
            cases
        }
        P::PositiveHomogeneity => vars()
            .flat_map(|x| config.lambda_grid.iter().map(move |&lambda| Case::Scale { x: x.clone(), lambda }))
            .collect(),
        P::StarShapedUpper | P::StarShapedLower | P::StarShapedRatio => {
            let mut lambdas = config.positive_lambdas();
            lambdas.sort_by(f64::total_cmp);
            lambdas.dedup();
            let mut cases = Vec::new();
            for x in vars() {
                for (i, &small) in lambdas.iter().enumerate() {
                    for &large in &lambdas[i + 1..] {
                        cases.push(Case::ScalePair { x: x.clone(), small, large });
                    }
                }
            }
            cases
        }
        P::LowerRangeDominance | P::Limitedness => vars().map(|x| Case::Single { x: x.clone() }).collect(),
        P::LawInvariance => {
            let mut cases = Vec::new();
            for x in vars() {
                let perm = g.permutation(x.len());
                cases.push(Case::Pair { x: x.clone(), y: permute_atoms(x, &perm) });
                if x.space().is_uniform() {
                    cases.push(Case::Pair { x: x.clone(), y: x.permute(&perm) });
                }
                if let Ok(refined) = x.refine(2) {
                    cases.push(Case::Pair { x: x.clone(), y: refined });
                }
            }
            cases
        }
        P::ConvexOrderConsistency => {
            let (x, _, z) = &corpus.triple;
            let mut cases = vec![Case::Pair { x: z.clone(), y: x.clone() }];
            cases.extend(
                (0..config.n_pairs)
                    .filter_map(|_| g.contraction_pair())
                    .map(|(x, y)| Case::Pair { x, y }),
            );
            cases
        }
        P::Subadditivity => (0..config.n_pairs)
            .filter_map(|_| g.pair())
            .map(|(x, y)| Case::Sum { x, y })
            .collect(),
        P::Monotonicity => (0..config.n_pairs)
            .filter_map(|_| g.ordered_pair())
            .map(|(x, y)| Case::Ordered { x, y })
            .collect(),
        P::Normalization => config
            .atom_counts
            .iter()
            .map(|&n| Case::Single {
                x: RandomVariable::constant(crate::space::ProbSpace::uniform(n).expect("n > 0"), 0.0),
            })
            .collect(),
        P::SetStarShaped | P::EnvelopeDomination | P::LocusConvexity | P::AcceptanceUnion => Vec::new(),
    }
}

pub fn run_property(
    property: Property,
    f: &dyn Functional,
    config: &AuditConfig,
    corpus: &Corpus,
) -> Fragment {
    let cases = cases_for(property, config, corpus);
    let fragment = run_cases(property, cases, config.tolerance, |c| evaluate_case(property, f, c));
    if property == Property::NonNegativity {
        fragment.with_note(format!(
            "non-constant inputs with full range below {} are excluded",
            super::FR_EXCLUSION
        ))
    } else {
        fragment
    }
}

macro_rules! single_checks {
    ($($name:ident => $prop:expr),* $(,)?) => {$(
        pub fn $name(f: &dyn Functional, config: &AuditConfig) -> Fragment {
            run_property($prop, f, config, &Corpus::new(config))
        }
    )*};
}

single_checks! {
    check_non_negativity => Property::NonNegativity,
    check_translation_insensitivity => Property::TranslationInsensitivity,
    check_convexity => Property::Convexity,
    check_positive_homogeneity => Property::PositiveHomogeneity,
    check_lower_range_dominance => Property::LowerRangeDominance,
    check_law_invariance => Property::LawInvariance,
    check_convex_order_consistency => Property::ConvexOrderConsistency,
    check_subadditivity => Property::Subadditivity,
}

/// All three equivalent star-shapedness forms, one fragment each.
pub fn check_star_shapedness(f: &dyn Functional, config: &AuditConfig) -> Vec<Fragment> {
    let corpus = Corpus::new(config);
    Property::STAR_FORMS
        .iter()
        .map(|&p| run_property(p, f, config, &corpus))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubjectKind {
    Deviation,
    Risk,
}

/// Labels consistent with the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub proper: bool,
    pub convex: bool,
    pub positively_homogeneous: bool,
    pub generalized: bool,
    pub star_shaped: bool,
    pub lower_range_dominated: bool,
    pub law_invariant: bool,
    pub convex_order_consistent: bool,
    pub subadditive: bool,
    pub labels: Vec<String>,
    pub summary: String,
}

impl Classification {
    fn from_fragments(fragments: &[Fragment]) -> Self {
        let pass = |p: Property| fragments.iter().any(|f| f.property == p && f.passed());
        let proper = pass(Property::NonNegativity) && pass(Property::TranslationInsensitivity);
        let convex_axiom = pass(Property::Convexity);
        let ph = pass(Property::PositiveHomogeneity);
        let star_axiom = Property::STAR_FORMS.iter().all(|&p| pass(p));
        let convex = proper && convex_axiom;
        let generalized = convex && ph;
        let star_shaped = proper && star_axiom;
        let lrd = pass(Property::LowerRangeDominance);
        let li = pass(Property::LawInvariance);
        let co = pass(Property::ConvexOrderConsistency);
        let sub = pass(Property::Subadditivity);

        let mut labels = Vec::new();
        for (on, label) in [
            (proper, "proper"),
            (convex, "convex"),
            (generalized, "generalized"),
            (star_shaped, "star-shaped"),
            (lrd, "lower-range-dominated"),
            (li, "law-invariant"),
            (co, "convex-order-consistent"),
        ] {
            if on {
                labels.push(label.to_string());
            }
        }
        let summary = if !proper {
            let mut s = String::from("not proper");
            if star_axiom {
                s.push_str(", star-shaped inequality holds");
            }
            s
        } else if generalized {
            "generalized".into()
        } else if convex {
            "convex, not PH".into()
        } else if star_shaped {
            let mut s = String::from("star-shaped, not convex");
            if !ph {
                s.push_str(", not PH");
            }
            s
        } else {
            "proper".into()
        };
        Self {
            proper,
            convex,
            positively_homogeneous: ph,
            generalized,
            star_shaped,
            lower_range_dominated: lrd,
            law_invariant: li,
            convex_order_consistent: co,
            subadditive: sub,
            labels,
            summary,
        }
    }
}

/// A declared flag that disagrees with the audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMismatch {
    pub flag: String,
    pub declared: bool,
    pub observed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub subject: String,
    pub kind: SubjectKind,
    pub seed: u64,
    pub tolerance: f64,
    pub corpus_size: usize,
    pub fragments: Vec<Fragment>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classification: Option<Classification>,
    pub mismatches: Vec<ProfileMismatch>,
}

impl AuditReport {
    pub fn fragment(&self, property: Property) -> Option<&Fragment> {
        self.fragments.iter().find(|f| f.property == property)
    }

    pub fn passed(&self, property: Property) -> bool {
        self.fragment(property).is_some_and(Fragment::passed)
    }

    pub fn star_shaped_passed(&self) -> bool {
        Property::STAR_FORMS.iter().all(|&p| self.passed(p))
    }
}

fn mismatches(flags: &[(&str, bool, bool)]) -> Vec<ProfileMismatch> {
    flags
        .iter()
        .filter(|(_, declared, observed)| declared != observed)
        .map(|&(flag, declared, observed)| ProfileMismatch {
            flag: flag.to_string(),
            declared,
            observed,
        })
        .collect()
}

const DEVIATION_PROPERTIES: [Property; 11] = [
    Property::NonNegativity,
    Property::TranslationInsensitivity,
    Property::Convexity,
    Property::PositiveHomogeneity,
    Property::StarShapedUpper,
    Property::StarShapedLower,
    Property::StarShapedRatio,
    Property::LowerRangeDominance,
    Property::LawInvariance,
    Property::ConvexOrderConsistency,
    Property::Subadditivity,
];

/// Runs every deviation check and classifies the result.
pub fn audit_deviation(d: &DeviationFunctional, config: &AuditConfig) -> AuditReport {
    let corpus = Corpus::new(config);
    let fragments: Vec<Fragment> = DEVIATION_PROPERTIES
        .iter()
        .map(|&p| run_property(p, d, config, &corpus))
        .collect();
    let classification = Classification::from_fragments(&fragments);
    let p = d.profile();
    let pass = |prop: Property| fragments.iter().any(|f| f.property == prop && f.passed());
    let mismatches = mismatches(&[
        ("non_negative", p.non_negative, pass(Property::NonNegativity)),
        ("translation_insensitive", p.translation_insensitive, pass(Property::TranslationInsensitivity)),
        ("convex", p.convex, pass(Property::Convexity)),
        ("positively_homogeneous", p.positively_homogeneous, pass(Property::PositiveHomogeneity)),
        ("star_shaped", p.star_shaped, Property::STAR_FORMS.iter().all(|&s| pass(s))),
        ("lower_range_dominated", p.lower_range_dominated, pass(Property::LowerRangeDominance)),
        ("law_invariant", p.law_invariant, pass(Property::LawInvariance)),
    ]);
    AuditReport {
        subject: d.name().to_string(),
        kind: SubjectKind::Deviation,
        seed: config.seed,
        tolerance: config.tolerance,
        corpus_size: corpus.len(),
        fragments,
        classification: Some(classification),
        mismatches,
    }
}

const RISK_PROPERTIES: [Property; 6] = [
    Property::Monotonicity,
    Property::TranslationInvariance,
    Property::Normalization,
    Property::StarShapedUpper,
    Property::StarShapedLower,
    Property::StarShapedRatio,
];

/// Monotonicity, translation invariance, normalization and star-shapedness of a risk functional.
pub fn check_risk_axioms(rho: &RiskFunctional, config: &AuditConfig) -> AuditReport {
    let corpus = Corpus::new(config);
    let fragments: Vec<Fragment> = RISK_PROPERTIES
        .iter()
        .map(|&p| run_property(p, rho, config, &corpus))
        .collect();
    let p = rho.profile();
    let pass = |prop: Property| fragments.iter().any(|f| f.property == prop && f.passed());
    let mismatches = mismatches(&[
        ("monotone", p.monotone, pass(Property::Monotonicity)),
        ("translation_invariant", p.translation_invariant, pass(Property::TranslationInvariance)),
        ("normalized", p.normalized, pass(Property::Normalization)),
        ("star_shaped", p.star_shaped, Property::STAR_FORMS.iter().all(|&s| pass(s))),
    ]);
    AuditReport {
        subject: rho.name().to_string(),
        kind: SubjectKind::Risk,
        seed: config.seed,
        tolerance: config.tolerance,
        corpus_size: corpus.len(),
        fragments,
        classification: None,
        mismatches,
    }
}
