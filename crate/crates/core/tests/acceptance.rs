//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p stardev --test acceptance`. Failures are
//! reported but only change the exit status when `STARDEV_ACCEPTANCE_STRICT=1`.

use std::time::{Duration, Instant};

use stardev::axioms::{
    check_non_negativity, check_risk_axioms, check_star_shapedness, run_property, AuditConfig, Corpus, Fragment,
    Property,
};
use stardev::duality::{
    build_counterexample, default_alpha_grid, deviation_from_risk, dual_es_eval, dual_es_functional, dual_var_eval,
    dual_var_functional, risk_from_deviation, seeded_family, GFamily,
};
use stardev::envelopes::{
    acceptance_of, attainment_residual, check_locus_convexity, deviation_of_default, envelope_family,
    is_star_shaped_set, seeded_anchors, seeded_variables_on, verify_domination, AcceptanceSet, RayEnvelope, Variant,
};
use stardev::measures::{
    add, catalog, chi_constants, es_alpha, ied, iqd, lower_range, min_family, min_of, minkowski, scale_functional,
    sd, var_alpha, DEFAULT_GAUGE_CEILING,
};
use stardev::{audit_deviation, DeviationFunctional, Functional, RandomVariable};

const STRICT_ENV: &str = "STARDEV_ACCEPTANCE_STRICT";

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ensure_passed(f: &Fragment, what: &str) -> Result<(), String> {
    ensure(
        f.passed(),
        format!("{what}: {:?} {:?} with {} of {} cases violated", f.property, f.status, f.violations, f.cases),
    )
}

fn corpus_variables(config: &AuditConfig) -> Vec<RandomVariable> {
    Corpus::new(config).generated
}

fn min_family_functional() -> DeviationFunctional {
    let members = [
        catalog::fr(),
        scale_functional(&catalog::sd(), 2.0).unwrap(),
        add(&catalog::ied(0.25).unwrap(), &catalog::sd()),
    ];
    min_of(&members).unwrap()
}

fn iqd_plus_sd(alpha: f64) -> DeviationFunctional {
    add(&catalog::iqd(alpha).unwrap(), &catalog::sd())
}

fn counterexample() -> Outcome {
    let b = build_counterexample(2000, 0.4).map_err(|e| e.to_string())?;
    let printed = 0.8 + (4.0f64 / 3.0).sqrt();
    ensure((b.d_x - printed).abs() <= 0.01, format!("D(X) = {} vs {printed}", b.d_x))?;
    ensure((b.d_y - printed).abs() <= 0.01, format!("D(Y) = {} vs {printed}", b.d_y))?;
    ensure(b.same_dist_ok, "X and Y differ in distribution")?;
    ensure(b.convex_order_ok, "Z is not below X in convex order")?;
    ensure(b.d_z - b.d_x > 0.5, format!("margin {}", b.d_z - b.d_x))?;
    ensure((b.d_z - 3.0).abs() <= 1e-9, format!("D(Z) = {} vs two-point value 3", b.d_z))?;
    Ok(format!("D(X) = {:.5}, D(Z) = {}, margin {:.4}", b.d_x, b.d_z, b.margin))
}

fn min_of_convex_is_star() -> Outcome {
    let d = min_family_functional();
    let config = AuditConfig::default();
    ensure(config.lambda_grid.len() == 11 && config.n_variables == 200, "unexpected default grid")?;
    let mut cases = 0;
    for f in check_star_shapedness(&d, &config) {
        ensure_passed(&f, "star-shapedness")?;
        cases += f.cases;
    }
    let nn = check_non_negativity(&d, &config);
    ensure_passed(&nn, "non-negativity")?;
    Ok(format!("{cases} star cases and {} positivity cases, no violations", nn.cases))
}

fn ray_envelope_attainment() -> Outcome {
    let d = iqd_plus_sd(0.3);
    let config = AuditConfig::default();
    let anchors = seeded_anchors(&config, 50, "acceptance-anchors");
    ensure(anchors.len() == 50, format!("only {} anchors", anchors.len()))?;
    let tests = seeded_variables_on(&config, anchors[0].space(), 50, "acceptance-tests");
    ensure(tests.len() == 50, format!("only {} test points", tests.len()))?;
    for env in envelope_family(&d, &anchors, Variant::Star).map_err(|e| e.to_string())? {
        ensure_passed(&verify_domination(&d, &env, &config), "domination")?;
    }
    for x in &tests {
        let dx = d.evaluate(x).map_err(|e| e.to_string())?;
        let own = RayEnvelope::new(x.clone(), dx, Variant::Star).map_err(|e| e.to_string())?;
        ensure(own.eval(x) == dx, "own envelope misses D(X)")?;
    }
    let residual = attainment_residual(&d, &anchors, &tests, Variant::Star).map_err(|e| e.to_string())?;
    ensure(
        residual == 0.0,
        format!("own envelopes attain D(X) exactly, but the family minimum differs by {residual:e}"),
    )?;
    Ok("50 envelopes dominate, residual 0 on 50 test points".into())
}

fn acceptance_round_trip() -> Outcome {
    let config = AuditConfig {
        n_variables: 100,
        ..AuditConfig::default()
    };
    let xs = corpus_variables(&config);
    ensure(xs.len() == 100, format!("only {} variables", xs.len()))?;
    let mut worst: f64 = 0.0;
    for d in [catalog::sd(), iqd_plus_sd(0.4), min_family_functional()] {
        let a = acceptance_of(&d);
        for x in &xs {
            let target = d.evaluate(x).map_err(|e| e.to_string())?;
            if !target.is_finite() {
                continue;
            }
            let got = deviation_of_default(&a, x).map_err(|e| format!("{}: {e}", d.name()))?;
            worst = worst.max((got - target).abs());
        }
        ensure_passed(&is_star_shaped_set(&a, &config), "star-shaped set")?;
    }
    ensure(worst <= 1e-8, format!("round-trip error {worst:e}"))?;
    Ok(format!("max round-trip error {worst:.2e}"))
}

fn risk_deviation_correspondence() -> Outcome {
    let config = AuditConfig {
        n_variables: 500,
        n_pairs: 500,
        ..AuditConfig::default()
    };
    let xs = corpus_variables(&config);
    ensure(xs.len() == 500, format!("only {} variables", xs.len()))?;
    let rho_lr = risk_from_deviation(&catalog::lr());
    for x in &xs {
        let v = rho_lr.evaluate(x).map_err(|e| e.to_string())?;
        ensure((v + x.ess_inf()).abs() <= 1e-12, format!("rho_LR = {v} vs {}", -x.ess_inf()))?;
    }
    let report = check_risk_axioms(&risk_from_deviation(&catalog::sd_minus()), &config);
    let mono = report.fragment(Property::Monotonicity).ok_or("no monotonicity fragment")?;
    ensure_passed(mono, "monotonicity")?;
    ensure(mono.cases >= 500, format!("{} ordered pairs", mono.cases))?;

    let d = deviation_from_risk(&catalog::es_risk(0.1).map_err(|e| e.to_string())?);
    let audit = audit_deviation(&d, &AuditConfig::default());
    for p in [Property::NonNegativity, Property::TranslationInsensitivity] {
        ensure_passed(audit.fragment(p).ok_or("missing fragment")?, "proper")?;
    }
    ensure(audit.star_shaped_passed(), "ES deviation is not star-shaped on the corpus")?;

    let mut worst: f64 = 0.0;
    for base in [catalog::sd(), catalog::lr(), iqd_plus_sd(0.3)] {
        let back = deviation_from_risk(&risk_from_deviation(&base));
        for x in &xs {
            let (a, b) = (base.evaluate(x).map_err(|e| e.to_string())?, back.evaluate(x).map_err(|e| e.to_string())?);
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-10, format!("round-trip residual {worst:e}"))?;
    Ok(format!("{} ordered pairs monotone, round-trip residual {worst:.1e}", mono.cases))
}

fn dual_identities() -> Outcome {
    let config = AuditConfig {
        n_variables: 100,
        n_pairs: 100,
        uniform_weights: true,
        ..AuditConfig::default()
    };
    let xs = corpus_variables(&AuditConfig {
        n_variables: 100,
        ..AuditConfig::default()
    });
    let atoms = xs.iter().map(|x| (1.0 / x.space().min_prob()).round() as usize).max().unwrap_or(1);
    let zero = GFamily::zero(default_alpha_grid(atoms)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for x in &xs {
        let lr = lower_range(x);
        let v = dual_var_eval(&zero, x).map_err(|e| e.to_string())?;
        let e = dual_es_eval(&zero, x).map_err(|e| e.to_string())?;
        worst = worst.max((v - lr).abs()).max((e - lr).abs());
    }
    ensure(worst <= 1e-12, format!("zero-family residual {worst:e}"))?;

    let family = seeded_family(default_alpha_grid(40), 3, config.seed).map_err(|e| e.to_string())?;
    ensure(family.star_closed() && family.len() == 3, "seeded family shape")?;
    let corpus = Corpus::new(&config);
    let mut checked = 0;
    for (name, induced) in [("var", dual_var_functional(&family)), ("es", dual_es_functional(&family))] {
        let mut props = vec![Property::TranslationInsensitivity, Property::LawInvariance];
        props.extend(Property::STAR_FORMS);
        if name == "es" {
            props.push(Property::ConvexOrderConsistency);
        }
        for p in props {
            let f = run_property(p, &induced, &config, &corpus);
            ensure_passed(&f, &format!("dual-{name}"))?;
            if p == Property::ConvexOrderConsistency {
                ensure(f.cases >= 100, format!("{} contraction pairs", f.cases))?;
            }
            checked += f.cases;
        }
    }
    Ok(format!("zero-family residual {worst:.1e}; {checked} dual audit cases pass"))
}

fn dominance_inequalities() -> Outcome {
    let xs = corpus_variables(&AuditConfig {
        n_variables: 500,
        ..AuditConfig::default()
    });
    ensure(xs.len() == 500, format!("only {} variables", xs.len()))?;
    for x in &xs {
        for alpha in [0.1, 0.25, 0.4] {
            let (a, b) = (ied(x, alpha).map_err(|e| e.to_string())?, iqd(x, alpha).map_err(|e| e.to_string())?);
            ensure(a >= b - 1e-10, format!("IED {a} < IQD {b} at {alpha}"))?;
            let (es, var) = (es_alpha(x, alpha).map_err(|e| e.to_string())?, var_alpha(x, alpha).map_err(|e| e.to_string())?);
            ensure(es >= var, format!("ES {es} < VaR {var} at {alpha}"))?;
        }
    }
    let ball = AcceptanceSet::sublevel(&catalog::sd(), 1.0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for x in xs.iter().filter(|x| (0.01..1e3).contains(&sd(x))).take(100) {
        let g = minkowski(&ball, x, DEFAULT_GAUGE_CEILING).map_err(|e| e.to_string())?;
        worst = worst.max((g - sd(x)).abs());
        count += 1;
    }
    ensure(count == 100, format!("only {count} gauge inputs"))?;
    ensure(worst <= 1e-8, format!("gauge error {worst:e}"))?;
    Ok(format!("1500 dominance checks; gauge error {worst:.1e}"))
}

fn halfline_decomposition() -> Outcome {
    let d = iqd_plus_sd(0.4);
    let config = AuditConfig::default();
    let pool = seeded_anchors(&config, 50, "acceptance-halfline");
    ensure(pool.len() == 50, format!("only {} anchors", pool.len()))?;
    let envs = envelope_family(&d, &pool, Variant::Halfline).map_err(|e| e.to_string())?;
    let mut family: Vec<DeviationFunctional> = envs.iter().map(RayEnvelope::to_deviation).collect();
    family.push(chi_constants());
    for y in &pool {
        let (m, _) = min_family(&family, y).map_err(|e| e.to_string())?;
        let dy = d.evaluate(y).map_err(|e| e.to_string())?;
        ensure(m == dy, format!("min {m} vs D {dy}"))?;
    }
    for env in &envs {
        ensure_passed(&check_locus_convexity(env, &config), "locus convexity")?;
    }
    Ok("exact on 50 anchors; every locus convex".into())
}

fn infimum_is_not_minimum() -> Outcome {
    let sd_fn = catalog::sd();
    let config = AuditConfig::default();
    let x = RandomVariable::uniform(vec![-1.0, 1.0]).unwrap();
    let mut previous = f64::INFINITY;
    for k_max in [1usize, 10, 100, 1000, 10_000] {
        let family: Vec<DeviationFunctional> =
            (1..=k_max).map(|k| scale_functional(&sd_fn, 1.0 / k as f64).unwrap()).collect();
        let prefix_min = min_of(&family).map_err(|e| e.to_string())?;
        ensure_passed(&check_non_negativity(&prefix_min, &config), &format!("prefix {k_max}"))?;
        let v = prefix_min.evaluate(&x).map_err(|e| e.to_string())?;
        ensure(v > 0.0 && v < previous, format!("prefix {k_max}: {v} after {previous}"))?;
        previous = v;
    }
    ensure(previous < 1e-3, format!("value at K = 10^4 is {previous}"))?;
    Ok(format!("prefix minima positive, value at K = 10^4 is {previous:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 9] = [
        ("counterexample reproduction", counterexample, 1000),
        ("minimum of convex deviations is star-shaped", min_of_convex_is_star, 5000),
        ("ray-envelope attainment", ray_envelope_attainment, 2000),
        ("acceptance-set round trip", acceptance_round_trip, 5000),
        ("risk and deviation correspondence", risk_deviation_correspondence, 5000),
        ("dual identities", dual_identities, 10_000),
        ("dominance inequalities", dominance_inequalities, 5000),
        ("halfline decomposition", halfline_decomposition, 2000),
        ("infimum versus minimum", infimum_is_not_minimum, 1000),
    ];
    let mut failures = 0;
    for (i, (name, run, budget_ms)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_millis(budget_ms) => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget_ms} ms"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {elapsed:.2?})", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {}: FAIL {name} ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures > 0 && std::env::var_os(STRICT_ENV).is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
