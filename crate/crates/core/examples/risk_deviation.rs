//! Moving between risk measures and deviation measures.

use stardev::axioms::{check_risk_axioms, AuditConfig, Property};
use stardev::duality::{check_limitedness, deviation_from_risk, risk_from_deviation};
use stardev::measures::catalog;
use stardev::{Functional, RandomVariable};

fn main() -> stardev::Result<()> {
    let x = RandomVariable::uniform(vec![-2.0, 0.0, 1.0, 5.0])?;
    let es = catalog::es_risk(0.25)?;
    let d = deviation_from_risk(&es);
    println!("ES(X) = {:.4}, ES deviation D(X) = ES(X - E[X]) = {:.4}", es.evaluate(&x)?, d.evaluate(&x)?);

    let rho = risk_from_deviation(&catalog::lr());
    println!("-E + LR gives -ess inf: {} vs {}", rho.evaluate(&x)?, -x.ess_inf());

    let config = AuditConfig {
        n_variables: 100,
        n_pairs: 100,
        ..AuditConfig::default()
    };
    for base in [catalog::sd_minus(), catalog::fr()] {
        let report = check_risk_axioms(&risk_from_deviation(&base), &config);
        println!("-E + {}: monotone {}", base.name(), report.passed(Property::Monotonicity));
        let limited = check_limitedness(&catalog::neg_mean(), &base, &config);
        println!("    limitedness with -E: {:?}", limited.status);
    }
    Ok(())
}
