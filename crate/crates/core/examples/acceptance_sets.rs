//! Acceptance sets, the deviation they generate, and Minkowski gauges.

use stardev::envelopes::{acceptance_of, deviation_of_default, is_star_shaped_set, AcceptanceSet};
use stardev::measures::{catalog, minkowski, sd, DEFAULT_GAUGE_CEILING};
use stardev::{AuditConfig, Functional, RandomVariable};

fn main() -> stardev::Result<()> {
    let d = stardev::measures::composite_iqd_sq_plus_sd(0.4)?;
    let a = acceptance_of(&d);
    let x = RandomVariable::uniform(vec![-3.0, -1.0, 0.0, 4.0])?;
    println!("{} contains X: {}", a.description(), a.contains(&x));
    println!("contains X + 10: {}", a.contains(&x.shift(10.0)));
    println!("D(X) = {:.9}, recovered from the set = {:.9}", d.evaluate(&x)?, deviation_of_default(&a, &x)?);

    let config = AuditConfig {
        n_variables: 60,
        ..AuditConfig::default()
    };
    let f = is_star_shaped_set(&a, &config);
    println!("star-shaped set check: {:?} over {} memberships", f.status, f.cases);

    let ball = AcceptanceSet::sublevel(&catalog::sd(), 1.0);
    println!("gauge of {{SD <= 1}} at X = {:.9}, SD(X) = {:.9}", minkowski(&ball, &x, DEFAULT_GAUGE_CEILING)?, sd(&x));
    Ok(())
}
