//! Audits a few deviation measures and prints their classification and first witnesses.

use stardev::axioms::{audit_deviation, AuditConfig};
use stardev::measures::{add, catalog, composite_iqd_sq_plus_sd, min_of, scale_functional};

fn main() -> stardev::Result<()> {
    let config = AuditConfig {
        n_variables: 100,
        n_pairs: 100,
        ..AuditConfig::default()
    };
    let subjects = vec![
        catalog::sd(),
        catalog::iqd(0.4)?,
        composite_iqd_sq_plus_sd(0.4)?,
        min_of(&[
            catalog::fr(),
            scale_functional(&catalog::sd(), 2.0)?,
            add(&catalog::ied(0.25)?, &catalog::sd()),
        ])?,
    ];
    for d in &subjects {
        let report = audit_deviation(d, &config);
        let class = report.classification.as_ref().expect("deviation audits classify");
        println!("{:<24} {}", report.subject, class.summary);
        for f in report.fragments.iter().filter(|f| f.failed()) {
            let w = &f.witnesses[0];
            let (lhs, rhs) = (w.lhs.map_or(f64::NAN, |v| v.0), w.rhs.map_or(f64::NAN, |v| v.0));
            println!("    {:?}: {} of {} cases, first witness {lhs:.4} vs {rhs:.4}", f.property, f.violations, f.cases);
        }
    }
    Ok(())
}
