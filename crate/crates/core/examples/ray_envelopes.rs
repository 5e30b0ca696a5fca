//! Star-shaped deviations as minima of convex ray envelopes.

use stardev::envelopes::{attainment_residual, envelope_family, seeded_anchors, seeded_variables_on, verify_domination, Variant};
use stardev::measures::min_family;
use stardev::{AuditConfig, Functional};

fn main() -> stardev::Result<()> {
    let d = stardev::measures::composite_iqd_sq_plus_sd(0.4)?;
    let config = AuditConfig::default();
    let anchors = seeded_anchors(&config, 20, "example-anchors");
    let envs = envelope_family(&d, &anchors, Variant::Star)?;

    let dominated = envs.iter().filter(|e| verify_domination(&d, e, &config).passed()).count();
    println!("{dominated} of {} star envelopes dominate D on their rays", envs.len());

    let y = &anchors[3];
    println!("D(Y) = {:.6}", d.evaluate(y)?);
    for t in [0.25, 0.5, 1.0] {
        let (m, i) = min_family(&envs, &y.scale(t))?;
        println!("  t = {t}: min envelope {m:.6} (anchor {i}), D(tY) = {:.6}", d.evaluate(&y.scale(t))?);
    }

    let tests = seeded_variables_on(&config, anchors[0].space(), 20, "example-tests");
    println!("attainment residual with own anchors: {:e}", attainment_residual(&d, &anchors, &tests, Variant::Star)?);
    Ok(())
}
