//! Evaluates the built-in deviation and risk measures on a few positions.

use stardev::measures::{ied, iqd, lvar_d, sd, sd_minus, BenchmarkCurve};
use stardev::{parse_catalog_id, CatalogEntry, ProbSpace, RandomVariable};

fn main() -> stardev::Result<()> {
    let space = ProbSpace::new(vec![0.1, 0.2, 0.3, 0.4])?;
    let x = RandomVariable::new(space, vec![-4.0, -1.0, 0.5, 2.0])?;
    println!("X = {:?}, E[X] = {}", x.values(), x.expectation());

    for id in ["sd", "sd_minus", "fr", "lr", "ur", "iqd@0.25", "ied@0.25", "iqd2+sd@0.4", "chi_const", "var@0.1", "es@0.1"] {
        let value = match parse_catalog_id(id)? {
            CatalogEntry::Deviation(d) => stardev::Functional::evaluate(&d, &x)?,
            CatalogEntry::Risk(r) => stardev::Functional::evaluate(&r, &x)?,
        };
        println!("{id:>12}  {value:.6}");
    }

    // Direct formulas agree with the catalog.
    println!("sd {:.6} sd_minus {:.6}", sd(&x), sd_minus(&x));
    println!("iqd@0.25 {:.6} <= ied@0.25 {:.6}", iqd(&x, 0.25)?, ied(&x, 0.25)?);

    let curve = BenchmarkCurve::new(vec![(0.0, 0.1), (1.0, 0.5)])?;
    println!("lvar_d with a two-step curve: {:.6}", lvar_d(&x, &curve));
    Ok(())
}
