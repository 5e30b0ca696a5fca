//! Deviations as suprema over VaR and ES levels.

use stardev::duality::{default_alpha_grid, dual_es_eval, dual_var_eval, g_from_acceptance, seeded_family, GFamily};
use stardev::measures::{catalog, lower_range};
use stardev::RandomVariable;

fn main() -> stardev::Result<()> {
    let x = RandomVariable::uniform(vec![-3.0, -1.0, 0.0, 2.0, 7.0])?;
    let grid = default_alpha_grid(10);

    let zero = GFamily::zero(grid.clone())?;
    println!("zero family: var {} es {} lower range {}", dual_var_eval(&zero, &x)?, dual_es_eval(&zero, &x)?, lower_range(&x));

    let family = seeded_family(grid.clone(), 3, 5)?;
    println!("seeded star-closed family: var {:.4} es {:.4}", dual_var_eval(&family, &x)?, dual_es_eval(&family, &x)?);

    let y = RandomVariable::uniform(vec![-2.0, 2.0])?;
    match g_from_acceptance(&y, &catalog::sd(), &grid)? {
        Some(curve) => println!("curve from Y: {:?}", curve.values()),
        None => println!("Y = (-2, 2) is not an admissible acceptance anchor for SD"),
    }
    Ok(())
}
