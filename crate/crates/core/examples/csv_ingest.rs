//! Builds an equally weighted position from a CSV column and evaluates it.

use std::io::Write;

use stardev::cli::read_column;
use stardev::empirical_from_samples;
use stardev::measures::{es_alpha, sd};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut file = tempfile::NamedTempFile::new()?;
    writeln!(file, "date,ret\n2024-01-02,0.012\n2024-01-03,-0.031\n2024-01-04,0.004\n2024-01-05,-0.007\n2024-01-08,0.021")?;
    let samples = read_column(file.path(), "ret")?;
    let (_, x) = empirical_from_samples(&samples)?;
    println!("{} observations, mean {:.5}", x.len(), x.expectation());
    println!("sd {:.5}, es@0.2 {:.5}", sd(&x), es_alpha(&x, 0.2)?);

    // A malformed cell is reported with its line number.
    writeln!(file, "2024-01-09,n/a")?;
    if let Err(e) = read_column(file.path(), "ret") {
        println!("rejected: {e}");
    }
    Ok(())
}
