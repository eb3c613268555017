//! Every invariant suite on a small configuration, as JSON.

use bohrstrip::experiments::{run_full_verification, TabularReport, VerificationReport};
use bohrstrip::{ConstructionParams, Result};

pub fn run_example() -> Result<VerificationReport> {
    let report = run_full_verification(&ConstructionParams::flat(2, 1)?, 5, 0)?;
    println!("{}", report.to_json()?);
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
