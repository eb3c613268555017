//! Level contributions on a vertical line `Re s = sigma > 0`.

use bohrstrip::experiments::{run_boundedness_experiment, BoundednessReport, TabularReport};
use bohrstrip::{ConstructionParams, Result};

pub fn run_example() -> Result<BoundednessReport> {
    let report = run_boundedness_experiment(&ConstructionParams::flat(2, 6)?, 1.0, 32, 0)?;
    for r in &report.rows {
        println!("L = {}: weighted max {:.3e}, sampled {:.3e} <= bound {:.3e}", r.level, r.weighted_max, r.max_abs, r.bound);
    }
    println!(
        "fitted log2 rate {:.3} vs predicted {:.3}: {}",
        report.fitted_rate,
        report.predicted_rate,
        if report.passed() { "pass" } else { "FAIL" }
    );
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
