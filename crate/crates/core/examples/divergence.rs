//! Absolute divergence to the left of the absolute-convergence bound.

use bohrstrip::experiments::{run_divergence_experiment, DivergenceReport, TabularReport};
use bohrstrip::{ConstructionParams, Result};

pub fn run_example() -> Result<(DivergenceReport, DivergenceReport)> {
    let params = ConstructionParams::flat(2, 9)?;
    let inside = run_divergence_experiment(&params, 0.2)?;
    let outside = run_divergence_experiment(&params, 0.35)?;
    for (a, b) in inside.rows.iter().zip(&outside.rows) {
        println!(
            "L = {}: sigma 0.2 level sum {:.4} (cumulative {:.3}) | sigma 0.35 level sum {:.4}",
            a.level, a.level_sum, a.cumulative, b.level_sum
        );
    }
    println!("calibrated constant {:.4}, diverging: {}", inside.calibrated_constant, inside.passed());
    Ok((inside, outside))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
