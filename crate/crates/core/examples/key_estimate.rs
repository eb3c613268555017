//! Exhaustive prefix scan of the phase sums, normalized by the predicted
//! growth.

use bohrstrip::lattice::{build_levels, interval_property_holds};
use bohrstrip::series::{key_estimate_ratio, key_estimate_scan};
use bohrstrip::{ConstructionParams, Result};

/// Normalized maxima per level.
pub fn run_example() -> Result<Vec<f64>> {
    let params = ConstructionParams::flat(2, 6)?;
    let mut ratios = Vec::new();
    for lat in build_levels(&params)? {
        let est = key_estimate_scan(&lat);
        let ratio = key_estimate_ratio(&params, &est);
        println!(
            "L = {}: max |prefix sum| = {:>8.3} at P = {:>10}, ratio {:.4}, interval property {}",
            est.level,
            est.max_abs,
            est.attaining_p,
            ratio,
            interval_property_holds(&lat)
        );
        ratios.push(ratio);
    }
    Ok(ratios)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
