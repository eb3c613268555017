//! Prime blocks and the ordered product set of the first levels.

use bohrstrip::lattice::{build_level, structural_checks, CheckOutcome};
use bohrstrip::{ConstructionParams, Result};

pub fn run_example() -> Result<Vec<CheckOutcome>> {
    let params = ConstructionParams::flat(2, 3)?;
    let lat = build_level(&params, 1)?;
    println!("level 1 blocks r = {:?}, primes {:?}", lat.sizes(), lat.prime_blocks());
    for (n, idx) in lat.entries() {
        println!("  n = {n:>4}  index {:?}", idx.0);
    }
    for level in 2..=3 {
        let lat = build_level(&params, level)?;
        println!("level {level}: {} products in [{}, {}]", lat.len(), lat.min_n(), lat.max_n());
    }
    let checks = structural_checks(&params, 8, 1 << 20)?;
    for c in &checks {
        println!("{:<14} {}  {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.detail);
    }
    Ok(checks)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
