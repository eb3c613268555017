//! A large partial sum on the imaginary axis from one well-chosen `t`.

use bohrstrip::kronecker::{demonstrate_large_partial_sum, DemoConfig, KroneckerReport};
use bohrstrip::{ConstructionParams, Result};

pub fn run_example() -> Result<Vec<KroneckerReport>> {
    let params = ConstructionParams::flat(2, 1)?;
    let mut out = Vec::new();
    for levels in 1..=2 {
        let cfg = DemoConfig::for_levels(2, levels).with_delta(0.2);
        let r = demonstrate_large_partial_sum(&params, &cfg)?;
        println!(
            "L_K = {}: t_K = {:.6} ({:?} witnesses), |A_N| = {:.4} >= bound {:.4}, budget {:.4}",
            r.levels,
            r.t,
            r.witness_mode,
            r.partial_sum.norm(),
            r.bound,
            r.error_budget
        );
        out.push(r);
    }
    Ok(out)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
