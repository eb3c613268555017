//! Lower bounds on the sup norm of `Q^L` by phase ascent, bracketed by the
//! analytic upper bound.

use bohrstrip::ascent::sup_norm_lower_search;
use bohrstrip::{ConstructionParams, Result, WalshPolynomial};

/// `(level, searched, upper)` per level.
pub fn run_example() -> Result<Vec<(u32, f64, f64)>> {
    let params = ConstructionParams::flat(2, 5)?;
    let mut out = Vec::new();
    for level in 1..=5 {
        let q = WalshPolynomial::new(&params, level)?;
        let w = sup_norm_lower_search(&q, 8, 0)?;
        println!(
            "L = {level}: searched {:>9.4} <= upper {:>9.4}  (certificate {:.4}, {} sweeps)",
            w.value,
            q.sup_norm_upper(),
            q.bh_certificate(),
            w.history.len()
        );
        out.push((level, w.value, q.sup_norm_upper()));
    }
    Ok(out)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
