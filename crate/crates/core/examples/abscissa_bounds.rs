//! Exact abscissa bounds for a few block profiles.

use bohrstrip::bounds::{abscissa_bounds, AbscissaBounds};
use bohrstrip::{parse_profile, ConstructionParams, Result};

pub fn run_example() -> Result<Vec<AbscissaBounds>> {
    let mut out = Vec::new();
    for rho in ["1,1", "3/4,1,1", "1/2,1,1", "1,1,1"] {
        let profile = parse_profile(rho)?;
        let b = abscissa_bounds(&ConstructionParams::new(profile.len(), profile, 1)?);
        let e = b.exact.expect("rational profile");
        println!(
            "rho = ({rho}): sigma_b in [0, {}], sigma_a >= {}, sigma_c <= {}{}",
            e.sigma_b_upper,
            e.sigma_a_lower,
            e.sigma_c_upper,
            if b.valid { "" } else { "  (no convergence beyond 0)" }
        );
        out.push(b);
    }
    Ok(out)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
