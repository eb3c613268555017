//! The polynomial `Q^L`: its norms, and the cascade evaluation against the
//! direct monomial sum.

use bohrstrip::walsh::walsh_norm_identity_check;
use bohrstrip::{ConstructionParams, Result, TorusPoint, WalshPolynomial};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest relative gap between the two evaluation routes.
pub fn run_example() -> Result<f64> {
    let params = ConstructionParams::flat(3, 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for level in 1..=4 {
        let q = WalshPolynomial::new(&params, level)?;
        let z = TorusPoint::random(q.sizes(), &mut rng);
        let (a, b) = (q.evaluate_cascade(&z)?, q.evaluate_direct(&z)?);
        worst = worst.max((a - b).norm() / b.norm());
        println!(
            "L = {level}: r = {:?}, wiener {} , sup upper {:.3}, certificate {:.3}, |Q(z)| = {:.3}",
            q.sizes(),
            q.wiener_norm(),
            q.sup_norm_upper(),
            q.bh_certificate(),
            a.norm()
        );
    }
    let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
    println!("walsh identity (2, 4): {}", walsh_norm_identity_check(2, 4, &v)?);
    println!("max relative gap cascade vs direct: {worst:.2e}");
    Ok(worst)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
