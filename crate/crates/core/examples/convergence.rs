//! Greedy level signs and the partial sums at `s = -epsilon`.

use bohrstrip::experiments::{run_convergence_experiment, ConvergenceReport};
use bohrstrip::{ConstructionParams, Result};

pub fn run_example() -> Result<ConvergenceReport> {
    let report = run_convergence_experiment(&ConstructionParams::flat(2, 7)?, 0)?;
    println!("epsilon = {}", report.epsilon);
    for r in &report.rows {
        println!(
            "L = {}: d = {}, term {:.4}, running {:+.4}, A_N at boundary {:+.6}",
            r.level, r.d, r.term, r.running, r.boundary_re
        );
    }
    println!(
        "terms decreasing from {:?}; oscillation over the last three boundaries {:.4}; last term {:.4}",
        report.decreasing_from, report.oscillation_last3, report.last_term
    );
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
