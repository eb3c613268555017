//! Bounds on the three abscissae for the default decay
//! `X = (rho_1 + ... + rho_M)(M + 1)/(2M)`.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::params::{ratio_to_f64, ConstructionParams};

/// Exact values when the profile is rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactBounds {
    pub sigma_b_upper: Rational64,
    pub sigma_a_lower: Rational64,
    pub sigma_c_upper: Rational64,
}

/// `sigma_b` lies in `[sigma_b_lower, sigma_b_upper]`; only the interval is
/// known in general.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AbscissaBounds {
    #[serde(rename = "sigmaB_upper")]
    pub sigma_b_upper: f64,
    #[serde(rename = "sigmaB_lower")]
    pub sigma_b_lower: f64,
    #[serde(rename = "sigmaA_lower")]
    pub sigma_a_lower: f64,
    #[serde(rename = "sigmaC_upper")]
    pub sigma_c_upper: f64,
    /// The `sigma_c` bound is negative.
    pub valid: bool,
    pub exact: Option<ExactBounds>,
}

impl AbscissaBounds {
    /// `sigma_a_lower - sigma_b_upper`.
    pub fn strip_gap(&self) -> f64 {
        self.sigma_a_lower - self.sigma_b_upper
    }

    /// `sigma_b_lower - sigma_c_upper`.
    pub fn convergence_gap(&self) -> f64 {
        self.sigma_b_lower - self.sigma_c_upper
    }

    pub fn exact_strip_gap(&self) -> Option<Rational64> {
        self.exact.map(|e| e.sigma_a_lower - e.sigma_b_upper)
    }

    pub fn exact_convergence_gap(&self) -> Option<Rational64> {
        self.exact.map(|e| -e.sigma_c_upper)
    }
}

fn exact_bounds(m: i64, rho: &[Rational64]) -> ExactBounds {
    let mr = Rational64::from_integer(m);
    let one = Rational64::from_integer(1);
    let sum: Rational64 = rho.iter().sum();
    let pen = rho[rho.len() - 2];
    let skip = sum - pen;
    ExactBounds {
        sigma_b_upper: (one - sum / mr) / (mr * 2),
        sigma_a_lower: sum * (m - 1) / (mr * mr * 2),
        sigma_c_upper: (skip * (m - 1) - pen * (m + 1)) / (mr * mr * 2),
    }
}

/// Evaluates the bounds exactly for rational profiles, in floats otherwise.
/// The formulas assume the default decay; `params.decay()` is not consulted.
pub fn abscissa_bounds(params: &ConstructionParams) -> AbscissaBounds {
    let m = params.m();
    let exact = params.rho_exact().map(|rho| exact_bounds(m as i64, &rho));
    let (b, a, c) = match exact {
        Some(e) => (
            ratio_to_f64(e.sigma_b_upper),
            ratio_to_f64(e.sigma_a_lower),
            ratio_to_f64(e.sigma_c_upper),
        ),
        None => {
            let mf = m as f64;
            let sum = params.rho_sum();
            let skip = params.rho_sum_skip_penultimate();
            let pen = sum - skip;
            (
                (1.0 - sum / mf) / (2.0 * mf),
                (mf - 1.0) * sum / (2.0 * mf * mf),
                ((mf - 1.0) * skip - (mf + 1.0) * pen) / (2.0 * mf * mf),
            )
        }
    };
    let valid = match exact {
        Some(e) => e.sigma_c_upper < Rational64::from_integer(0),
        None => c < 0.0,
    };
    AbscissaBounds {
        sigma_b_upper: b,
        sigma_b_lower: 0.0,
        sigma_a_lower: a,
        sigma_c_upper: c,
        valid,
        exact,
    }
}
