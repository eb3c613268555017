//! Lower bounds on `||Q^L||_inf` by block-coordinate phase ascent.
//!
//! `Q` is linear in each block, so with every other block fixed
//! `Q = sum_i z_i g_i` and the best torus choice for the block is
//! `z_i = conj(g_i) / |g_i|`, giving `|Q| = sum_i |g_i|`. Cycling through the
//! blocks therefore never decreases `|Q|`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::walsh::{TorusPoint, WalshPolynomial};

/// Stop a start once a sweep improves by no more than this.
pub const ASCENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    /// Independent random starts.
    pub starts: usize,
    /// Sweep cap per start.
    pub max_sweeps: usize,
    pub tol: f64,
    pub seed: u64,
    /// Unit phase the normalization targets: `beta * tau * Q(point) > 0`.
    pub beta: Complex64,
}

impl AscentConfig {
    pub fn new(starts: usize, seed: u64) -> Self {
        Self {
            starts: starts.max(1),
            max_sweeps: 500,
            tol: ASCENT_TOL,
            seed,
            beta: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_beta(mut self, beta: Complex64) -> Self {
        self.beta = beta;
        self
    }
}

/// A torus point with large `|Q|` plus the phase `tau` that aligns it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormWitness {
    pub level: u32,
    pub point: TorusPoint,
    /// `|Q(point)|`, a lower bound on the sup norm.
    pub value: f64,
    pub beta: Complex64,
    pub tau: Complex64,
    /// `point` with its first block multiplied by `tau`.
    pub normalized_point: TorusPoint,
    /// Best value found so far after each sweep, across starts in order.
    pub history: Vec<f64>,
    pub seed: u64,
}

impl SupNormWitness {
    /// Wraps an arbitrary point, choosing `tau` so that
    /// `beta * Q(normalized_point) = |Q(point)|`.
    pub fn from_point(poly: &WalshPolynomial, point: TorusPoint, beta: Complex64) -> Result<Self> {
        let q = poly.evaluate_cascade(&point)?;
        let tau = align_phase(beta * q);
        Ok(Self {
            level: poly.level(),
            normalized_point: point.rotate_first_block(tau),
            value: q.norm(),
            point,
            beta,
            tau,
            history: Vec::new(),
            seed: 0,
        })
    }

    /// Same witness re-normalized for another `beta`.
    pub fn aligned_to(&self, beta: Complex64, poly: &WalshPolynomial) -> Result<Self> {
        let mut w = Self::from_point(poly, self.point.clone(), beta)?;
        w.history = self.history.clone();
        w.seed = self.seed;
        Ok(w)
    }
}

/// Unit `tau` with `tau * w` real and nonnegative; 1 when `w = 0`.
pub fn align_phase(w: Complex64) -> Complex64 {
    let n = w.norm();
    if n == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        w.conj() / n
    }
}

/// Runs `budget` independent random starts with seed `seed`.
pub fn sup_norm_lower_search(poly: &WalshPolynomial, budget: usize, seed: u64) -> Result<SupNormWitness> {
    sup_norm_search(poly, &AscentConfig::new(budget, seed))
}

pub fn sup_norm_search(poly: &WalshPolynomial, cfg: &AscentConfig) -> Result<SupNormWitness> {
    let runs: Vec<(TorusPoint, Vec<f64>)> = (0..cfg.starts.max(1))
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(start as u64);
            let z = TorusPoint::random(poly.sizes(), &mut rng);
            phase_ascent(poly, z, cfg.max_sweeps, cfg.tol)
        })
        .collect::<Result<_>>()?;

    let mut history = Vec::new();
    let mut best_so_far = f64::NEG_INFINITY;
    let mut best: Option<(usize, f64)> = None;
    for (i, (_, h)) in runs.iter().enumerate() {
        for &v in h {
            best_so_far = best_so_far.max(v);
            history.push(best_so_far);
        }
        let last = *h.last().expect("at least the starting value");
        // ties keep the earlier start
        if best.is_none_or(|(_, b)| last > b) {
            best = Some((i, last));
        }
    }
    let (i, _) = best.expect("starts >= 1");
    let point = runs.into_iter().nth(i).expect("index valid").0;
    let mut w = SupNormWitness::from_point(poly, point, cfg.beta)?;
    w.history = history;
    w.seed = cfg.seed;
    Ok(w)
}

/// Cyclic block ascent from `z`. Returns the final point and `|Q|` after
/// each sweep (the first entry is the starting value).
pub fn phase_ascent(
    poly: &WalshPolynomial,
    mut z: TorusPoint,
    max_sweeps: usize,
    tol: f64,
) -> Result<(TorusPoint, Vec<f64>)> {
    let mut values = vec![poly.evaluate_cascade(&z)?.norm()];
    for _ in 0..max_sweeps {
        for j in 0..poly.m() {
            let g = poly.block_gradient(&z, j)?;
            for (zi, gi) in z.blocks[j].iter_mut().zip(&g) {
                let n = gi.norm();
                if n > 0.0 {
                    *zi = gi.conj() / n;
                }
            }
        }
        let v = poly.evaluate_cascade(&z)?.norm();
        let prev = *values.last().expect("nonempty");
        values.push(v.max(prev));
        if v - prev <= tol {
            break;
        }
    }
    Ok((z, values))
}

/// Maximizes `Re(beta Q(y))` over points `y_e = center_e exp(i phi_e)` with
/// `|phi_e| <= max_angle`, by cyclic block updates (each coordinate's clamped
/// optimum is closed-form). Never decreases the objective.
pub fn arc_constrained_ascent(
    poly: &WalshPolynomial,
    center: &TorusPoint,
    max_angle: f64,
    beta: Complex64,
    max_sweeps: usize,
) -> Result<TorusPoint> {
    poly.check_point(center)?;
    let mut y = center.clone();
    let mut prev = (beta * poly.evaluate_cascade(&y)?).re;
    for _ in 0..max_sweeps {
        for j in 0..poly.m() {
            let g = poly.block_gradient(&y, j)?;
            for (i, gi) in g.iter().enumerate() {
                let c = center.blocks[j][i];
                let w = beta * gi * c;
                if w.norm() == 0.0 {
                    continue;
                }
                let phi = (-w.arg()).clamp(-max_angle, max_angle);
                y.blocks[j][i] = c * Complex64::cis(phi);
            }
        }
        let v = (beta * poly.evaluate_cascade(&y)?).re;
        if v - prev <= ASCENT_TOL {
            break;
        }
        prev = v;
    }
    Ok(y)
}
