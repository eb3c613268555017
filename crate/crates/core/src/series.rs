//! The Dirichlet series `f(s) = sum a_n n^{-s}` with
//! `a_n = beta_L 2^{-XL} gamma_n` for `n` in the level-`L` product set and
//! `a_n = 0` otherwise, where `gamma_n` is the unit phase of the multi-index
//! of `n`.
//!
//! Because every level's products precede the next level's, the partial sum
//! up to `N` splits into complete levels plus a prefix of the frontier level
//! `L*(N)`:
//!
//! ```text
//! A_N(s) = sum_{L < L*} beta_L 2^{-XL} P_L(s) + beta_{L*} 2^{-X L*} Gamma(N, s)
//! ```
//!
//! The weight of the frontier term is taken to be `2^{-X L*}`, the same
//! weight the complete levels carry.

use std::io::{Read, Write};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LevelLattice, MultiIndex};
use crate::params::{ratio_to_f64, ConstructionParams};
use crate::walsh::{unit_phase, TorusPoint, WalshPolynomial};

/// `gamma_n` for every entry of the lattice, in ascending-`n` order.
pub fn lattice_phases(lattice: &LevelLattice) -> Vec<Complex64> {
    let mut idx = vec![0usize; lattice.m()];
    (0..lattice.len())
        .map(|pos| {
            lattice.multi_index_into(pos, &mut idx);
            unit_phase(lattice.sizes(), &idx)
        })
        .collect()
}

/// `n^{-s} = exp(-s ln n)`.
#[inline]
pub fn n_pow_neg_s(n: u64, s: Complex64) -> Complex64 {
    (-s * (n as f64).ln()).exp()
}

/// Level weight `2^{-XL}`.
pub fn level_weight(params: &ConstructionParams, level: u32) -> f64 {
    (-params.decay() * level as f64).exp2()
}

/// `sum_{n <= P} gamma_n` over one level, summed in ascending `n`.
pub fn prefix_phase_sum(lattice: &LevelLattice, bound: u64) -> Complex64 {
    let k = lattice.count_le(bound);
    let mut idx = vec![0usize; lattice.m()];
    let mut sum = Complex64::zero();
    for pos in 0..k {
        lattice.multi_index_into(pos, &mut idx);
        sum += unit_phase(lattice.sizes(), &idx);
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimate {
    pub level: u32,
    /// Largest `|sum_{n <= P} gamma_n|` over all thresholds `P`.
    pub max_abs: f64,
    /// Smallest product `P` at which `max_abs` is attained.
    pub attaining_p: u64,
    /// Modulus of the full-level sum.
    pub full_abs: f64,
}

/// Scans every prefix of the ascending product set.
pub fn key_estimate_scan(lattice: &LevelLattice) -> KeyEstimate {
    let mut sum = Complex64::zero();
    let mut best = (0.0f64, 0u64);
    for (g, &n) in lattice_phases(lattice).iter().zip(lattice.ns()) {
        sum += g;
        let a = sum.norm();
        if a > best.0 {
            best = (a, n);
        }
    }
    KeyEstimate {
        level: lattice.level(),
        max_abs: best.0,
        attaining_p: best.1,
        full_abs: sum.norm(),
    }
}

/// `max_abs / (2^{(rho_1 + ... + rho_{M-2} + rho_M) L} L)`.
pub fn key_estimate_ratio(params: &ConstructionParams, est: &KeyEstimate) -> f64 {
    let l = est.level as f64;
    est.max_abs / ((params.rho_sum_skip_penultimate() * l).exp2() * l)
}

/// `Omega_L(eps) = sum gamma_n n^eps` over the whole level.
pub fn omega_l(lattice: &LevelLattice, eps: f64) -> Complex64 {
    level_sum(lattice, Complex64::new(-eps, 0.0))
}

/// `P_L(s) = sum gamma_n n^{-s}` summed over the products in ascending order.
pub fn level_sum(lattice: &LevelLattice, s: Complex64) -> Complex64 {
    lattice_phases(lattice)
        .iter()
        .zip(lattice.ns())
        .map(|(g, &n)| g * n_pow_neg_s(n, s))
        .sum()
}

/// `P_L(s) = Q^L(p^{-s}, ...)`: the multilinear form evaluated at the prime
/// powers, by the Walsh cascade.
pub fn level_sum_via_polynomial(lattice: &LevelLattice, s: Complex64) -> Result<Complex64> {
    let poly = WalshPolynomial::from_sizes(lattice.sizes().to_vec())?;
    let z = TorusPoint {
        blocks: lattice
            .prime_blocks()
            .iter()
            .map(|b| b.iter().map(|&p| n_pow_neg_s(p, s)).collect())
            .collect(),
    };
    poly.evaluate_cascade(&z)
}

/// `Omega_L(eps)` rebuilt from prefix phase sums by summation by parts:
/// `sum_{j<p} (n_j^eps - n_{j+1}^eps) G_j + n_p^eps G_p`.
pub fn omega_via_summation_by_parts(lattice: &LevelLattice, eps: f64) -> Complex64 {
    let phases = lattice_phases(lattice);
    let ns = lattice.ns();
    let weights: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(eps)).collect();
    let mut prefix = Complex64::zero();
    let mut out = Complex64::zero();
    for j in 0..ns.len() {
        prefix += phases[j];
        let next = weights.get(j + 1).copied().unwrap_or(0.0);
        out += (weights[j] - next) * prefix;
    }
    out
}

/// `Gamma(N, eps)`: the weighted prefix of the frontier level.
pub fn gamma_partial(lattice: &LevelLattice, n_bound: u64, eps: f64) -> Result<Complex64> {
    gamma_partial_at(lattice, n_bound, Complex64::new(-eps, 0.0))
}

/// `Gamma` at a general point: `sum_{n <= N} gamma_n n^{-s}` over the
/// frontier level. `N` must reach the level's smallest product.
pub fn gamma_partial_at(lattice: &LevelLattice, n_bound: u64, s: Complex64) -> Result<Complex64> {
    if n_bound < lattice.min_n() {
        return Err(Error::Precondition(format!(
            "N = {n_bound} is below the smallest product {} of level {}, so this is not the frontier level",
            lattice.min_n(),
            lattice.level()
        )));
    }
    let k = lattice.count_le(n_bound);
    let mut idx = vec![0usize; lattice.m()];
    let mut sum = Complex64::zero();
    for pos in 0..k {
        lattice.multi_index_into(pos, &mut idx);
        sum += unit_phase(lattice.sizes(), &idx) * n_pow_neg_s(lattice.ns()[pos], s);
    }
    Ok(sum)
}

/// `|sum a_i b_i - (sum_{j<p} (a_j - a_{j+1}) B_j + a_p B_p)|` with
/// `B_j = b_1 + ... + b_j`, both sides evaluated independently.
pub fn summation_by_parts_check(a: &[f64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParams("sequences must be nonempty".into()));
    }
    let lhs: Complex64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let p = a.len();
    let mut partial = Complex64::zero();
    let mut rhs = Complex64::zero();
    for j in 0..p - 1 {
        partial += b[j];
        rhs += (a[j] - a[j + 1]) * partial;
    }
    partial += b[p - 1];
    rhs += a[p - 1] * partial;
    Ok((lhs - rhs).norm())
}

/// `eps = -(1/M) [(rho_1 + ... + rho_{M-2} + rho_M) - X]`, exactly when the
/// profile and decay are rational.
pub fn epsilon_exact(params: &ConstructionParams) -> Option<Rational64> {
    let rho = params.rho_exact()?;
    let x = params.decay_exponent().exact?;
    let m = params.m();
    let skip: Rational64 = rho.iter().sum::<Rational64>() - rho[m - 2];
    Some(-(skip - x) / Rational64::from_integer(m as i64))
}

/// The abscissa offset at which level contributions stop growing
/// exponentially. Errors when it is not positive.
pub fn epsilon_for_convergence(params: &ConstructionParams) -> Result<f64> {
    let eps = match epsilon_exact(params) {
        Some(r) if r <= Rational64::zero() => return Err(Error::NonPositiveEpsilon(ratio_to_f64(r))),
        Some(r) => ratio_to_f64(r),
        None => -(params.rho_sum_skip_penultimate() - params.decay()) / params.m() as f64,
    };
    if eps <= 0.0 {
        return Err(Error::NonPositiveEpsilon(eps));
    }
    Ok(eps)
}

/// Greedy toward-zero signs: `d_L = 0` when the running sum is `<= 0`,
/// else 1. Returns the exponents and the running sums.
pub fn greedy_signs(terms: &[f64]) -> (Vec<u8>, Vec<f64>) {
    let mut s = 0.0;
    let mut ds = Vec::with_capacity(terms.len());
    let mut running = Vec::with_capacity(terms.len());
    for &t in terms {
        let d = u8::from(s > 0.0);
        s += if d == 0 { t } else { -t };
        ds.push(d);
        running.push(s);
    }
    (ds, running)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignEntry {
    #[serde(rename = "L")]
    pub level: u32,
    #[serde(rename = "d_L")]
    pub d: u8,
    pub re_beta: f64,
    pub im_beta: f64,
    pub abs_omega: f64,
    /// `2^{-XL} |Omega_L(eps)|`.
    pub term: f64,
    /// Running sum of the signed terms through this level.
    pub running: f64,
}

impl SignEntry {
    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.re_beta, self.im_beta)
    }
}

/// Signs `beta_L` with `beta_L Omega_L(eps) = (-1)^{d_L} |Omega_L(eps)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignAssignment {
    pub epsilon: f64,
    pub levels: Vec<SignEntry>,
}

impl SignAssignment {
    pub fn betas(&self) -> Vec<Complex64> {
        self.levels.iter().map(SignEntry::beta).collect()
    }

    pub fn terms(&self) -> Vec<f64> {
        self.levels.iter().map(|e| e.term).collect()
    }

    pub fn running(&self) -> Vec<f64> {
        self.levels.iter().map(|e| e.running).collect()
    }
}

/// Applies the greedy rule to `2^{-XL}|Omega_L(eps)|` over the given levels.
pub fn choose_signs(params: &ConstructionParams, lattices: &[LevelLattice], eps: f64) -> SignAssignment {
    let omegas: Vec<Complex64> = lattices.iter().map(|l| omega_l(l, eps)).collect();
    signs_from_omegas(params, lattices, &omegas, eps)
}

pub(crate) fn signs_from_omegas(
    params: &ConstructionParams,
    lattices: &[LevelLattice],
    omegas: &[Complex64],
    eps: f64,
) -> SignAssignment {
    let terms: Vec<f64> = lattices
        .iter()
        .zip(omegas)
        .map(|(l, o)| level_weight(params, l.level()) * o.norm())
        .collect();
    let (ds, running) = greedy_signs(&terms);
    let levels = lattices
        .iter()
        .zip(omegas)
        .enumerate()
        .map(|(i, (lat, om))| {
            let sign = if ds[i] == 0 { 1.0 } else { -1.0 };
            let beta = if om.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                sign * om.conj() / om.norm()
            };
            SignEntry {
                level: lat.level(),
                d: ds[i],
                re_beta: beta.re,
                im_beta: beta.im,
                abs_omega: om.norm(),
                term: terms[i],
                running: running[i],
            }
        })
        .collect();
    SignAssignment { epsilon: eps, levels }
}

/// One nonzero term `a_n = beta_L 2^{-XL} gamma_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTerm {
    pub n: u64,
    pub idx: MultiIndex,
    pub level: u32,
    pub phase: Complex64,
    pub magnitude: f64,
    pub beta: Complex64,
}

impl CoefficientTerm {
    pub fn value(&self) -> Complex64 {
        self.beta * self.magnitude * self.phase
    }
}

/// The series truncated to the materialized levels `1..=K`.
#[derive(Debug, Clone)]
pub struct DirichletSeries {
    params: ConstructionParams,
    lattices: Vec<LevelLattice>,
    betas: Vec<Complex64>,
}

impl DirichletSeries {
    pub fn new(params: ConstructionParams, lattices: Vec<LevelLattice>, betas: Vec<Complex64>) -> Result<Self> {
        if betas.len() != lattices.len() {
            return Err(Error::LengthMismatch {
                left: betas.len(),
                right: lattices.len(),
            });
        }
        for (i, l) in lattices.iter().enumerate() {
            if l.level() != i as u32 + 1 || l.m() != params.m() {
                return Err(Error::InvalidParams(format!(
                    "lattices must be levels 1..=K of the same construction; entry {i} is level {}",
                    l.level()
                )));
            }
        }
        if let Some(b) = betas.iter().find(|b| (b.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidParams(format!("beta {b} is not unimodular")));
        }
        Ok(Self {
            params,
            lattices,
            betas,
        })
    }

    /// All `beta_L = 1`.
    pub fn unit_signs(params: ConstructionParams, lattices: Vec<LevelLattice>) -> Result<Self> {
        let betas = vec![Complex64::new(1.0, 0.0); lattices.len()];
        Self::new(params, lattices, betas)
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn lattices(&self) -> &[LevelLattice] {
        &self.lattices
    }

    pub fn betas(&self) -> &[Complex64] {
        &self.betas
    }

    /// `a_n`; zero when `n` lies in no materialized product set.
    pub fn coefficient(&self, n: u64) -> Complex64 {
        self.term(n).map_or(Complex64::zero(), |t| t.value())
    }

    pub fn term(&self, n: u64) -> Option<CoefficientTerm> {
        let li = self.lattices.partition_point(|l| l.max_n() < n);
        let lat = self.lattices.get(li)?;
        let pos = lat.position(n)?;
        let idx = lat.multi_index(pos);
        Some(CoefficientTerm {
            n,
            phase: unit_phase(lat.sizes(), idx.as_slice()),
            idx,
            level: lat.level(),
            magnitude: level_weight(&self.params, lat.level()),
            beta: self.betas[li],
        })
    }

    /// Nonzero terms in ascending `n`.
    pub fn terms(&self) -> impl Iterator<Item = CoefficientTerm> + '_ {
        self.lattices.iter().enumerate().flat_map(move |(li, lat)| {
            let weight = level_weight(&self.params, lat.level());
            let beta = self.betas[li];
            (0..lat.len()).map(move |pos| {
                let idx = lat.multi_index(pos);
                CoefficientTerm {
                    n: lat.ns()[pos],
                    phase: unit_phase(lat.sizes(), idx.as_slice()),
                    idx,
                    level: lat.level(),
                    magnitude: weight,
                    beta,
                }
            })
        })
    }

    /// `N` at which each level completes.
    pub fn level_boundaries(&self) -> Vec<u64> {
        self.lattices.iter().map(LevelLattice::max_n).collect()
    }

    /// Cumulative `sum_{L' <= L} beta_L' 2^{-XL'} P_L'(s)` for each level,
    /// with `P_L` evaluated through the multilinear form at prime powers.
    pub fn boundary_decomposition(&self, s: Complex64) -> Result<Vec<Complex64>> {
        let mut acc = Complex64::zero();
        self.lattices
            .iter()
            .zip(&self.betas)
            .map(|(lat, beta)| {
                acc += beta * level_weight(&self.params, lat.level()) * level_sum_via_polynomial(lat, s)?;
                Ok(acc)
            })
            .collect()
    }

    /// `A_N(s)` through complete levels below `L*(N)` plus the frontier
    /// prefix `Gamma(N, s)`.
    pub fn decomposed_partial_sum(&self, n_bound: u64, s: Complex64) -> Result<Complex64> {
        let Some(frontier) = self.lattices.iter().rposition(|l| l.min_n() <= n_bound) else {
            return Ok(Complex64::zero());
        };
        let mut acc = Complex64::zero();
        for (lat, beta) in self.lattices[..frontier].iter().zip(&self.betas) {
            acc += beta * level_weight(&self.params, lat.level()) * level_sum(lat, s);
        }
        let lat = &self.lattices[frontier];
        acc += self.betas[frontier] * level_weight(&self.params, lat.level()) * gamma_partial_at(lat, n_bound, s)?;
        Ok(acc)
    }

    /// Partial sum `sum_{n <= N} a_n n^{-s}` accumulated term by term.
    pub fn partial_sum(&self, n_bound: u64, s: Complex64) -> Complex64 {
        let mut acc = Complex64::zero();
        for t in self.terms().take_while(|t| t.n <= n_bound) {
            acc += t.value() * n_pow_neg_s(t.n, s);
        }
        acc
    }

    /// Accumulates `a_n n^{-s}` in ascending `n`, recording a checkpoint every
    /// `checkpoint_every` nonzero terms and at every level boundary.
    pub fn partial_sum_trace(&self, s: Complex64, checkpoint_every: usize) -> PartialSumTrace {
        let every = checkpoint_every.max(1);
        let mut acc = Complex64::zero();
        let mut checkpoints = Vec::new();
        let mut count = 0usize;
        for (li, lat) in self.lattices.iter().enumerate() {
            let coeff = self.betas[li] * level_weight(&self.params, lat.level());
            let phases = lattice_phases(lat);
            let last = lat.len() - 1;
            for (pos, (&n, g)) in lat.ns().iter().zip(&phases).enumerate() {
                acc += coeff * g * n_pow_neg_s(n, s);
                count += 1;
                if count.is_multiple_of(every) || pos == last {
                    checkpoints.push(TracePoint {
                        n,
                        re: acc.re,
                        im: acc.im,
                        abs: acc.norm(),
                        level: lat.level(),
                    });
                }
            }
        }
        PartialSumTrace {
            s,
            checkpoints,
            level_boundaries: self.level_boundaries(),
        }
    }
}

/// One row of a trace: `A_N(s)` at `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    #[serde(rename = "N")]
    pub n: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub level: u32,
}

impl TracePoint {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialSumTrace {
    pub s: Complex64,
    pub checkpoints: Vec<TracePoint>,
    pub level_boundaries: Vec<u64>,
}

impl PartialSumTrace {
    /// Checkpoint values at each level boundary, in level order.
    pub fn boundary_values(&self) -> Vec<Complex64> {
        self.level_boundaries
            .iter()
            .filter_map(|&b| self.checkpoints.iter().find(|c| c.n == b).map(TracePoint::value))
            .collect()
    }

    /// Latest checkpoint with `N <= n_bound`.
    pub fn value_at(&self, n_bound: u64) -> Option<Complex64> {
        let k = self.checkpoints.partition_point(|c| c.n <= n_bound);
        k.checked_sub(1).map(|i| self.checkpoints[i].value())
    }

    /// CSV with columns `N,re,im,abs,level`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for c in &self.checkpoints {
            wtr.serialize(c)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv_points<R: Read>(r: R) -> Result<Vec<TracePoint>> {
        let mut rdr = csv::Reader::from_reader(r);
        rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
    }
}
