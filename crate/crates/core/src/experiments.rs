//! Experiment pipelines and the report formats they emit.
//!
//! Every report serializes to JSON and to CSV. The CSV form starts with a
//! `# ` line holding the report's scalar fields as JSON, followed by a
//! header row and one row per level (or per check).

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ascent::sup_norm_lower_search;
use crate::bounds::abscissa_bounds;
use crate::error::{Error, Result};
use crate::kronecker::{KroneckerReport, LevelReport};
use crate::lattice::{
    build_levels, check_bijection, check_disjointness, check_interval_property, check_ordering, structural_checks,
    CheckOutcome, LevelLattice,
};
use crate::params::ConstructionParams;
use crate::series::{
    choose_signs, epsilon_for_convergence, key_estimate_ratio, key_estimate_scan, level_sum, level_sum_via_polynomial,
    level_weight, omega_l, omega_via_summation_by_parts, summation_by_parts_check, DirichletSeries,
};
use crate::walsh::{walsh_norm_identity_check, TorusPoint, WalshPolynomial};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// A report with scalar fields plus a table of rows.
pub trait TabularReport: Serialize + DeserializeOwned + Clone {
    type Row: Serialize + DeserializeOwned;

    fn take_rows(&mut self) -> Vec<Self::Row>;
    fn set_rows(&mut self, rows: Vec<Self::Row>);
    /// Whether every assertion the pipeline makes held.
    fn passed(&self) -> bool;

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut head = self.clone();
        let rows = head.take_rows();
        writeln!(w, "# {}", serde_json::to_string(&head)?)?;
        let mut wtr = csv::Writer::from_writer(w);
        for r in &rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let json = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::InvalidParams("CSV report must start with a '# ' metadata line".into()))?;
        let mut report: Self = serde_json::from_str(json.trim_end())?;
        let rows = csv::Reader::from_reader(reader)
            .deserialize()
            .collect::<std::result::Result<Vec<Self::Row>, _>>()?;
        report.set_rows(rows);
        Ok(report)
    }

    fn write_format<W: Write>(&self, format: Format, mut w: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => {
                w.write_all(self.to_json()?.as_bytes())?;
                w.write_all(b"\n")?;
                Ok(())
            }
        }
    }
}

macro_rules! tabular {
    ($ty:ty, $row:ty, $field:ident, |$s:ident| $passed:expr) => {
        impl TabularReport for $ty {
            type Row = $row;

            fn take_rows(&mut self) -> Vec<$row> {
                std::mem::take(&mut self.$field)
            }

            fn set_rows(&mut self, rows: Vec<$row>) {
                self.$field = rows;
            }

            fn passed(&self) -> bool {
                let $s = self;
                $passed
            }
        }
    };
}

/// Construction parameters as recorded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigMeta {
    #[serde(rename = "M")]
    pub m: usize,
    pub rho: String,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Lmax")]
    pub lmax: u32,
    pub seed: u64,
}

impl ConfigMeta {
    pub fn new(params: &ConstructionParams, seed: u64) -> Self {
        Self {
            m: params.m(),
            rho: params.rho().iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
            x: params.decay(),
            lmax: params.max_level(),
            seed,
        }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsRow {
    pub quantity: String,
    pub value: f64,
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub schema_version: u32,
    pub config: ConfigMeta,
    pub valid: bool,
    pub rows: Vec<BoundsRow>,
}

tabular!(BoundsReport, BoundsRow, rows, |_r| true);

pub fn run_bounds(params: &ConstructionParams) -> BoundsReport {
    let b = abscissa_bounds(params);
    let e = b.exact;
    let row = |q: &str, v: f64, x: Option<num_rational::Rational64>| BoundsRow {
        quantity: q.into(),
        value: v,
        exact: x.map(|r| r.to_string()),
    };
    BoundsReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigMeta::new(params, 0),
        valid: b.valid,
        rows: vec![
            row("sigmaB_upper", b.sigma_b_upper, e.map(|e| e.sigma_b_upper)),
            row("sigmaB_lower", b.sigma_b_lower, e.map(|_| 0.into())),
            row("sigmaA_lower", b.sigma_a_lower, e.map(|e| e.sigma_a_lower)),
            row("sigmaC_upper", b.sigma_c_upper, e.map(|e| e.sigma_c_upper)),
            row("sigmaA_minus_sigmaB", b.strip_gap(), b.exact_strip_gap()),
            row("sigmaB_minus_sigmaC", b.convergence_gap(), b.exact_convergence_gap()),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundednessRow {
    #[serde(rename = "L")]
    pub level: u32,
    /// Largest sampled `|P_L(sigma + it)|`.
    pub max_abs: f64,
    /// `2^{-XL}` times `max_abs`.
    pub weighted_max: f64,
    /// `(min n)^{-sigma}` times the sup-norm upper bound.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundednessReport {
    pub schema_version: u32,
    pub config: ConfigMeta,
    pub sigma: f64,
    pub t_samples: usize,
    pub t_range: f64,
    /// Slope of `log2(weighted_max)` in `L`.
    pub fitted_rate: f64,
    /// `(rho_1 + ... + rho_M + 1)/2 - sigma M - X`.
    pub predicted_rate: f64,
    pub bounds_hold: bool,
    pub rate_ok: bool,
    pub rows: Vec<BoundednessRow>,
}

tabular!(BoundednessReport, BoundednessRow, rows, |r| r.bounds_hold && r.rate_ok);

/// Samples `|P_L(sigma + it)|` at `t_samples` uniform `t in [0, t_range)`
/// per level and compares against the multilinear bound.
pub fn run_boundedness_experiment(
    params: &ConstructionParams,
    sigma: f64,
    t_samples: usize,
    seed: u64,
) -> Result<BoundednessReport> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
    }
    const T_RANGE: f64 = 1e6;
    let lattices = build_levels(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts: Vec<f64> = (0..t_samples.max(1)).map(|_| rng.gen::<f64>() * T_RANGE).collect();
    let mut rows = Vec::new();
    for lat in &lattices {
        let poly = WalshPolynomial::new(params, lat.level())?;
        let mut max_abs = 0.0f64;
        for &t in &ts {
            max_abs = max_abs.max(level_sum_via_polynomial(lat, Complex64::new(sigma, t))?.norm());
        }
        let bound = (lat.min_n() as f64).powf(-sigma) * poly.sup_norm_upper();
        rows.push(BoundednessRow {
            level: lat.level(),
            max_abs,
            weighted_max: level_weight(params, lat.level()) * max_abs,
            bound,
            holds: max_abs <= bound * (1.0 + 1e-12),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.level as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.weighted_max.log2()).collect();
    let fitted_rate = fit_slope(&xs, &ys);
    let predicted_rate = 0.5 * (params.rho_sum() + 1.0) - sigma * params.m() as f64 - params.decay();
    Ok(BoundednessReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigMeta::new(params, seed),
        sigma,
        t_samples: ts.len(),
        t_range: T_RANGE,
        fitted_rate,
        predicted_rate,
        bounds_hold: rows.iter().all(|r| r.holds),
        rate_ok: rows.len() < 2 || fitted_rate <= predicted_rate + 0.25,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DivergenceRow {
    #[serde(rename = "L")]
    pub level: u32,
    /// `sum_{n in level} 2^{-XL} n^{-sigma}`.
    pub level_sum: f64,
    pub cumulative: f64,
    /// `2^{(rho_1 + ... + rho_M - sigma M - X) L} L^{-sigma M}`.
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DivergenceReport {
    pub schema_version: u32,
    pub config: ConfigMeta,
    pub sigma: f64,
    #[serde(rename = "sigmaA_lower")]
    pub sigma_a_lower: f64,
    /// `sigma < sigmaA_lower`.
    pub precondition: bool,
    /// `rho_1 + ... + rho_M - sigma M - X`.
    pub exponent: f64,
    /// Smallest `levelSum / reference` over the levels.
    pub calibrated_constant: f64,
    /// The last level sum is at least half the largest one.
    pub no_saturation: bool,
    pub rows: Vec<DivergenceRow>,
}

tabular!(DivergenceReport, DivergenceRow, rows, |r| r.precondition
    && r.calibrated_constant > 0.0
    && r.no_saturation);

/// Exact per-level sums of `|a_n| n^{-sigma}`.
pub fn run_divergence_experiment(params: &ConstructionParams, sigma: f64) -> Result<DivergenceReport> {
    let lattices = build_levels(params)?;
    let m = params.m() as f64;
    let exponent = params.rho_sum() - sigma * m - params.decay();
    let mut cumulative = 0.0;
    let rows: Vec<DivergenceRow> = lattices
        .iter()
        .map(|lat| {
            let l = lat.level() as f64;
            let level_sum = level_weight(params, lat.level()) * lat.ns().iter().map(|&n| (n as f64).powf(-sigma)).sum::<f64>();
            cumulative += level_sum;
            let reference = (exponent * l).exp2() * l.powf(-sigma * m);
            DivergenceRow {
                level: lat.level(),
                level_sum,
                cumulative,
                reference,
                ratio: level_sum / reference,
            }
        })
        .collect();
    let calibrated_constant = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let largest = rows.iter().map(|r| r.level_sum).fold(0.0, f64::max);
    let sigma_a_lower = abscissa_bounds(params).sigma_a_lower;
    Ok(DivergenceReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigMeta::new(params, 0),
        sigma,
        sigma_a_lower,
        precondition: sigma < sigma_a_lower,
        exponent,
        calibrated_constant,
        no_saturation: rows.last().is_some_and(|r| r.level_sum >= 0.5 * largest),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceRow {
    #[serde(rename = "L")]
    pub level: u32,
    #[serde(rename = "d_L")]
    pub d: u8,
    pub re_beta: f64,
    pub im_beta: f64,
    pub abs_omega: f64,
    /// `2^{-XL} |Omega_L(eps)|`.
    pub term: f64,
    /// Greedy running sum.
    pub running: f64,
    /// `A_N(-eps)` at the level's largest `n`.
    pub boundary_re: f64,
    pub boundary_im: f64,
    pub boundary_abs: f64,
    /// `|boundary - running|`.
    pub mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub config: ConfigMeta,
    pub epsilon: f64,
    /// Smallest `L0` with the terms strictly decreasing on `L0..=Lmax`
    /// (at least three levels).
    pub decreasing_from: Option<u32>,
    /// Slope of `log2(term)` over the second half of the levels.
    pub decay_exponent: f64,
    /// Largest distance between boundary sums of the last three levels.
    pub oscillation_last3: f64,
    pub last_term: f64,
    /// `max |A_N - A_{N_0}|` over the last level, `N_0` the previous boundary.
    pub cauchy_tail: f64,
    pub decomposition_ok: bool,
    pub terms_decay: bool,
    pub oscillation_ok: bool,
    pub rows: Vec<ConvergenceRow>,
}

tabular!(ConvergenceReport, ConvergenceRow, rows, |r| r.terms_decay
    && r.oscillation_ok
    && r.decomposition_ok);

/// Smallest `L0` such that `terms[L0-1..]` is strictly decreasing and has at
/// least `min_len` entries.
pub fn decreasing_from(terms: &[f64], min_len: usize) -> Option<u32> {
    let mut start = terms.len();
    while start > 0 && (start == terms.len() || terms[start - 1] > terms[start]) {
        start -= 1;
    }
    (terms.len() - start >= min_len.max(1)).then_some(start as u32 + 1)
}

/// Largest pairwise distance among the last `k` values.
pub fn oscillation(values: &[Complex64], k: usize) -> f64 {
    let tail = &values[values.len().saturating_sub(k)..];
    let mut out = 0.0f64;
    for a in tail {
        for b in tail {
            out = out.max((a - b).norm());
        }
    }
    out
}

pub fn run_convergence_experiment(params: &ConstructionParams, seed: u64) -> Result<ConvergenceReport> {
    let eps = epsilon_for_convergence(params)?;
    let lattices = build_levels(params)?;
    let signs = choose_signs(params, &lattices, eps);
    let series = DirichletSeries::new(params.clone(), lattices, signs.betas())?;
    let s = Complex64::new(-eps, 0.0);
    let trace = series.partial_sum_trace(s, 1);
    let boundaries = trace.boundary_values();
    let decomposed = series.boundary_decomposition(s)?;

    let rows: Vec<ConvergenceRow> = signs
        .levels
        .iter()
        .zip(&boundaries)
        .map(|(e, b)| ConvergenceRow {
            level: e.level,
            d: e.d,
            re_beta: e.re_beta,
            im_beta: e.im_beta,
            abs_omega: e.abs_omega,
            term: e.term,
            running: e.running,
            boundary_re: b.re,
            boundary_im: b.im,
            boundary_abs: b.norm(),
            mismatch: (b - Complex64::new(e.running, 0.0)).norm(),
        })
        .collect();
    let decomposition_ok = rows.len() == decomposed.len()
        && rows.iter().zip(&decomposed).all(|(r, d)| {
            let b = Complex64::new(r.boundary_re, r.boundary_im);
            let scale = d.norm().max(1.0);
            (b - d).norm() <= 1e-9 * scale && r.mismatch <= 1e-9 * scale
        });

    let terms = signs.terms();
    let from = decreasing_from(&terms, 3);
    let half = terms.len() / 2;
    let xs: Vec<f64> = (half..terms.len()).map(|i| (i + 1) as f64).collect();
    let ys: Vec<f64> = terms[half..].iter().map(|t| t.log2()).collect();
    let last_term = terms.last().copied().unwrap_or(0.0);
    let oscillation_last3 = oscillation(&boundaries, 3);

    let cauchy_tail = match (trace.level_boundaries.len(), boundaries.len()) {
        (nb, nv) if nb >= 2 && nv >= 2 => {
            let prev_n = trace.level_boundaries[nb - 2];
            let base = boundaries[nv - 2];
            trace
                .checkpoints
                .iter()
                .filter(|c| c.n > prev_n)
                .map(|c| (c.value() - base).norm())
                .fold(0.0, f64::max)
        }
        _ => 0.0,
    };

    Ok(ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigMeta::new(params, seed),
        epsilon: eps,
        decreasing_from: from,
        decay_exponent: fit_slope(&xs, &ys),
        oscillation_last3,
        last_term,
        cauchy_tail,
        decomposition_ok,
        terms_decay: from.is_some(),
        oscillation_ok: oscillation_last3 <= 2.0 * last_term,
        rows,
    })
}

impl TabularReport for KroneckerReport {
    type Row = LevelReport;

    fn take_rows(&mut self) -> Vec<LevelReport> {
        std::mem::take(&mut self.per_level)
    }

    fn set_rows(&mut self, rows: Vec<LevelReport>) {
        self.per_level = rows;
    }

    fn passed(&self) -> bool {
        self.achieved && self.budget_holds && self.trace_mismatch <= 1e-9 && self.exceeds_bound()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub schema_version: u32,
    pub config: ConfigMeta,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

tabular!(VerificationReport, CheckOutcome, checks, |r| r.checks.iter().all(|c| c.passed));

/// Builds levels `1..=lmax` and runs every invariant suite on them.
pub fn run_full_verification(params: &ConstructionParams, lmax: u32, seed: u64) -> Result<VerificationReport> {
    let params = params.clone().with_max_level(lmax);
    let lattices = build_levels(&params)?;
    let checks = verify_lattices(&params, &lattices, seed)?;
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigMeta::new(&params, seed),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Every invariant suite over already built levels `1..=K`.
pub fn verify_lattices(params: &ConstructionParams, lattices: &[LevelLattice], seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        check_ordering(lattices),
        check_disjointness(&lattices.iter().map(LevelLattice::blocks).collect::<Vec<_>>()),
        check_bijection(lattices),
        check_interval_property(lattices),
    ];

    let polys: Vec<WalshPolynomial> = lattices
        .iter()
        .map(|l| WalshPolynomial::new(params, l.level()))
        .collect::<Result<_>>()?;

    let mut worst = 0.0f64;
    for q in &polys {
        for k in 0..25 {
            let z = if k % 5 == 4 {
                TorusPoint::random_in_disc(q.sizes(), &mut rng)
            } else {
                TorusPoint::random(q.sizes(), &mut rng)
            };
            let (a, b) = (q.evaluate_cascade(&z)?, q.evaluate_direct(&z)?);
            worst = worst.max((a - b).norm() / b.norm().max(1e-300));
        }
    }
    out.push(CheckOutcome::new("cascade_agreement", worst <= 1e-9, format!("max relative gap {worst:.3e}")));

    let wiener_ok = polys
        .iter()
        .all(|q| q.wiener_norm() == q.sizes().iter().map(|&r| r as u64).product::<u64>());
    let mut walsh_gap = 0.0f64;
    for q in &polys {
        for w in q.sizes().windows(2) {
            for _ in 0..5 {
                let v: Vec<Complex64> = (0..w[0])
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                walsh_gap = walsh_gap.max((walsh_norm_identity_check(w[0], w[1], &v)? - 1.0).abs());
            }
        }
    }
    out.push(CheckOutcome::new(
        "norm_identities",
        wiener_ok && walsh_gap <= 1e-10,
        format!("wiener norm exact: {wiener_ok}; walsh identity max gap {walsh_gap:.3e}"),
    ));

    let mut sandwich_ok = true;
    let mut ratios = Vec::new();
    for q in &polys {
        let w = sup_norm_lower_search(q, 4, seed.wrapping_add(q.level() as u64))?;
        sandwich_ok &= w.value <= q.sup_norm_upper() + 1e-9;
        ratios.push(w.value / q.sup_norm_upper());
    }
    out.push(CheckOutcome::new(
        "sup_norm_sandwich",
        sandwich_ok,
        format!("searched / upper per level {ratios:.4?}"),
    ));

    let key: Vec<f64> = lattices
        .iter()
        .map(|l| key_estimate_ratio(params, &key_estimate_scan(l)))
        .collect();
    let tail = &key[key.len().saturating_sub(3)..];
    let trend_ok = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    out.push(CheckOutcome::new(
        "key_estimate",
        trend_ok,
        format!(
            "ratios {key:.4?}; calibrated constant {:.4}",
            key.iter().copied().fold(0.0, f64::max)
        ),
    ));

    let eps = epsilon_for_convergence(params).unwrap_or(0.25);
    let mut sbp_gap = 0.0f64;
    for lat in lattices {
        let direct = omega_l(lat, eps);
        let parts = omega_via_summation_by_parts(lat, eps);
        sbp_gap = sbp_gap.max((direct - parts).norm() / (1.0 + direct.norm()));
    }
    for _ in 0..10 {
        let len = rng.gen_range(1..=200);
        let a: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let lhs: Complex64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        sbp_gap = sbp_gap.max(summation_by_parts_check(&a, &b)? / (1.0 + lhs.norm()));
    }
    out.push(CheckOutcome::new(
        "summation_by_parts",
        sbp_gap <= 1e-10,
        format!("max relative gap {sbp_gap:.3e}"),
    ));

    let series = DirichletSeries::unit_signs(params.clone(), lattices.to_vec())?;
    let mut dec_gap = 0.0f64;
    for _ in 0..3 {
        let s = Complex64::new(rng.gen_range(-eps..2.0), rng.gen_range(-50.0..50.0));
        let trace = series.partial_sum_trace(s, usize::MAX);
        for (a, b) in trace.boundary_values().iter().zip(series.boundary_decomposition(s)?) {
            dec_gap = dec_gap.max((a - b).norm() / b.norm().max(1.0));
        }
        // and each complete level against its direct sum
        for lat in lattices {
            let (a, b) = (level_sum(lat, s), level_sum_via_polynomial(lat, s)?);
            dec_gap = dec_gap.max((a - b).norm() / b.norm().max(1.0));
        }
    }
    out.push(CheckOutcome::new(
        "decomposition_identity",
        dec_gap <= 1e-9,
        format!("max relative gap {dec_gap:.3e}"),
    ));
    Ok(out)
}

/// Structural checks alone, streaming levels too large to hold in memory.
pub fn run_structural_verification(
    params: &ConstructionParams,
    lmax: u32,
    materialize_limit: usize,
) -> Result<VerificationReport> {
    let checks = structural_checks(params, lmax, materialize_limit)?;
    let params = params.clone().with_max_level(lmax);
    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        config: ConfigMeta::new(&params, 0),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
