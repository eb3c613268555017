//! The multilinear form
//!
//! ```text
//! Q(z) = sum_{i_1..i_M} z^(1)_{i_1} ... z^(M)_{i_M} w_{r_2}^{i_1 i_2} ... w_{r_M}^{i_{M-1} i_M}
//! ```
//!
//! with `w_r = exp(2 pi i / r)`. It is the 0th coordinate of the cascade
//! `B^{M+1,M} D^(M) ... B^{2,1} D^(1) u`, where `B^{(r', r)}` is the
//! `r' x r` Walsh matrix `w_{r'}^{ij}` and `D^(j) = diag(z^(j))`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ConstructionParams;

/// `w_r^k = exp(2 pi i (k mod r) / r)`, reducing the exponent in integer
/// arithmetic first.
pub fn root_of_unity(r: usize, k: usize) -> Complex64 {
    Complex64::cis(TAU * ((k % r) as f64) / r as f64)
}

/// Table of `w_r^k` for `k < r`.
pub fn roots_table(r: usize) -> Vec<Complex64> {
    (0..r).map(|k| root_of_unity(r, k)).collect()
}

/// Unit phase `w_{r_2}^{i_1 i_2} ... w_{r_M}^{i_{M-1} i_M}` for block sizes
/// `sizes = (r_1, ..., r_M)`. The exponent is reduced to a single fraction of
/// a turn before one transcendental call.
pub fn unit_phase(sizes: &[usize], idx: &[usize]) -> Complex64 {
    let mut turns = 0.0f64;
    for j in 1..sizes.len() {
        let r = sizes[j];
        let e = ((idx[j - 1] % r) * (idx[j] % r)) % r;
        turns += e as f64 / r as f64;
    }
    Complex64::cis(TAU * turns.fract())
}

/// `Q^L`, described entirely by its block sizes; `r_{M+1} = r_M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalshPolynomial {
    level: u32,
    sizes: Vec<usize>,
}

impl WalshPolynomial {
    pub fn new(params: &ConstructionParams, level: u32) -> Result<Self> {
        Ok(Self {
            level,
            sizes: params.block_sizes(level)?,
        })
    }

    /// Polynomial with explicit nondecreasing block sizes.
    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) || sizes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams(format!(
                "block sizes {sizes:?} must be positive, nondecreasing, at least two"
            )));
        }
        Ok(Self { level: 0, sizes })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `r_{M+1}`, set to its smallest admissible value `r_M`.
    pub fn r_next(&self) -> usize {
        *self.sizes.last().expect("M >= 2")
    }

    pub fn monomial_count(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn coefficient(&self, idx: &[usize]) -> Result<Complex64> {
        self.check_index(idx)?;
        Ok(unit_phase(&self.sizes, idx))
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: vec![self.m()],
                found: vec![idx.len()],
            });
        }
        for (block, (&index, &size)) in idx.iter().zip(&self.sizes).enumerate() {
            if index >= size {
                return Err(Error::IndexOutOfRange { block, index, size });
            }
        }
        Ok(())
    }

    pub fn check_point(&self, z: &TorusPoint) -> Result<()> {
        let found: Vec<usize> = z.blocks.iter().map(Vec::len).collect();
        if found != self.sizes {
            return Err(Error::DimensionMismatch {
                expected: self.sizes.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Sum over all monomials in lexicographic multi-index order.
    pub fn evaluate_direct(&self, z: &TorusPoint) -> Result<Complex64> {
        self.check_point(z)?;
        let m = self.m();
        let tables: Vec<Vec<Complex64>> = self.sizes.iter().map(|&r| roots_table(r)).collect();
        let mut idx = vec![0usize; m];
        // prefix[j]: product of the first j variables and the phases that
        // connect them
        let mut prefix = vec![Complex64::new(1.0, 0.0); m + 1];
        let refresh = |prefix: &mut [Complex64], idx: &[usize], from: usize| {
            for j in from..m {
                let mut v = prefix[j] * z.blocks[j][idx[j]];
                if j > 0 {
                    let r = self.sizes[j];
                    v *= tables[j][(idx[j - 1] * idx[j]) % r];
                }
                prefix[j + 1] = v;
            }
        };
        refresh(&mut prefix, &idx, 0);
        let mut sum = Complex64::new(0.0, 0.0);
        loop {
            sum += prefix[m];
            let mut j = m;
            loop {
                if j == 0 {
                    return Ok(sum);
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.sizes[j] {
                    break;
                }
                idx[j] = 0;
            }
            refresh(&mut prefix, &idx, j);
        }
    }

    /// Coordinate 0 of the Walsh-matrix cascade applied to `u = (1, ..., 1)`.
    pub fn evaluate_cascade(&self, z: &TorusPoint) -> Result<Complex64> {
        self.check_point(z)?;
        let mut v: Vec<Complex64> = z.blocks[0].clone();
        for j in 1..self.m() {
            let mut w = walsh_apply(self.sizes[j], &v);
            for (wi, zi) in w.iter_mut().zip(&z.blocks[j]) {
                *wi *= zi;
            }
            v = w;
        }
        // row 0 of B^{M+1,M} is all ones
        Ok(v.iter().sum())
    }

    /// Partial derivatives with respect to every variable of block `j`
    /// (0-based). Since `Q` is linear in each block,
    /// `Q(z) = sum_i z^(j)_i g_i` with `g` the returned vector.
    pub fn block_gradient(&self, z: &TorusPoint, j: usize) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        let m = self.m();
        // forward: vector entering D^(j)
        let mut fwd = vec![Complex64::new(1.0, 0.0); self.sizes[0]];
        for q in 1..=j {
            let prod: Vec<Complex64> = fwd.iter().zip(&z.blocks[q - 1]).map(|(a, b)| a * b).collect();
            fwd = walsh_apply(self.sizes[q], &prod);
        }
        // backward: row functional acting on the output of D^(j)
        let mut bwd = vec![Complex64::new(1.0, 0.0); self.sizes[m - 1]];
        for q in (j + 1..m).rev() {
            let prod: Vec<Complex64> = bwd.iter().zip(&z.blocks[q]).map(|(a, b)| a * b).collect();
            bwd = walsh_apply_transpose(self.sizes[q], self.sizes[q - 1], &prod);
        }
        Ok(fwd.iter().zip(&bwd).map(|(a, b)| a * b).collect())
    }

    /// `||Q||_W = r_1 ... r_M`; every coefficient has modulus one.
    pub fn wiener_norm(&self) -> u64 {
        self.sizes.iter().map(|&r| r as u64).product()
    }

    /// `(r_1 ... r_M r_{M+1})^{1/2}`.
    pub fn sup_norm_upper(&self) -> f64 {
        (self.wiener_norm() as f64 * self.r_next() as f64).sqrt()
    }

    /// `(r_1 ... r_M)^{(M+1)/(2M)}`: the coefficient norm that the
    /// Bohnenblust-Hille inequality bounds by `D_M ||Q||_inf`. The constant
    /// `D_M` is not applied.
    pub fn bh_certificate(&self) -> f64 {
        let m = self.m() as f64;
        (self.wiener_norm() as f64).powf((m + 1.0) / (2.0 * m))
    }
}

/// `B^{(rows, v.len())} v` with entries `w_rows^{ik}`.
pub fn walsh_apply(rows: usize, v: &[Complex64]) -> Vec<Complex64> {
    let table = roots_table(rows);
    (0..rows)
        .map(|i| {
            v.iter()
                .enumerate()
                .map(|(k, &x)| table[(i * k) % rows] * x)
                .sum()
        })
        .collect()
}

/// `B^T v` for the `rows x cols` Walsh matrix (`v.len() == rows`).
pub fn walsh_apply_transpose(rows: usize, cols: usize, v: &[Complex64]) -> Vec<Complex64> {
    let table = roots_table(rows);
    (0..cols)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(i, &x)| table[(i * k) % rows] * x)
                .sum()
        })
        .collect()
}

/// `||B^{(r_2, r_1)} v||^2 / (r_2 ||v||^2)`, which is 1 when `r_1 <= r_2`.
pub fn walsh_norm_identity_check(r1: usize, r2: usize, v: &[Complex64]) -> Result<f64> {
    if r1 == 0 || r1 > r2 {
        return Err(Error::InvalidParams(format!("need 0 < r1 <= r2, got r1 = {r1}, r2 = {r2}")));
    }
    if v.len() != r1 {
        return Err(Error::LengthMismatch {
            left: v.len(),
            right: r1,
        });
    }
    let vn: f64 = v.iter().map(Complex64::norm_sqr).sum();
    if vn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let bv: f64 = walsh_apply(r2, v).iter().map(Complex64::norm_sqr).sum();
    Ok(bv / (r2 as f64 * vn))
}

/// One complex vector per block; the `j`-th has length `r_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub blocks: Vec<Vec<Complex64>>,
}

impl TorusPoint {
    pub fn constant(sizes: &[usize], value: Complex64) -> Self {
        Self {
            blocks: sizes.iter().map(|&r| vec![value; r]).collect(),
        }
    }

    pub fn ones(sizes: &[usize]) -> Self {
        Self::constant(sizes, Complex64::new(1.0, 0.0))
    }

    /// Uniform random point on the torus.
    pub fn random<R: rand::Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        Self {
            blocks: sizes
                .iter()
                .map(|&r| (0..r).map(|_| Complex64::cis(TAU * rng.gen::<f64>())).collect())
                .collect(),
        }
    }

    /// Random point of the closed polydisc.
    pub fn random_in_disc<R: rand::Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        Self {
            blocks: sizes
                .iter()
                .map(|&r| {
                    (0..r)
                        .map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>()))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.blocks.iter().flatten()
    }

    /// Largest `| |z| - 1 |` over all entries.
    pub fn max_modulus_defect(&self) -> f64 {
        self.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Copy with block 0 multiplied by `tau`.
    pub fn rotate_first_block(&self, tau: Complex64) -> Self {
        let mut out = self.clone();
        for z in &mut out.blocks[0] {
            *z *= tau;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coefficients() {
        let q = WalshPolynomial::from_sizes(vec![2, 2]).unwrap();
        assert!((q.coefficient(&[1, 1]).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        for i in 0..2 {
            assert!((q.coefficient(&[0, i]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        }
        let q3 = WalshPolynomial::from_sizes(vec![4, 4, 4]).unwrap();
        assert!((q3.coefficient(&[1, 1, 1]).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(q.coefficient(&[2, 0]), Err(Error::IndexOutOfRange { .. })));
        assert!(q.coefficient(&[0]).is_err());
    }

    #[test]
    fn unit_phase_is_exact_for_large_exponents() {
        // exponents far beyond r reduce to the same phase
        let a = unit_phase(&[1 << 20, 1 << 20], &[(1 << 20) - 1, (1 << 20) - 1]);
        let b = root_of_unity(1 << 20, 1);
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn small_hand_sums() {
        let q = WalshPolynomial::from_sizes(vec![2, 2]).unwrap();
        let ones = TorusPoint::ones(&[2, 2]);
        assert!((q.evaluate_direct(&ones).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
        assert!((q.evaluate_cascade(&ones).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
        let zeros = TorusPoint::constant(&[2, 2], c(0.0, 0.0));
        assert_eq!(q.evaluate_direct(&zeros).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn sixteen_term_sum_against_loop_oracle() {
        let q = WalshPolynomial::from_sizes(vec![4, 4]).unwrap();
        let mut oracle = c(0.0, 0.0);
        for i1 in 0..4 {
            for i2 in 0..4 {
                oracle += Complex64::cis(TAU * (i1 * i2) as f64 / 4.0);
            }
        }
        assert!((oracle - c(4.0, 0.0)).norm() < 1e-12);
        let got = q.evaluate_direct(&TorusPoint::ones(&[4, 4])).unwrap();
        assert!((got - oracle).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let q = WalshPolynomial::from_sizes(vec![2, 4]).unwrap();
        let z = TorusPoint::ones(&[2, 2]);
        assert!(matches!(q.evaluate_direct(&z), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(q.evaluate_cascade(&z), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn gradient_reconstructs_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = WalshPolynomial::from_sizes(vec![2, 4, 8]).unwrap();
        let z = TorusPoint::random(q.sizes(), &mut rng);
        let v = q.evaluate_direct(&z).unwrap();
        for j in 0..3 {
            let g = q.block_gradient(&z, j).unwrap();
            let s: Complex64 = g.iter().zip(&z.blocks[j]).map(|(a, b)| a * b).sum();
            assert!((s - v).norm() < 1e-10 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn norms() {
        let p = ConstructionParams::flat(2, 3).unwrap();
        let q = WalshPolynomial::new(&p, 3).unwrap();
        assert_eq!(q.wiener_norm(), 64);
        assert!((q.sup_norm_upper() - 22.627416997969522).abs() < 1e-12);
        assert!((q.bh_certificate() - 22.627416997969522).abs() < 1e-12);
        let q1 = WalshPolynomial::new(&p, 1).unwrap();
        assert_eq!(q1.wiener_norm(), 4);
        assert!((q1.sup_norm_upper() - 8f64.sqrt()).abs() < 1e-12);
        assert!((q1.bh_certificate() - 8f64.sqrt()).abs() < 1e-12);
        let q3 = WalshPolynomial::from_sizes(vec![4, 4, 4]).unwrap();
        assert!((q3.sup_norm_upper() - 16.0).abs() < 1e-12);
        assert!((q3.bh_certificate() - 16.0).abs() < 1e-12);
        let p3 = ConstructionParams::new(3, crate::params::parse_profile("1/2,1,1").unwrap(), 4).unwrap();
        assert_eq!(WalshPolynomial::new(&p3, 4).unwrap().wiener_norm(), 1024);
    }

    #[test]
    fn walsh_identity_examples() {
        assert!((walsh_norm_identity_check(1, 1, &[c(1.0, 0.0)]).unwrap() - 1.0).abs() < 1e-15);
        // B^{(4,2)} (1, i) = (1 + i, 1 + i*i, 1 + i*(-1), 1 + i*(-i)) = (1+i, 0, 1-i, 2)
        let v = [c(1.0, 0.0), c(0.0, 1.0)];
        let bv = walsh_apply(4, &v);
        let expect = [c(1.0, 1.0), c(0.0, 0.0), c(1.0, -1.0), c(2.0, 0.0)];
        for (a, b) in bv.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!((walsh_norm_identity_check(2, 4, &v).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(walsh_norm_identity_check(2, 2, &[c(0.0, 0.0); 2]), Err(Error::ZeroVector)));
        assert!(walsh_norm_identity_check(4, 2, &[c(1.0, 0.0); 4]).is_err());
        assert!(walsh_norm_identity_check(2, 4, &[c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn multilinearity_in_first_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = WalshPolynomial::from_sizes(vec![4, 8, 8]).unwrap();
        for _ in 0..20 {
            let z = TorusPoint::random(q.sizes(), &mut rng);
            let tau = Complex64::cis(TAU * rand::Rng::gen::<f64>(&mut rng));
            let lhs = q.evaluate_direct(&z.rotate_first_block(tau)).unwrap();
            let rhs = tau * q.evaluate_direct(&z).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn torus_point_json_is_pairs() {
        let z = TorusPoint::constant(&[1, 2], c(0.5, -0.25));
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, r#"{"blocks":[[[0.5,-0.25]],[[0.5,-0.25],[0.5,-0.25]]]}"#);
        let back: TorusPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
    }
}
