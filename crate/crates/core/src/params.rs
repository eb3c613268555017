//! Construction parameters: homogeneity, exponent profile, decay exponent.

use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest block size the library will materialize.
pub const MAX_BLOCK_SIZE: usize = 1 << 40;

/// One entry of the exponent profile: a float, plus its exact rational value
/// when it was given as a fraction or a terminating decimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub value: f64,
    pub exact: Option<Rational64>,
}

impl Exponent {
    pub fn ratio(numer: i64, denom: i64) -> Self {
        let r = Rational64::new(numer, denom);
        Self {
            value: ratio_to_f64(r),
            exact: Some(r),
        }
    }

    pub fn float(value: f64) -> Self {
        Self { value, exact: None }
    }
}

impl From<Rational64> for Exponent {
    fn from(r: Rational64) -> Self {
        Self {
            value: ratio_to_f64(r),
            exact: Some(r),
        }
    }
}

impl From<f64> for Exponent {
    fn from(value: f64) -> Self {
        Self::float(value)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `p/q`, integers and terminating decimals exactly; anything else
    /// that parses as `f64` becomes an inexact entry.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParams(format!("cannot parse exponent {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Self::ratio(n, d));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(r.into());
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(Self::float(v))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    if frac_part.len() > 15 {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10i64.checked_pow(frac_part.len() as u32)?;
    let r = Rational64::new(numer, denom);
    Some(if neg { -r } else { r })
}

pub(crate) fn ratio_to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a comma-separated exponent profile such as `3/4,1,1`.
pub fn parse_profile(s: &str) -> Result<Vec<Exponent>> {
    s.split(',').map(str::parse).collect()
}

/// Homogeneity `M`, exponent profile `rho`, decay exponent `X` and the largest
/// level to materialize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    m: usize,
    rho: Vec<Exponent>,
    decay: Exponent,
    max_level: u32,
}

impl ConstructionParams {
    /// Builds parameters with the default decay exponent
    /// `X = (rho_1 + ... + rho_M)(M + 1) / (2M)`.
    pub fn new(m: usize, rho: Vec<Exponent>, max_level: u32) -> Result<Self> {
        Self::validate_profile(m, &rho)?;
        let decay = default_decay(m, &rho);
        let p = Self {
            m,
            rho,
            decay,
            max_level,
        };
        p.validate_decay()?;
        Ok(p)
    }

    pub fn from_floats(m: usize, rho: &[f64], max_level: u32) -> Result<Self> {
        Self::new(m, rho.iter().map(|&v| Exponent::float(v)).collect(), max_level)
    }

    /// All-ones profile, the case where the certificate and upper bound share
    /// their growth exponent.
    pub fn flat(m: usize, max_level: u32) -> Result<Self> {
        Self::new(m, vec![Exponent::ratio(1, 1); m], max_level)
    }

    pub fn with_decay(mut self, decay: Exponent) -> Result<Self> {
        self.decay = decay;
        self.validate_decay()?;
        Ok(self)
    }

    pub fn with_max_level(mut self, max_level: u32) -> Self {
        self.max_level = max_level;
        self
    }

    fn validate_profile(m: usize, rho: &[Exponent]) -> Result<()> {
        if m < 2 {
            return Err(Error::InvalidParams(format!("homogeneity M = {m} must be at least 2")));
        }
        if rho.len() != m {
            return Err(Error::InvalidParams(format!(
                "exponent profile has {} entries, expected M = {m}",
                rho.len()
            )));
        }
        for (j, e) in rho.iter().enumerate() {
            if !(0.0..=1.0).contains(&e.value) {
                return Err(Error::InvalidParams(format!("rho_{} = {} is outside [0, 1]", j + 1, e)));
            }
        }
        for w in rho.windows(2) {
            let ordered = match (w[0].exact, w[1].exact) {
                (Some(a), Some(b)) => a <= b,
                _ => w[0].value <= w[1].value,
            };
            if !ordered {
                return Err(Error::InvalidParams(format!(
                    "exponent profile must be nondecreasing ({} > {})",
                    w[0], w[1]
                )));
            }
        }
        let last = rho[m - 1];
        let last_is_one = match last.exact {
            Some(r) => r == Rational64::from_integer(1),
            None => last.value == 1.0,
        };
        if !last_is_one {
            return Err(Error::InvalidParams(format!("rho_M must be exactly 1, got {last}")));
        }
        Ok(())
    }

    fn validate_decay(&self) -> Result<()> {
        if !self.decay.value.is_finite() || self.decay.value < 0.0 {
            return Err(Error::InvalidParams(format!("decay exponent X = {} must be >= 0", self.decay)));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rho(&self) -> &[Exponent] {
        &self.rho
    }

    pub fn rho_values(&self) -> Vec<f64> {
        self.rho.iter().map(|e| e.value).collect()
    }

    /// Exact profile, if every entry is rational.
    pub fn rho_exact(&self) -> Option<Vec<Rational64>> {
        self.rho.iter().map(|e| e.exact).collect()
    }

    pub fn decay(&self) -> f64 {
        self.decay.value
    }

    pub fn decay_exponent(&self) -> Exponent {
        self.decay
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// `rho_1 + ... + rho_M`.
    pub fn rho_sum(&self) -> f64 {
        self.rho.iter().map(|e| e.value).sum()
    }

    /// `rho_1 + ... + rho_{M-2} + rho_M`: the profile sum with `rho_{M-1}`
    /// left out, which governs the cancellation in prefix phase sums.
    pub fn rho_sum_skip_penultimate(&self) -> f64 {
        self.rho_sum() - self.rho[self.m - 2].value
    }

    /// Default decay `X = (rho_1 + ... + rho_M)(M + 1) / (2M)`.
    pub fn default_decay(&self) -> Exponent {
        default_decay(self.m, &self.rho)
    }

    /// `r_j = floor(2^{rho_j L})` for `j` in `1..=M`.
    pub fn block_size(&self, j: usize, level: u32) -> Result<usize> {
        if j == 0 || j > self.m {
            return Err(Error::InvalidParams(format!("block number {j} outside 1..={}", self.m)));
        }
        block_size(self.rho[j - 1], level)
    }

    pub fn block_sizes(&self, level: u32) -> Result<Vec<usize>> {
        (1..=self.m).map(|j| self.block_size(j, level)).collect()
    }
}

fn default_decay(m: usize, rho: &[Exponent]) -> Exponent {
    let exact: Option<Rational64> = rho
        .iter()
        .map(|e| e.exact)
        .try_fold(Rational64::zero(), |acc, e| e.map(|e| acc + e))
        .map(|sum| sum * Rational64::new(m as i64 + 1, 2 * m as i64));
    match exact {
        Some(r) => r.into(),
        None => {
            let sum: f64 = rho.iter().map(|e| e.value).sum();
            Exponent::float(sum * (m as f64 + 1.0) / (2.0 * m as f64))
        }
    }
}

/// `floor(2^{rho L})`, computed with an integer root when `rho` is rational.
pub fn block_size(rho: Exponent, level: u32) -> Result<usize> {
    let approx = (rho.value * level as f64).exp2();
    if !approx.is_finite() || approx > MAX_BLOCK_SIZE as f64 {
        return Err(Error::Capacity(format!(
            "block size 2^({} * {level}) exceeds {MAX_BLOCK_SIZE}",
            rho
        )));
    }
    if let Some(r) = rho.exact {
        let (p, q) = (*r.numer(), *r.denom());
        if p >= 0 && q > 0 {
            let bits = p.checked_mul(level as i64).filter(|&b| b < 127);
            if let (Some(bits), Ok(q)) = (bits, u32::try_from(q)) {
                let root = (1u128 << bits).nth_root(q);
                return Ok(root as usize);
            }
        }
    }
    Ok(approx.floor() as usize)
}
