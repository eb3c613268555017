//! The k-th prime, 1-indexed (`p_1 = 2`), from a memoized sieve that grows on
//! demand.

use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

/// Largest supported prime index.
pub const MAX_PRIME_INDEX: usize = 5_000_000;

fn table() -> &'static RwLock<Vec<u64>> {
    static TABLE: OnceLock<RwLock<Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Vec::new()))
}

/// Returns the `k`-th prime with `p_1 = 2`.
pub fn prime_at(k: usize) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParams("prime index is 1-based".into()));
    }
    ensure_count(k)?;
    let t = table().read().expect("prime table poisoned");
    Ok(t[k - 1])
}

/// Returns `p_k` for each index in `ks`, holding the read lock once.
pub fn primes_at(ks: &[usize]) -> Result<Vec<u64>> {
    let Some(&max) = ks.iter().max() else {
        return Ok(Vec::new());
    };
    if ks.contains(&0) {
        return Err(Error::InvalidParams("prime index is 1-based".into()));
    }
    ensure_count(max)?;
    let t = table().read().expect("prime table poisoned");
    Ok(ks.iter().map(|&k| t[k - 1]).collect())
}

fn ensure_count(k: usize) -> Result<()> {
    if k > MAX_PRIME_INDEX {
        return Err(Error::Capacity(format!(
            "prime index {k} exceeds the table ceiling {MAX_PRIME_INDEX}"
        )));
    }
    if table().read().expect("prime table poisoned").len() >= k {
        return Ok(());
    }
    let mut t = table().write().expect("prime table poisoned");
    if t.len() >= k {
        return Ok(());
    }
    // grow geometrically so repeated small requests stay cheap
    let want = k.max(t.len() * 2).clamp(64, MAX_PRIME_INDEX);
    let mut limit = nth_prime_upper_bound(want);
    loop {
        let primes = primes_up_to(limit);
        if primes.len() >= want {
            *t = primes;
            return Ok(());
        }
        limit *= 2;
    }
}

/// Rosser-type upper bound `k (ln k + ln ln k)` for `k >= 6`.
fn nth_prime_upper_bound(k: usize) -> u64 {
    if k < 6 {
        return 15;
    }
    let kf = k as f64;
    (kf * (kf.ln() + kf.ln().ln())).ceil() as u64 + 1
}

/// All primes `<= limit`, odd-only sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    // slot i represents 2i + 1
    let slots = (limit as usize - 1) / 2 + 1;
    let mut composite = vec![false; slots];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < slots {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(slots / 8 + 1);
    out.push(2);
    out.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 1),
    );
    out
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}
