//! Level-indexed prime blocks and the ordered product sets they generate.
//!
//! At level `L` block `j` (1-based) uses the prime indices
//! `K_L^(j) = { (M + j - 1) 2^L + x : 0 <= x < r_j }`. The product set pairs
//! every multi-index `(i_1, ..., i_M)` with `n = p_{k_{i_1}} ... p_{k_{i_M}}`,
//! stored sorted by `n`. Because indices grow with both `j` and `L`, every
//! product of level `L` is smaller than every product of level `L + 1`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ConstructionParams;
use crate::primes;

/// Ceiling on materialized product-set size.
pub const MAX_LATTICE_ENTRIES: usize = 1 << 24;

/// Multi-index `(i_1, ..., i_M)` addressing one monomial and one integer `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// `K_L^(j)` as an ascending list of 1-based prime indices.
pub fn block_index_set(params: &ConstructionParams, j: usize, level: u32) -> Result<Vec<usize>> {
    if level == 0 {
        return Err(Error::InvalidParams("levels start at 1".into()));
    }
    let r = params.block_size(j, level)?;
    let base = level_base(params.m(), j, level)?;
    Ok((0..r).map(|x| base + x).collect())
}

fn level_base(m: usize, j: usize, level: u32) -> Result<usize> {
    1usize
        .checked_shl(level)
        .filter(|_| level < usize::BITS - 4)
        .and_then(|two_l| (m + j - 1).checked_mul(two_l))
        .ok_or_else(|| Error::Capacity(format!("level {level} index base overflows")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelLattice {
    level: u32,
    sizes: Vec<usize>,
    index_sets: Vec<Vec<usize>>,
    prime_blocks: Vec<Vec<u64>>,
    /// Products in ascending order.
    ns: Vec<u64>,
    /// Lexicographic rank of the multi-index of each product (last index
    /// fastest), parallel to `ns`.
    ranks: Vec<u32>,
}

/// Blocks of one level without the product set.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelBlocks {
    pub level: u32,
    pub sizes: Vec<usize>,
    pub index_sets: Vec<Vec<usize>>,
    pub prime_blocks: Vec<Vec<u64>>,
}

impl LevelBlocks {
    pub fn new(params: &ConstructionParams, level: u32) -> Result<Self> {
        let mut sizes = Vec::with_capacity(params.m());
        let mut index_sets = Vec::with_capacity(params.m());
        let mut prime_blocks = Vec::with_capacity(params.m());
        for j in 1..=params.m() {
            let ks = block_index_set(params, j, level)?;
            sizes.push(ks.len());
            prime_blocks.push(primes::primes_at(&ks)?);
            index_sets.push(ks);
        }
        Ok(Self {
            level,
            sizes,
            index_sets,
            prime_blocks,
        })
    }

    pub fn product_count(&self) -> Option<usize> {
        self.sizes.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r))
    }

    /// Smallest product `n_* = p_{k_0^(1)} ... p_{k_0^(M)}`.
    pub fn min_product(&self) -> Result<u64> {
        checked_product(self.prime_blocks.iter().map(|b| b[0]))
    }

    pub fn max_product(&self) -> Result<u64> {
        checked_product(self.prime_blocks.iter().map(|b| *b.last().expect("nonempty block")))
    }

    /// Visits every product in lexicographic multi-index order without
    /// materializing the set. The callback receives `n` and the multi-index.
    pub fn for_each_product<F: FnMut(u64, &[usize])>(&self, mut f: F) -> Result<()> {
        let m = self.sizes.len();
        let mut idx = vec![0usize; m];
        // partial[j] = product of the first j chosen primes
        let mut partial = vec![1u64; m + 1];
        for j in 0..m {
            partial[j + 1] = mul_checked(partial[j], self.prime_blocks[j][0])?;
        }
        loop {
            f(partial[m], &idx);
            let mut j = m;
            loop {
                if j == 0 {
                    return Ok(());
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.sizes[j] {
                    break;
                }
                idx[j] = 0;
            }
            for q in j..m {
                partial[q + 1] = mul_checked(partial[q], self.prime_blocks[q][idx[q]])?;
            }
        }
    }
}

fn mul_checked(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b)
        .ok_or_else(|| Error::Capacity(format!("product {a} * {b} overflows u64")))
}

fn checked_product<I: IntoIterator<Item = u64>>(it: I) -> Result<u64> {
    it.into_iter().try_fold(1u64, mul_checked)
}

/// Materializes level `L`: blocks, primes, and the product set sorted by `n`.
pub fn build_level(params: &ConstructionParams, level: u32) -> Result<LevelLattice> {
    let blocks = LevelBlocks::new(params, level)?;
    let count = blocks
        .product_count()
        .filter(|&c| c <= MAX_LATTICE_ENTRIES)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "level {level} has {:?} products, above the ceiling {MAX_LATTICE_ENTRIES}",
                blocks.sizes
            ))
        })?;
    let mut pairs: Vec<(u64, u32)> = Vec::with_capacity(count);
    let mut rank = 0u32;
    blocks.for_each_product(|n, _| {
        pairs.push((n, rank));
        rank += 1;
    })?;
    pairs.sort_unstable();
    let (ns, ranks) = pairs.into_iter().unzip();
    Ok(LevelLattice {
        level,
        sizes: blocks.sizes,
        index_sets: blocks.index_sets,
        prime_blocks: blocks.prime_blocks,
        ns,
        ranks,
    })
}

/// Builds levels `1..=params.max_level()`.
pub fn build_levels(params: &ConstructionParams) -> Result<Vec<LevelLattice>> {
    (1..=params.max_level()).map(|l| build_level(params, l)).collect()
}

impl LevelLattice {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    /// Block sizes `(r_1, ..., r_M)`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn index_sets(&self) -> &[Vec<usize>] {
        &self.index_sets
    }

    pub fn prime_blocks(&self) -> &[Vec<u64>] {
        &self.prime_blocks
    }

    pub fn len(&self) -> usize {
        self.ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ns.is_empty()
    }

    /// Products in ascending order.
    pub fn ns(&self) -> &[u64] {
        &self.ns
    }

    pub fn min_n(&self) -> u64 {
        self.ns[0]
    }

    pub fn max_n(&self) -> u64 {
        *self.ns.last().expect("lattice is never empty")
    }

    pub fn rank(&self, pos: usize) -> usize {
        self.ranks[pos] as usize
    }

    /// Multi-index of the `pos`-th smallest product.
    pub fn multi_index(&self, pos: usize) -> MultiIndex {
        MultiIndex(self.decode_rank(self.rank(pos)))
    }

    pub(crate) fn decode_rank(&self, mut rank: usize) -> Vec<usize> {
        let mut idx = vec![0; self.sizes.len()];
        for j in (0..self.sizes.len()).rev() {
            idx[j] = rank % self.sizes[j];
            rank /= self.sizes[j];
        }
        idx
    }

    /// Writes the multi-index of entry `pos` into `out`.
    pub fn multi_index_into(&self, pos: usize, out: &mut [usize]) {
        let mut rank = self.rank(pos);
        for j in (0..self.sizes.len()).rev() {
            out[j] = rank % self.sizes[j];
            rank /= self.sizes[j];
        }
    }

    /// `(n, multi-index)` pairs in ascending `n`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, MultiIndex)> + '_ {
        (0..self.len()).map(move |pos| (self.ns[pos], self.multi_index(pos)))
    }

    /// Position of `n` in the product set, if present.
    pub fn position(&self, n: u64) -> Option<usize> {
        self.ns.binary_search(&n).ok()
    }

    /// Number of products `<= bound`.
    pub fn count_le(&self, bound: u64) -> usize {
        self.ns.partition_point(|&n| n <= bound)
    }

    /// Product of the primes addressed by `idx`.
    pub fn product_of(&self, idx: &[usize]) -> Result<u64> {
        if idx.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: vec![self.m()],
                found: vec![idx.len()],
            });
        }
        let mut n = 1u64;
        for (j, (&i, block)) in idx.iter().zip(&self.prime_blocks).enumerate() {
            let p = *block.get(i).ok_or(Error::IndexOutOfRange {
                block: j,
                index: i,
                size: block.len(),
            })?;
            n = mul_checked(n, p)?;
        }
        Ok(n)
    }

    pub fn blocks(&self) -> LevelBlocks {
        LevelBlocks {
            level: self.level,
            sizes: self.sizes.clone(),
            index_sets: self.index_sets.clone(),
            prime_blocks: self.prime_blocks.clone(),
        }
    }

    #[cfg(test)]
    pub(crate) fn swap_entries(&mut self, a: usize, b: usize) {
        self.ns.swap(a, b);
        self.ranks.swap(a, b);
    }
}

/// `max n <= c 2^{M L} L^M`.
pub fn max_n_bound_check(lattice: &LevelLattice, c: f64) -> bool {
    let m = lattice.m() as i32;
    let l = lattice.level() as f64;
    let bound = c * (m as f64 * l).exp2() * l.powi(m);
    (lattice.max_n() as f64) <= bound
}

/// Smallest constant `C` for which `max n <= C^M 2^{ML} L^M` holds on every
/// given level: the max over levels of `(max n)^{1/M} / (2^L L)`.
pub fn calibrate_max_n_constant(lattices: &[LevelLattice]) -> f64 {
    lattices
        .iter()
        .map(|lat| {
            let l = lat.level() as f64;
            (lat.max_n() as f64).powf(1.0 / lat.m() as f64) / (l.exp2() * l)
        })
        .fold(0.0, f64::max)
}

/// Every fixed prefix `(i_1, ..., i_{M-1})` has the property that
/// `{ i_M : n <= P }` is an integer interval for every threshold `P`.
///
/// All sublevel sets of a sequence are intervals exactly when the sequence
/// never rises and then falls, so one pass per prefix covers every `P`.
pub fn interval_property_holds(lattice: &LevelLattice) -> bool {
    let n_by_rank = n_by_rank(lattice);
    let last = *lattice.sizes().last().expect("M >= 1");
    n_by_rank.chunks(last).all(|row| {
        let mut rising = false;
        row.windows(2).all(|w| {
            if w[1] > w[0] {
                rising = true;
                true
            } else {
                !rising || w[1] == w[0]
            }
        })
    })
}

pub(crate) fn n_by_rank(lattice: &LevelLattice) -> Vec<u64> {
    let mut out = vec![0u64; lattice.len()];
    for (pos, &n) in lattice.ns().iter().enumerate() {
        out[lattice.rank(pos)] = n;
    }
    out
}

/// Outcome of one named structural check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Product set is strictly ascending within each level, and every level's
/// products lie strictly below the next level's.
pub fn check_ordering(lattices: &[LevelLattice]) -> CheckOutcome {
    let mut violations = 0usize;
    for lat in lattices {
        violations += lat.ns().windows(2).filter(|w| w[0] >= w[1]).count();
    }
    for w in lattices.windows(2) {
        let max_lo = w[0].ns().iter().copied().max().unwrap_or(0);
        let min_hi = w[1].ns().iter().copied().min().unwrap_or(u64::MAX);
        if max_lo >= min_hi {
            violations += 1;
        }
    }
    CheckOutcome::new("ordering", violations == 0, format!("{violations} violations"))
}

/// Index sets and prime blocks are pairwise disjoint within and across levels.
pub fn check_disjointness(blocks: &[LevelBlocks]) -> CheckOutcome {
    let mut idx_seen = HashSet::new();
    let mut prime_seen = HashSet::new();
    let mut total = 0usize;
    for b in blocks {
        for (ks, ps) in b.index_sets.iter().zip(&b.prime_blocks) {
            total += ks.len();
            idx_seen.extend(ks.iter().copied());
            prime_seen.extend(ps.iter().copied());
        }
    }
    let ok = idx_seen.len() == total && prime_seen.len() == total;
    CheckOutcome::new(
        "disjointness",
        ok,
        format!("{total} indices, {} distinct, {} distinct primes", idx_seen.len(), prime_seen.len()),
    )
}

/// Each stored multi-index multiplies back to its `n`, and the map is
/// injective.
pub fn check_bijection(lattices: &[LevelLattice]) -> CheckOutcome {
    let mut violations = 0usize;
    let mut checked = 0usize;
    for lat in lattices {
        let mut seen_rank = vec![false; lat.len()];
        for pos in 0..lat.len() {
            let r = lat.rank(pos);
            if std::mem::replace(&mut seen_rank[r], true) {
                violations += 1;
            }
            match lat.product_of(&lat.decode_rank(r)) {
                Ok(n) if n == lat.ns()[pos] => {}
                _ => violations += 1,
            }
            checked += 1;
        }
        let mut sorted = lat.ns().to_vec();
        sorted.sort_unstable();
        violations += sorted.windows(2).filter(|w| w[0] == w[1]).count();
    }
    CheckOutcome::new(
        "bijection",
        violations == 0,
        format!("{checked} entries, {violations} violations"),
    )
}

pub fn check_interval_property(lattices: &[LevelLattice]) -> CheckOutcome {
    let bad: Vec<u32> = lattices
        .iter()
        .filter(|l| !interval_property_holds(l))
        .map(LevelLattice::level)
        .collect();
    CheckOutcome::new("interval_property", bad.is_empty(), format!("failing levels {bad:?}"))
}

/// Structural checks that scale past the materialization ceiling.
///
/// Levels whose product sets fit under `materialize_limit` are built and
/// checked entry by entry. Larger levels are enumerated on the fly: their
/// exact minimum and maximum feed the ordering check, and injectivity follows
/// from unique factorization once every block prime is confirmed prime by
/// trial division and the blocks are disjoint.
pub fn structural_checks(
    params: &ConstructionParams,
    max_level: u32,
    materialize_limit: usize,
) -> Result<Vec<CheckOutcome>> {
    let mut blocks = Vec::new();
    let mut materialized = Vec::new();
    let mut ranges = Vec::new();
    let mut streamed_ok = true;
    let mut streamed_levels = Vec::new();
    let mut streamed_entries = 0usize;
    for level in 1..=max_level {
        let b = LevelBlocks::new(params, level)?;
        let count = b.product_count().unwrap_or(usize::MAX);
        if count <= materialize_limit.min(MAX_LATTICE_ENTRIES) {
            let lat = build_level(params, level)?;
            ranges.push((lat.min_n(), lat.max_n()));
            materialized.push(lat);
        } else {
            let (mut lo, mut hi) = (u64::MAX, 0u64);
            b.for_each_product(|n, _| {
                lo = lo.min(n);
                hi = hi.max(n);
                streamed_entries += 1;
            })?;
            streamed_ok &= b.prime_blocks.iter().flatten().all(|&p| primes::is_prime(p));
            streamed_levels.push(level);
            ranges.push((lo, hi));
        }
        blocks.push(b);
    }

    let mut out = Vec::new();
    let within = check_ordering(&materialized);
    let across = ranges.windows(2).filter(|w| w[0].1 >= w[1].0).count();
    out.push(CheckOutcome::new(
        "ordering",
        within.passed && across == 0,
        format!("{}; {across} cross-level violations over {} levels", within.detail, ranges.len()),
    ));
    out.push(check_disjointness(&blocks));
    let bij = check_bijection(&materialized);
    out.push(CheckOutcome::new(
        "bijection",
        bij.passed && streamed_ok,
        format!(
            "{}; streamed levels {streamed_levels:?} ({streamed_entries} products) via prime blocks: {}",
            bij.detail,
            if streamed_ok { "ok" } else { "non-prime found" }
        ),
    ));
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    #[serde(rename = "L")]
    level: u32,
    r: Vec<usize>,
    #[serde(rename = "indexSets")]
    index_sets: Vec<Vec<usize>>,
    primes: Vec<Vec<u64>>,
    #[serde(rename = "productSet")]
    product_set: Vec<(u64, Vec<usize>)>,
}

impl Serialize for LevelLattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeJson {
            level: self.level,
            r: self.sizes.clone(),
            index_sets: self.index_sets.clone(),
            primes: self.prime_blocks.clone(),
            product_set: self.entries().map(|(n, idx)| (n, idx.0)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LevelLattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = LatticeJson::deserialize(d)?;
        let mut ns = Vec::with_capacity(j.product_set.len());
        let mut ranks = Vec::with_capacity(j.product_set.len());
        for (n, idx) in j.product_set {
            if idx.len() != j.r.len() || idx.iter().zip(&j.r).any(|(i, r)| i >= r) {
                return Err(D::Error::custom(format!("multi-index {idx:?} out of range")));
            }
            let rank = idx.iter().zip(&j.r).fold(0usize, |acc, (&i, &r)| acc * r + i);
            ns.push(n);
            ranks.push(rank as u32);
        }
        Ok(LevelLattice {
            level: j.level,
            sizes: j.r,
            index_sets: j.index_sets,
            prime_blocks: j.primes,
            ns,
            ranks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::parse_profile;

    fn flat2(max_level: u32) -> ConstructionParams {
        ConstructionParams::flat(2, max_level).unwrap()
    }

    #[test]
    fn index_sets_match_direct_substitution() {
        let p = flat2(2);
        assert_eq!(block_index_set(&p, 1, 2).unwrap(), vec![8, 9, 10, 11]);
        assert_eq!(block_index_set(&p, 2, 2).unwrap(), vec![12, 13, 14, 15]);
        let p3 = ConstructionParams::new(3, parse_profile("1/2,1,1").unwrap(), 4).unwrap();
        assert_eq!(block_index_set(&p3, 1, 4).unwrap(), vec![48, 49, 50, 51]);
        assert!(block_index_set(&p, 3, 2).is_err());
        assert!(block_index_set(&p, 1, 0).is_err());
    }

    #[test]
    fn level_one_for_m2() {
        let lat = build_level(&flat2(1), 1).unwrap();
        assert_eq!(lat.index_sets(), &[vec![4, 5], vec![6, 7]]);
        assert_eq!(lat.prime_blocks(), &[vec![7, 11], vec![13, 17]]);
        assert_eq!(lat.ns(), &[91, 119, 143, 187]);
        assert_eq!(lat.multi_index(0), MultiIndex(vec![0, 0]));
        assert_eq!(lat.multi_index(1), MultiIndex(vec![0, 1]));
        assert_eq!(lat.multi_index(2), MultiIndex(vec![1, 0]));
        assert_eq!(lat.multi_index(3), MultiIndex(vec![1, 1]));
        // n_* is the product of the first prime of each block
        assert_eq!(lat.min_n(), lat.blocks().min_product().unwrap());
        assert_eq!(lat.max_n(), lat.blocks().max_product().unwrap());
    }

    #[test]
    fn max_n_bound() {
        let lat = build_level(&flat2(1), 1).unwrap();
        assert!(max_n_bound_check(&lat, 64.0));
        assert!(!max_n_bound_check(&lat, 1.0));
        let lats = build_levels(&flat2(6)).unwrap();
        let c = calibrate_max_n_constant(&lats);
        // the bound is C^M 2^{ML} L^M; max_n_bound_check takes the product C^M
        for lat in &lats {
            assert!(max_n_bound_check(lat, c.powi(2) * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn levels_are_ordered_and_disjoint() {
        for p in [
            flat2(8),
            ConstructionParams::flat(3, 5).unwrap(),
            ConstructionParams::new(3, parse_profile("3/4,1,1").unwrap(), 6).unwrap(),
        ] {
            let lats = build_levels(&p).unwrap();
            for w in lats.windows(2) {
                assert!(w[0].max_n() < w[1].min_n());
            }
            assert!(check_ordering(&lats).passed);
            assert!(check_bijection(&lats).passed);
            let blocks: Vec<_> = lats.iter().map(LevelLattice::blocks).collect();
            assert!(check_disjointness(&blocks).passed);
            for lat in &lats {
                assert_eq!(lat.len(), lat.sizes().iter().product::<usize>());
            }
        }
    }

    /// Direct oracle: for every prefix and every threshold among the stored
    /// products, collect `{ i_M : n <= P }` and test contiguity.
    fn interval_bruteforce(lat: &LevelLattice) -> bool {
        let by_rank = n_by_rank(lat);
        let last = *lat.sizes().last().unwrap();
        for row in by_rank.chunks(last) {
            for &p in lat.ns() {
                let members: Vec<usize> = (0..last).filter(|&i| row[i] <= p).collect();
                if let (Some(&a), Some(&b)) = (members.first(), members.last()) {
                    if b - a + 1 != members.len() {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn interval_property_matches_bruteforce() {
        for p in [flat2(4), ConstructionParams::flat(3, 3).unwrap()] {
            for lat in build_levels(&p).unwrap() {
                assert!(interval_bruteforce(&lat));
                assert!(interval_property_holds(&lat));
            }
        }
    }

    #[test]
    fn interval_check_detects_a_bump() {
        let mut lat = build_level(&flat2(2), 2).unwrap();
        // swap n values of ranks 0 and 1 (i_2 = 0, 1 of the first row) with
        // rank 2, producing a rise-then-fall row
        let pos: Vec<usize> = (0..3).map(|r| (0..lat.len()).find(|&p| lat.rank(p) == r).unwrap()).collect();
        let tmp = lat.ns[pos[1]];
        lat.ns[pos[1]] = lat.ns[pos[2]] + 1_000_000;
        assert!(!interval_property_holds(&lat));
        lat.ns[pos[1]] = tmp;
        assert!(interval_property_holds(&lat));
    }

    #[test]
    fn json_round_trip() {
        let lat = build_level(&flat2(2), 2).unwrap();
        let s = serde_json::to_string(&lat).unwrap();
        assert!(s.contains("\"productSet\":[["));
        let back: LevelLattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, lat);
    }

    #[test]
    fn streaming_matches_materialized() {
        let p = ConstructionParams::flat(3, 3).unwrap();
        let lat = build_level(&p, 3).unwrap();
        let mut seen = Vec::new();
        lat.blocks()
            .for_each_product(|n, idx| {
                assert_eq!(lat.product_of(idx).unwrap(), n);
                seen.push(n);
            })
            .unwrap();
        seen.sort_unstable();
        assert_eq!(seen, lat.ns());
    }

    #[test]
    fn capacity_is_reported() {
        let p = ConstructionParams::flat(3, 12).unwrap();
        assert!(matches!(build_level(&p, 9), Err(Error::Capacity(_))));
    }
}
