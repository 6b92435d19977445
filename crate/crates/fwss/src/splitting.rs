//! (n, ell, k)-splitting systems: partitions of the index set into k blocks
//! with per-block target weights, such that every weight-ell subset is split
//! evenly by at least one division in the family.
//!
//! Two shapes are supported. When k divides both n and ell, every block has
//! size n/k and weight ell/k. Otherwise the first k-1 blocks take size
//! floor(n/k) and weight floor(ell/k) and the last block absorbs both
//! remainders.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::combin::binomial;
use crate::error::{Error, Result};
use crate::rng::RngHandle;

/// Shape parameters of a splitting system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitParams {
    n: usize,
    ell: usize,
    k: usize,
}

impl SplitParams {
    pub fn new(n: usize, ell: usize, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Input(format!("k must be at least 2, got {k}")));
        }
        if k > n || k > ell {
            return Err(Error::Input(format!(
                "k = {k} must not exceed n = {n} or ell = {ell}"
            )));
        }
        if ell > n {
            return Err(Error::Input(format!("ell = {ell} exceeds n = {n}")));
        }
        let params = Self { n, ell, k };
        let sizes = params.block_sizes();
        let weights = params.block_weights();
        if weights[k - 1] > sizes[k - 1] {
            return Err(Error::Input(format!(
                "last block would need weight {} in {} slots; no division of this shape exists",
                weights[k - 1],
                sizes[k - 1]
            )));
        }
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Remainder of n modulo k.
    pub fn r1(&self) -> usize {
        self.n - self.k * (self.n / self.k)
    }

    /// Remainder of ell modulo k.
    pub fn r2(&self) -> usize {
        self.ell - self.k * (self.ell / self.k)
    }

    pub fn divisible(&self) -> bool {
        self.r1() == 0 && self.r2() == 0
    }

    /// Mandated block sizes; the remainder goes to the last block.
    pub fn block_sizes(&self) -> Vec<usize> {
        let base = self.n / self.k;
        let mut sizes = vec![base; self.k];
        sizes[self.k - 1] += self.r1();
        sizes
    }

    /// Mandated per-block weights; they always sum to ell.
    pub fn block_weights(&self) -> Vec<usize> {
        let base = self.ell / self.k;
        let mut weights = vec![base; self.k];
        weights[self.k - 1] += self.r2();
        weights
    }
}

/// One division: k index blocks partitioning `0..n`, each with its target
/// weight. Blocks keep their position, so divisions are ordered partitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Division {
    blocks: Vec<Vec<usize>>,
    weights: Vec<usize>,
}

impl Division {
    /// Validates that the blocks partition `0..n` and that one weight is
    /// supplied per block.
    pub fn new(blocks: Vec<Vec<usize>>, weights: Vec<usize>) -> Result<Self> {
        if blocks.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} blocks but {} weights",
                blocks.len(),
                weights.len()
            )));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for block in &blocks {
            for &i in block {
                if i >= n || seen[i] {
                    return Err(Error::Input(format!(
                        "blocks do not partition 0..{n}: index {i} repeated or out of range"
                    )));
                }
                seen[i] = true;
            }
        }
        for (block, &w) in blocks.iter().zip(&weights) {
            if w > block.len() {
                return Err(Error::Input(format!(
                    "block weight {w} exceeds block size {}",
                    block.len()
                )));
            }
        }
        Ok(Self { blocks, weights })
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_weights(&self) -> &[usize] {
        &self.weights
    }

    /// Total weight mandated across blocks.
    pub fn weight(&self) -> usize {
        self.weights.iter().sum()
    }

    /// Debug dump format: `{"blocks": [[..], ..], "weights": [..]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("division serialization cannot fail")
    }
}

/// Uniformly random ordered partition into blocks of the mandated sizes.
pub fn random_division(params: &SplitParams, handle: RngHandle) -> Division {
    random_division_rng(params, &mut handle.rng())
}

pub(crate) fn random_division_rng(params: &SplitParams, rng: &mut impl rand::Rng) -> Division {
    let blocks = random_blocks_rng(params.n, params.k, rng);
    Division { blocks, weights: params.block_weights() }
}

/// Random partition of `0..n` into the standard block sizes with no weight
/// targets; used by solvers that place no constraint on subset weights.
pub fn random_blocks(n: usize, k: usize, handle: RngHandle) -> Vec<Vec<usize>> {
    random_blocks_rng(n, k, &mut handle.rng())
}

pub(crate) fn random_blocks_rng(n: usize, k: usize, rng: &mut impl rand::Rng) -> Vec<Vec<usize>> {
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(rng);
    let base = n / k;
    let mut blocks = Vec::with_capacity(k);
    for j in 0..k {
        let lo = j * base;
        let hi = if j + 1 == k { n } else { lo + base };
        let mut block = indices[lo..hi].to_vec();
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

/// True iff every block of the division meets the subset `y` in exactly the
/// block's mandated weight.
pub fn is_good(division: &Division, y: &BTreeSet<usize>) -> Result<bool> {
    if y.len() != division.weight() {
        return Err(Error::Input(format!(
            "subset has {} elements, division mandates total weight {}",
            y.len(),
            division.weight()
        )));
    }
    Ok(division
        .blocks
        .iter()
        .zip(&division.weights)
        .all(|(block, &w)| block.iter().filter(|i| y.contains(i)).count() == w))
}

/// Exact probability that a uniformly random division is good for a fixed
/// weight-ell subset, in the divisible case: the ratio of good ordered
/// partitions to all ordered partitions. The k! symmetry factors cancel.
pub fn good_probability_exact(params: &SplitParams) -> Result<Ratio<BigUint>> {
    if !params.divisible() {
        return Err(Error::Input(format!(
            "exact probability needs k | n and k | ell, got n = {}, ell = {}, k = {}",
            params.n, params.ell, params.k
        )));
    }
    let multinomial = |total: usize, part: usize| -> BigUint {
        let mut left = total as u64;
        let mut acc = BigUint::one();
        while left > 0 {
            acc *= binomial(left, part as u64);
            left -= part as u64;
        }
        acc
    };
    let good = multinomial(params.ell, params.ell / params.k)
        * multinomial(params.n - params.ell, (params.n - params.ell) / params.k);
    let all = multinomial(params.n, params.n / params.k);
    Ok(Ratio::new(good, all))
}

/// The window-scan statistic: how far the cyclic window starting at `i`
/// (size floor(n/k), wrapping modulo n) is from the base block weight.
/// Adjacent windows differ by at most one element, so `|nu(i) - nu(i+1)| <= 1`.
pub fn nu(params: &SplitParams, y: &BTreeSet<usize>, i: usize) -> i64 {
    let w = params.n / params.k;
    let hits = (0..w).filter(|j| y.contains(&((i + j) % params.n))).count();
    hits as i64 - (params.ell / params.k) as i64
}

/// Deterministic splitting system stream: for level 1 the candidate first
/// block ranges over all cyclic windows of size floor(n/k); for each choice
/// the remaining indices close ranks (preserving cyclic order) and the next
/// block ranges over windows of the shorter list, and so on through block
/// k-1, with the leftovers forming block k. For every weight-ell subset some
/// emitted division is good, and the stream has at most n^(k-1) entries.
pub fn deterministic_divisions(params: &SplitParams) -> DeterministicDivisions {
    DeterministicDivisions {
        params: *params,
        window: params.n / params.k,
        levels: Vec::new(),
        done: false,
    }
}

pub struct DeterministicDivisions {
    params: SplitParams,
    window: usize,
    levels: Vec<Level>,
    done: bool,
}

struct Level {
    list: Vec<usize>,
    pos: usize,
}

impl DeterministicDivisions {
    fn descend(&mut self) {
        while self.levels.len() < self.params.k - 1 {
            let list = match self.levels.last() {
                None => (0..self.params.n).collect(),
                Some(level) => remainder_after_window(&level.list, level.pos, self.window),
            };
            self.levels.push(Level { list, pos: 0 });
        }
    }

    fn advance(&mut self) {
        while let Some(level) = self.levels.last_mut() {
            level.pos += 1;
            if level.pos < level.list.len() {
                return;
            }
            self.levels.pop();
        }
        self.done = true;
    }
}

impl Iterator for DeterministicDivisions {
    type Item = Division;

    fn next(&mut self) -> Option<Division> {
        if self.done {
            return None;
        }
        self.descend();
        let mut blocks: Vec<Vec<usize>> = self
            .levels
            .iter()
            .map(|level| {
                let mut block = cyclic_window(&level.list, level.pos, self.window);
                block.sort_unstable();
                block
            })
            .collect();
        let last = self.levels.last().expect("k >= 2 guarantees a level");
        let mut leftover = remainder_after_window(&last.list, last.pos, self.window);
        leftover.sort_unstable();
        blocks.push(leftover);
        let division = Division { blocks, weights: self.params.block_weights() };
        self.advance();
        Some(division)
    }
}

fn cyclic_window(list: &[usize], start: usize, width: usize) -> Vec<usize> {
    (0..width).map(|j| list[(start + j) % list.len()]).collect()
}

/// Indices left after removing the window, in cyclic order starting just
/// past it. Keeping the cyclic order is what lets the window-scan argument
/// recurse on the shorter list.
fn remainder_after_window(list: &[usize], start: usize, width: usize) -> Vec<usize> {
    (0..list.len() - width)
        .map(|j| list[(start + width + j) % list.len()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::for_each_combination;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn params(n: usize, ell: usize, k: usize) -> SplitParams {
        SplitParams::new(n, ell, k).unwrap()
    }

    fn set(indices: &[usize]) -> BTreeSet<usize> {
        indices.iter().copied().collect()
    }

    fn ratio_f64(r: &Ratio<BigUint>) -> f64 {
        r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
    }

    #[test]
    fn block_shapes() {
        let p = params(8, 4, 2);
        assert_eq!(p.block_sizes(), vec![4, 4]);
        assert_eq!(p.block_weights(), vec![2, 2]);
        assert!(p.divisible());

        let p = params(10, 5, 4);
        assert_eq!(p.block_sizes(), vec![2, 2, 2, 4]);
        assert_eq!(p.block_weights(), vec![1, 1, 1, 2]);
        assert_eq!((p.r1(), p.r2()), (2, 1));
        assert!(!p.divisible());
    }

    #[test]
    fn rejects_impossible_shapes() {
        // Last block of size 3 cannot hold weight 1 + 4 = 5.
        assert!(SplitParams::new(24, 12, 8).is_err());
        assert!(SplitParams::new(8, 4, 1).is_err());
        assert!(SplitParams::new(8, 2, 4).is_err());
    }

    #[test]
    fn random_division_respects_shape() {
        for (n, ell, k) in [(8, 4, 2), (10, 5, 4), (12, 6, 3)] {
            let p = params(n, ell, k);
            let d = random_division(&p, RngHandle::new(1));
            let sizes: Vec<usize> = d.blocks().iter().map(Vec::len).collect();
            assert_eq!(sizes, p.block_sizes());
            assert_eq!(d.block_weights(), p.block_weights());
            let mut all: Vec<usize> = d.blocks().iter().flatten().copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn is_good_examples() {
        let d = Division::new(vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]], vec![2, 2]).unwrap();
        assert!(is_good(&d, &set(&[0, 1, 4, 5])).unwrap());
        assert!(!is_good(&d, &set(&[0, 1, 2, 4])).unwrap());
        assert!(is_good(&d, &set(&[0, 1, 2])).is_err(), "wrong subset size");

        let p = params(10, 5, 4);
        let d = deterministic_divisions(&p).next().unwrap();
        // Take the mandated number of elements from each block.
        let mut y = BTreeSet::new();
        for (block, &w) in d.blocks().iter().zip(d.block_weights()) {
            y.extend(block.iter().take(w));
        }
        assert!(is_good(&d, &y).unwrap());
    }

    #[test]
    fn exact_probability_by_exhaustion() {
        // All 70 ordered (I1, I2) divisions of 8 indices; 36 are good for a
        // fixed 4-subset, giving 36/70 = 18/35.
        let p = params(8, 4, 2);
        let y = set(&[0, 1, 2, 3]);
        let mut total = 0u32;
        let mut good = 0u32;
        for_each_combination(8, 4, |first| {
            let rest: Vec<usize> = (0..8).filter(|i| !first.contains(i)).collect();
            let d = Division::new(vec![first.to_vec(), rest], vec![2, 2]).unwrap();
            total += 1;
            if is_good(&d, &y).unwrap() {
                good += 1;
            }
            false
        });
        assert_eq!((good, total), (36, 70));
        let exact = good_probability_exact(&p).unwrap();
        assert_eq!(exact, Ratio::new(BigUint::from(18u32), BigUint::from(35u32)));
    }

    #[test]
    fn exact_probability_full_weight() {
        let p = params(12, 12, 3);
        assert_eq!(good_probability_exact(&p).unwrap(), Ratio::one());
    }

    #[test]
    fn exact_probability_rejects_indivisible() {
        assert!(good_probability_exact(&params(10, 5, 4)).is_err());
    }

    #[test]
    fn sampling_matches_exact_probability() {
        // 10^5 draws against the exact value, 3 sigma. The acceptance suite
        // runs the full parameter sweep; this is the smoke version.
        let p = params(12, 6, 3);
        let exact = ratio_f64(&good_probability_exact(&p).unwrap());
        let y = set(&[0, 2, 3, 7, 8, 11]);
        let trials = 100_000u32;
        let mut rng = RngHandle::with_stream(21, 0).rng();
        let mut good = 0u32;
        for _ in 0..trials {
            if is_good(&random_division_rng(&p, &mut rng), &y).unwrap() {
                good += 1;
            }
        }
        let freq = good as f64 / trials as f64;
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!(
            (freq - exact).abs() <= 3.0 * sigma,
            "freq {freq} vs exact {exact} (sigma {sigma})"
        );
    }

    #[test]
    fn good_probability_trend_stays_bounded() {
        // exact_prob * ell^((k-1)/2) should not collapse toward zero as ell
        // grows; a trend check, not a constant-precise one.
        for k in [2usize, 4] {
            for ell in (k..=32).step_by(2 * k) {
                let p = params(2 * ell, ell, k);
                let scaled = ratio_f64(&good_probability_exact(&p).unwrap())
                    * (ell as f64).powf((k as f64 - 1.0) / 2.0);
                assert!(scaled > 0.3, "k={k} ell={ell} scaled={scaled}");
            }
        }
    }

    #[test]
    fn deterministic_stream_first_good_entry() {
        // With Y = {0,1}: the window {0,1,2} meets Y twice, the window
        // {1,2,3} exactly once, so the stream's first good division has
        // I1 = {1,2,3}.
        let p = params(6, 2, 2);
        let y = set(&[0, 1]);
        let d = deterministic_divisions(&p)
            .find(|d| is_good(d, &y).unwrap())
            .expect("stream contains a good division");
        assert_eq!(d.blocks()[0], vec![1, 2, 3]);
        assert_eq!(d.blocks()[1], vec![0, 4, 5]);
    }

    #[test]
    fn deterministic_stream_length_bound() {
        assert_eq!(deterministic_divisions(&params(8, 4, 2)).count(), 8);
        // k = 3: n * (n - floor(n/k)) entries, strictly below n^2.
        assert_eq!(deterministic_divisions(&params(9, 3, 3)).count(), 9 * 6);
        assert!(deterministic_divisions(&params(12, 6, 4)).count() < 12usize.pow(3));
    }

    #[test]
    fn deterministic_stream_finds_good_division_for_random_subsets() {
        let p = params(12, 6, 4);
        let mut rng = RngHandle::new(3).rng();
        let bound = 12usize.pow(3);
        for _ in 0..1000 {
            let y: BTreeSet<usize> =
                rand::seq::index::sample(&mut rng, 12, 6).iter().collect();
            let hit = deterministic_divisions(&p)
                .take(bound)
                .position(|d| is_good(&d, &y).unwrap());
            assert!(hit.is_some(), "no good division for {y:?}");
        }
    }

    #[test]
    fn nu_examples() {
        let p = params(6, 2, 2);
        let y = set(&[0, 1]);
        assert_eq!(nu(&p, &y, 0), 1);
        assert_eq!(nu(&p, &y, 1), 0);
        assert_eq!(nu(&p, &y, 3), -1);

        // A uniform stripe balances every window.
        let p = params(8, 4, 2);
        let stripe = set(&[0, 2, 4, 6]);
        assert_eq!(nu(&p, &stripe, 0), 0);
    }

    proptest! {
        #[test]
        fn nu_step_property(seed in 0u64..500) {
            let shapes = [(8usize, 4usize, 2usize), (10, 5, 4), (12, 6, 3), (9, 6, 3)];
            let (n, ell, k) = shapes[(seed % 4) as usize];
            let p = params(n, ell, k);
            let mut rng = RngHandle::new(seed).rng();
            let y: BTreeSet<usize> = rand::seq::index::sample(&mut rng, n, ell).iter().collect();
            for i in 0..n {
                let delta = (nu(&p, &y, i) - nu(&p, &y, (i + 1) % n)).abs();
                prop_assert!(delta <= 1, "step {delta} at i={i} for Y={y:?}");
            }
        }

        #[test]
        fn every_emitted_division_partitions(seed in 0u64..64) {
            let shapes = [(8usize, 4usize, 2usize), (10, 5, 4), (12, 6, 3)];
            let (n, ell, k) = shapes[(seed % 3) as usize];
            let p = params(n, ell, k);
            let d = if seed % 2 == 0 {
                random_division(&p, RngHandle::new(seed))
            } else {
                deterministic_divisions(&p).nth((seed as usize * 7) % 8).unwrap()
            };
            let sizes: Vec<usize> = d.blocks().iter().map(Vec::len).collect();
            prop_assert_eq!(sizes, p.block_sizes());
            let expect = p.block_weights();
            prop_assert_eq!(d.block_weights(), expect.as_slice());
            let mut all: Vec<usize> = d.blocks().iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn division_json_shape() {
        let d = Division::new(vec![vec![0, 2], vec![1, 3]], vec![1, 1]).unwrap();
        assert_eq!(d.to_json(), r#"{"blocks":[[0,2],[1,3]],"weights":[1,1]}"#);
    }
}
