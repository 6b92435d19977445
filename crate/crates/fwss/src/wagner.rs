//! The modular k-set birthday oracle: lists of block subset sums are merged
//! down a ladder of shrinking symmetric intervals, and a randomizing set of
//! masking values is folded into the lists beforehand so that the solution
//! finally output is close to uniform over the solutions reachable from the
//! lists.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::brute::reduce;
use crate::combin::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::splitting::Division;

/// Largest supported modulus; keeps every interval computation inside i64.
pub const MAX_MODULUS: u64 = 1 << 62;

/// Shape of one oracle invocation: modulus, list count, interval ladder and
/// list size. The interval half-widths are exact integer floors of
/// m^((L+1-lambda)/(L+1)) / 2, computed by integer roots so no boundary ever
/// depends on floating point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModParams {
    m: u64,
    k: usize,
    alpha: u32,
    cap_factor: u32,
    list_size: usize,
    half_widths: Vec<i64>,
}

impl ModParams {
    pub fn new(m: u64, k: usize, alpha: u32) -> Result<Self> {
        Self::with_cap_factor(m, k, alpha, 8)
    }

    pub fn with_cap_factor(m: u64, k: usize, alpha: u32, cap_factor: u32) -> Result<Self> {
        if m < 2 || m > MAX_MODULUS {
            return Err(Error::Parameter(format!("modulus must be in [2, 2^62], got {m}")));
        }
        if k < 2 || !k.is_power_of_two() {
            return Err(Error::Parameter(format!("k must be a power of two >= 2, got {k}")));
        }
        if alpha == 0 || cap_factor == 0 {
            return Err(Error::Parameter("alpha and cap factor must be positive".into()));
        }
        let levels = k.trailing_zeros(); // log2 k
        let root_degree = levels + 1;
        let half_widths: Vec<i64> = (0..=levels)
            .map(|lambda| {
                let width = BigUint::from(m)
                    .pow(root_degree - lambda)
                    .nth_root(root_degree)
                    .to_u64()
                    .expect("width <= m");
                (width / 2) as i64
            })
            .collect();
        // ceil(alpha / p) = ceil((alpha^(L+1) m)^(1/(L+1))), kept strictly
        // above 1/p as the oracle requires.
        let scaled = BigUint::from(alpha).pow(root_degree) * m;
        let root = scaled.nth_root(root_degree);
        let exact = root.clone().pow(root_degree) == scaled;
        let mut list_size = root.to_u64().expect("list size fits") + u64::from(!exact);
        let inv_p_floor = BigUint::from(m).nth_root(root_degree).to_u64().expect("fits");
        if list_size <= inv_p_floor {
            list_size = inv_p_floor + 1;
        }
        Ok(Self { m, k, alpha, cap_factor, list_size: list_size as usize, half_widths })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// Number of merge-plus-match levels, log2 k.
    pub fn levels(&self) -> usize {
        self.k.trailing_zeros() as usize
    }

    /// The merge parameter p = m^(-1/(log2 k + 1)).
    pub fn p(&self) -> f64 {
        (self.m as f64).powf(-1.0 / (self.levels() as f64 + 1.0))
    }

    /// Half-width of the level-lambda interval.
    pub fn half_width(&self, lambda: usize) -> i64 {
        self.half_widths[lambda]
    }

    /// Elements drawn into each starting list.
    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Ceiling applied to merged lists: cap_factor * list_size.
    pub fn merge_cap(&self) -> usize {
        self.cap_factor as usize * self.list_size
    }
}

/// Unique representative of `x` mod `m` in `[-floor(m/2), ceil(m/2))`.
pub fn balanced(x: i128, m: u64) -> i64 {
    let m = m as i128;
    let mut r = x % m;
    if r < 0 {
        r += m;
    }
    if r >= (m + 1) / 2 {
        r -= m;
    }
    r as i64
}

/// Balanced residue of an arbitrary-precision value.
pub fn balanced_biguint(x: &BigUint, m: u64) -> i64 {
    balanced(reduce(x, m) as i128, m)
}

/// One list element: a balanced residue plus the provenance that produced
/// it, one chosen subset per contributing block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeElement {
    pub residue: i64,
    pub parts: Vec<BlockSubset>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BlockSubset {
    pub block: usize,
    pub indices: Vec<usize>,
}

/// How list elements are drawn from each block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ListMode {
    /// Subsets of the block's mandated weight.
    FixedWeight,
    /// Arbitrary-weight subsets; the experimental sweep setting.
    Unrestricted,
}

/// Masking values for the randomizing scheme: 3k/4 - 1 elements of Z/mZ for
/// k >= 4. The 4-sum scheme starts at k = 4, so k = 2 carries none and its
/// randomness comes from list sampling alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomizerSet {
    values: Vec<u64>,
}

impl RandomizerSet {
    pub fn expected_len(k: usize) -> usize {
        if k == 2 {
            0
        } else {
            3 * k / 4 - 1
        }
    }

    pub fn generate(k: usize, m: u64, rng: &mut impl Rng) -> Self {
        let values = (0..Self::expected_len(k)).map(|_| rng.gen_range(0..m)).collect();
        Self { values }
    }

    pub fn from_values(k: usize, m: u64, values: Vec<u64>) -> Result<Self> {
        if values.len() != Self::expected_len(k) {
            return Err(Error::Input(format!(
                "randomizing set for k = {k} needs {} values, got {}",
                Self::expected_len(k),
                values.len()
            )));
        }
        if values.iter().any(|&v| v >= m) {
            return Err(Error::Input("randomizers must be reduced mod m".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Net balanced offset applied to each of the k lists. Per 4-sum group
    /// the four lists get +r, +r', -r, -r' with two fresh values; per
    /// 2^j-sum group (j >= 3) the middle list gets +r and the final list -r
    /// with one fresh value. Offsets accumulate; their total telescopes to
    /// zero mod m.
    pub fn offsets(&self, k: usize, m: u64) -> Result<Vec<i64>> {
        if self.values.len() != Self::expected_len(k) {
            return Err(Error::Input(format!(
                "randomizing set has {} values but k = {k} needs {}",
                self.values.len(),
                Self::expected_len(k)
            )));
        }
        let mut acc = vec![0i128; k];
        let mut next = 0usize;
        if k >= 4 {
            for group in 0..k / 4 {
                let r1 = self.values[next] as i128;
                let r2 = self.values[next + 1] as i128;
                next += 2;
                acc[4 * group] += r1;
                acc[4 * group + 1] += r2;
                acc[4 * group + 2] -= r1;
                acc[4 * group + 3] -= r2;
            }
        }
        let levels = k.trailing_zeros() as usize;
        for j in 3..=levels {
            let span = 1usize << j;
            for group in 0..k / span {
                let r = self.values[next] as i128;
                next += 1;
                acc[group * span + span / 2 - 1] += r;
                acc[group * span + span - 1] -= r;
            }
        }
        debug_assert_eq!(next, self.values.len());
        Ok(acc.into_iter().map(|v| balanced(v, m)).collect())
    }
}

/// Draws the k starting lists: `list_size` distinct random subsets per
/// block, reduced mod m into balanced form, with the target folded into the
/// last list. Duplicate provenance is rejected and resampled; duplicate
/// residues are allowed.
pub fn build_lists(
    instance: &Instance,
    division: &Division,
    params: &ModParams,
    rng: &mut impl Rng,
    mode: ListMode,
) -> Result<Vec<Vec<MergeElement>>> {
    build_lists_with(instance, division, params, rng, mode, false)
}

/// As [`build_lists`], but when `clamp` is set a block too small to supply
/// `list_size` distinct subsets contributes every subset it has instead of
/// failing. The starved regime the parameter sweep probes runs this way.
pub fn build_lists_with(
    instance: &Instance,
    division: &Division,
    params: &ModParams,
    rng: &mut impl Rng,
    mode: ListMode,
    clamp: bool,
) -> Result<Vec<Vec<MergeElement>>> {
    let k = params.k();
    if division.k() != k {
        return Err(Error::Input(format!(
            "division has {} blocks but the oracle expects k = {k}",
            division.k()
        )));
    }
    let m = params.m();
    let t_mod = reduce(instance.target(), m);
    let mut lists = Vec::with_capacity(k);
    for (j, block) in division.blocks().iter().enumerate() {
        let residues: Vec<u64> = block.iter().map(|&i| reduce(&instance.weights()[i], m)).collect();
        let weight = division.block_weights()[j];
        let available: Option<u64> = match mode {
            ListMode::FixedWeight => binomial(block.len() as u64, weight as u64).to_u64(),
            ListMode::Unrestricted if block.len() < 63 => Some(1u64 << block.len()),
            ListMode::Unrestricted => None,
        };
        let mut want = params.list_size();
        if let Some(avail) = available {
            if (want as u64) > avail {
                if !clamp {
                    return Err(Error::Parameter(format!(
                        "block {j} of size {} supplies only {avail} distinct subsets \
                         but the list needs {want}",
                        block.len()
                    )));
                }
                want = avail as usize;
            }
        }
        let fold = if j + 1 == k { t_mod } else { 0 };
        // Rejection sampling stalls near saturation; enumerate instead.
        let exhaust = available.is_some_and(|a| (want as u64) * 2 >= a);
        let mut list: Vec<MergeElement> = Vec::with_capacity(want);
        if exhaust {
            let mut all: Vec<Vec<usize>> = Vec::new();
            match mode {
                ListMode::FixedWeight => {
                    for_each_combination(block.len(), weight, |local| {
                        all.push(local.to_vec());
                        false
                    });
                }
                ListMode::Unrestricted => {
                    for bits in 0u64..(1u64 << block.len()) {
                        all.push((0..block.len()).filter(|i| bits >> i & 1 == 1).collect());
                    }
                }
            }
            all.shuffle(rng);
            all.truncate(want);
            for local in all {
                list.push(element_from_local(j, block, &residues, &local, m, fold));
            }
        } else {
            let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(want);
            while list.len() < want {
                let local: Vec<usize> = match mode {
                    ListMode::FixedWeight => {
                        let mut chosen: Vec<usize> =
                            rand::seq::index::sample(rng, block.len(), weight).into_vec();
                        chosen.sort_unstable();
                        chosen
                    }
                    ListMode::Unrestricted => {
                        (0..block.len()).filter(|_| rng.gen_bool(0.5)).collect()
                    }
                };
                if seen.insert(local.clone()) {
                    list.push(element_from_local(j, block, &residues, &local, m, fold));
                }
            }
        }
        lists.push(list);
    }
    Ok(lists)
}

/// Every weight-w subset of every block, residues balanced, target folded
/// into the last list. The uniformity experiments seed the oracle this way
/// so each conforming modular solution is present in the list product.
pub fn exhaustive_lists(
    instance: &Instance,
    division: &Division,
    params: &ModParams,
) -> Result<Vec<Vec<MergeElement>>> {
    let k = params.k();
    if division.k() != k {
        return Err(Error::Input(format!(
            "division has {} blocks but the oracle expects k = {k}",
            division.k()
        )));
    }
    let m = params.m();
    let t_mod = reduce(instance.target(), m);
    let cap = BigUint::from(1u64 << 24);
    let mut lists = Vec::with_capacity(k);
    for (j, block) in division.blocks().iter().enumerate() {
        let weight = division.block_weights()[j];
        if binomial(block.len() as u64, weight as u64) > cap {
            return Err(Error::Resource(format!(
                "exhaustive list for block {j} exceeds the cap"
            )));
        }
        let residues: Vec<u64> = block.iter().map(|&i| reduce(&instance.weights()[i], m)).collect();
        let fold = if j + 1 == k { t_mod } else { 0 };
        let mut list = Vec::new();
        for_each_combination(block.len(), weight, |local| {
            list.push(element_from_local(j, block, &residues, local, m, fold));
            false
        });
        lists.push(list);
    }
    Ok(lists)
}

fn element_from_local(
    block_idx: usize,
    block: &[usize],
    residues: &[u64],
    local: &[usize],
    m: u64,
    fold: u64,
) -> MergeElement {
    let mut sum = 0u64;
    for &i in local {
        sum = (sum + residues[i]) % m;
    }
    sum = (sum + m - fold) % m;
    MergeElement {
        residue: balanced(sum as i128, m),
        parts: vec![BlockSubset {
            block: block_idx,
            indices: local.iter().map(|&i| block[i]).collect(),
        }],
    }
}

/// Adds each list's net randomizer offset to its residues, re-balancing.
pub fn apply_randomizers(
    lists: &mut [Vec<MergeElement>],
    randomizers: &RandomizerSet,
    params: &ModParams,
) -> Result<()> {
    let offsets = randomizers.offsets(params.k(), params.m())?;
    if lists.len() != params.k() {
        return Err(Error::Input(format!(
            "expected {} lists, got {}",
            params.k(),
            lists.len()
        )));
    }
    for (list, &offset) in lists.iter_mut().zip(&offsets) {
        if offset == 0 {
            continue;
        }
        for element in list.iter_mut() {
            element.residue = balanced(element.residue as i128 + offset as i128, params.m());
        }
    }
    Ok(())
}

/// All sums a + b over the integers that land in `[-h, h)`, provenance
/// concatenated. Exact: used directly against the quadratic oracle.
pub fn merge(l1: &[MergeElement], l2: &[MergeElement], h: i64) -> Vec<MergeElement> {
    if l1.is_empty() || l2.is_empty() || h <= 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..l2.len()).collect();
    order.sort_by_key(|&i| l2[i].residue);
    let sorted: Vec<i64> = order.iter().map(|&i| l2[i].residue).collect();
    let mut out = Vec::new();
    for a in l1 {
        let lo = -h - a.residue;
        let hi = h - a.residue;
        let start = sorted.partition_point(|&r| r < lo);
        for &idx in order.iter().skip(start) {
            let b = &l2[idx];
            if b.residue >= hi {
                break;
            }
            let residue = a.residue + b.residue;
            assert!(-h <= residue && residue < h, "merge output left its interval");
            let mut parts = a.parts.clone();
            parts.extend_from_slice(&b.parts);
            out.push(MergeElement { residue, parts });
        }
    }
    out
}

/// [`merge`] followed by a uniform random down-sample to `cap` elements.
pub fn merge_capped(
    l1: &[MergeElement],
    l2: &[MergeElement],
    h: i64,
    cap: usize,
    rng: &mut impl Rng,
) -> Vec<MergeElement> {
    let mut out = merge(l1, l2, h);
    if out.len() > cap {
        out.partial_shuffle(rng, cap);
        out.truncate(cap);
    }
    out
}

/// All pairs (a, b) with a + b = 0 over the integers. The second list is
/// traversed in a random permutation, so the pair order carries no bias.
pub fn match_pairs(
    l1: &[MergeElement],
    l2: &[MergeElement],
    rng: &mut impl Rng,
) -> Vec<(MergeElement, MergeElement)> {
    if l1.is_empty() || l2.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..l1.len()).collect();
    order.sort_by_key(|&i| l1[i].residue);
    let sorted: Vec<i64> = order.iter().map(|&i| l1[i].residue).collect();
    let mut visit: Vec<usize> = (0..l2.len()).collect();
    visit.shuffle(rng);
    let mut out = Vec::new();
    for &bi in &visit {
        let b = &l2[bi];
        let want = -b.residue;
        let start = sorted.partition_point(|&r| r < want);
        for &idx in order.iter().skip(start) {
            if l1[idx].residue != want {
                break;
            }
            out.push((l1[idx].clone(), b.clone()));
        }
    }
    out
}

/// Trace of one oracle invocation: the chosen modular solution (one subset
/// per block) if the ladder survived, plus per-level list sizes for the
/// benchmark harness to dump.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRun {
    pub solution: Option<Vec<BlockSubset>>,
    pub level_sizes: Vec<Vec<usize>>,
    pub match_count: usize,
}

/// Runs the ladder: levels 1..log2(k)-1 merge adjacent list pairs inside
/// the level's interval, the final level matches, and one element of the
/// match result is returned uniformly at random. An empty intermediate list
/// or an empty match is a normal miss, reported as no solution.
pub fn oracle(lists: &[Vec<MergeElement>], params: &ModParams, rng: &mut impl Rng) -> OracleRun {
    assert_eq!(lists.len(), params.k(), "oracle needs exactly k lists");
    let levels = params.levels();
    let cap = params.merge_cap();
    let mut run = OracleRun {
        solution: None,
        level_sizes: vec![lists.iter().map(Vec::len).collect()],
        match_count: 0,
    };
    if lists.iter().any(Vec::is_empty) {
        return run;
    }

    let mut merged: Vec<Vec<MergeElement>> = Vec::new();
    for lambda in 1..levels {
        let h = params.half_width(lambda);
        let level: &[Vec<MergeElement>] = if lambda == 1 { lists } else { &merged };
        let next: Vec<Vec<MergeElement>> = level
            .chunks(2)
            .map(|pair| merge_capped(&pair[0], &pair[1], h, cap, rng))
            .collect();
        run.level_sizes.push(next.iter().map(Vec::len).collect());
        if next.iter().any(Vec::is_empty) {
            return run;
        }
        merged = next;
    }

    let (left, right) = if levels == 1 {
        (&lists[0], &lists[1]) // k = 2: no merges, straight to the match
    } else {
        (&merged[0], &merged[1])
    };
    let pairs = match_pairs(left, right, rng);
    run.match_count = pairs.len();
    if pairs.is_empty() {
        return run;
    }
    let (a, b) = &pairs[rng.gen_range(0..pairs.len())];
    assert_eq!(a.residue + b.residue, 0, "match emitted a nonzero pair");
    let mut parts: Vec<BlockSubset> = a.parts.iter().chain(&b.parts).cloned().collect();
    parts.sort();
    assert_eq!(parts.len(), params.k(), "one subset per block");
    run.solution = Some(parts);
    run
}

/// Analysis predicate: all integer 2^i-sums of the (randomized) leaf
/// residues stay inside their ladder intervals. Used by the uniformity
/// experiment, not by the solving path.
pub fn is_viable(leaf_residues: &[i64], params: &ModParams) -> bool {
    let levels = params.levels();
    for lambda in 1..levels {
        let span = 1usize << lambda;
        let h = params.half_width(lambda) as i128;
        for group in leaf_residues.chunks(span) {
            let s: i128 = group.iter().map(|&r| r as i128).sum();
            if s < -h || s >= h {
                return false;
            }
        }
    }
    true
}
