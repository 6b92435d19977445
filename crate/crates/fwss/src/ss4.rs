//! Meet-in-the-middle solvers driven by splitting systems: the two-table
//! baseline and the Schroeppel-Shamir four-table search, which keeps the
//! square-root running time while only ever materializing fourth-root-sized
//! tables.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use num_bigint::BigUint;
use serde::Serialize;

use crate::combin::binomial;
use crate::error::{Error, Result};
use crate::instance::{is_solution, Instance, SolutionVector};
use crate::rng::RngHandle;
use crate::splitting::{deterministic_divisions, random_division_rng, Division, SplitParams};

/// Ceiling on the size of any per-block subproblem table.
pub const TABLE_CAP: u64 = 1 << 24;

/// A weight-w subset of one block together with its subset sum. The mask
/// holds the chosen instance indices in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartialSum {
    pub value: BigUint,
    pub mask: Vec<usize>,
}

/// Every weight-w subset of one block, ascending by value with ties broken
/// by mask; this is the total order that makes pairwise sum composition
/// monotonic.
#[derive(Clone, Debug)]
pub struct SortedTable {
    block: usize,
    entries: Vec<PartialSum>,
}

impl SortedTable {
    pub fn block(&self) -> usize {
        self.block
    }

    pub fn entries(&self) -> &[PartialSum] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn min_value(&self) -> &BigUint {
        &self.entries.first().expect("tables are never empty").value
    }

    fn max_value(&self) -> &BigUint {
        &self.entries.last().expect("tables are never empty").value
    }
}

/// Exhaustive table of the block's weight-w subsets, sorted.
pub fn enumerate_subproblems(
    instance: &Instance,
    division: &Division,
    block_idx: usize,
) -> Result<SortedTable> {
    let block = &division.blocks()[block_idx];
    let w = division.block_weights()[block_idx];
    let combos = binomial(block.len() as u64, w as u64);
    if combos > BigUint::from(TABLE_CAP) {
        return Err(Error::Resource(format!(
            "table for block {block_idx} needs C({}, {w}) = {combos} entries, above the cap {TABLE_CAP}",
            block.len()
        )));
    }
    let weights: Vec<BigUint> =
        block.iter().map(|&i| instance.weights()[i].clone()).collect();
    let mut entries = Vec::new();
    crate::combin::for_each_weight_subset(&weights, w, |local, sum| {
        entries.push(PartialSum {
            value: sum.clone(),
            mask: local.iter().map(|&j| block[j]).collect(),
        });
        false
    });
    entries.sort();
    Ok(SortedTable { block: block_idx, entries })
}

/// Counters instrumenting one queue-driven search.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchStats {
    /// Queue advances: every (left, right) pair consumed counts once.
    pub steps: u64,
    /// Peak number of resident pairs on either queue.
    pub max_queue: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct QueueEntry {
    key: BigUint,
    left: u32,
    right: u32,
}

/// The four masks of a quadruple found by [`ss_search`], in block order.
pub type Quadruple = [Vec<usize>; 4];

/// Schroeppel-Shamir search over four sorted tables: returns the first
/// quadruple of masks whose values sum to the target, if any exists.
pub fn ss_search(
    tables: &[&SortedTable; 4],
    target: &BigUint,
    stats: &mut SearchStats,
) -> Option<Quadruple> {
    let mut found = None;
    search_pairs(tables, target, stats, |quad| {
        found = Some(quad);
        true
    });
    found
}

/// As [`ss_search`], but collects every quadruple summing to the target.
pub fn ss_search_all(
    tables: &[&SortedTable; 4],
    target: &BigUint,
    stats: &mut SearchStats,
) -> Vec<Quadruple> {
    let mut all = Vec::new();
    search_pairs(tables, target, stats, |quad| {
        all.push(quad);
        false
    });
    all
}

/// Core schedule: a min-queue over T1 x T2 and a max-queue over T3 x T4,
/// each holding one resident pair per left element. The exposed sum
/// S = min-top + max-top scans the reachable values monotonically; on a hit
/// every pair participating in the tied keys is enumerated before either
/// queue moves past them, so equal values cannot hide solutions.
fn search_pairs(
    tables: &[&SortedTable; 4],
    target: &BigUint,
    stats: &mut SearchStats,
    mut emit: impl FnMut(Quadruple) -> bool,
) {
    let [t1, t2, t3, t4] = *tables;
    let lo = t1.min_value() + t2.min_value() + t3.min_value() + t4.min_value();
    if *target < lo {
        return;
    }
    let hi = t1.max_value() + t2.max_value() + t3.max_value() + t4.max_value();
    if *target > hi {
        return;
    }

    let mut minq: BinaryHeap<Reverse<QueueEntry>> = (0..t1.len() as u32)
        .map(|left| {
            Reverse(QueueEntry {
                key: &t1.entries[left as usize].value + t2.min_value(),
                left,
                right: 0,
            })
        })
        .collect();
    let mut maxq: BinaryHeap<QueueEntry> = (0..t3.len() as u32)
        .map(|left| QueueEntry {
            key: &t3.entries[left as usize].value + t4.max_value(),
            left,
            right: t4.len() as u32 - 1,
        })
        .collect();
    stats.max_queue = stats.max_queue.max(minq.len()).max(maxq.len());

    // The exposed keys move monotonically; checked on every advance.
    let mut last_min: Option<BigUint> = None;
    let mut last_max: Option<BigUint> = None;

    while let (Some(Reverse(min_top)), Some(max_top)) = (minq.peek(), maxq.peek()) {
        let k1 = min_top.key.clone();
        let k3 = max_top.key.clone();
        if let Some(prev) = &last_min {
            assert!(*prev <= k1, "min queue key regressed");
        }
        if let Some(prev) = &last_max {
            assert!(*prev >= k3, "max queue key regressed");
        }
        last_min = Some(k1.clone());
        last_max = Some(k3.clone());

        let sum = &k1 + &k3;
        if sum < *target {
            let Reverse(entry) = minq.pop().expect("peeked");
            stats.steps += 1;
            if (entry.right as usize) + 1 < t2.len() {
                let key = entry.key - &t2.entries[entry.right as usize].value
                    + &t2.entries[entry.right as usize + 1].value;
                minq.push(Reverse(QueueEntry { key, left: entry.left, right: entry.right + 1 }));
            }
        } else if sum > *target {
            let entry = maxq.pop().expect("peeked");
            stats.steps += 1;
            if entry.right > 0 {
                let key = entry.key - &t4.entries[entry.right as usize].value
                    + &t4.entries[entry.right as usize - 1].value;
                maxq.push(QueueEntry { key, left: entry.left, right: entry.right - 1 });
            }
        } else {
            // Drain every pair tied at the current keys, then cross them.
            let mut lefts: Vec<(u32, u32)> = Vec::new();
            while let Some(Reverse(top)) = minq.peek() {
                if top.key != k1 {
                    break;
                }
                let Reverse(entry) = minq.pop().expect("peeked");
                stats.steps += 1;
                lefts.push((entry.left, entry.right));
                if (entry.right as usize) + 1 < t2.len() {
                    let key = entry.key - &t2.entries[entry.right as usize].value
                        + &t2.entries[entry.right as usize + 1].value;
                    minq.push(Reverse(QueueEntry {
                        key,
                        left: entry.left,
                        right: entry.right + 1,
                    }));
                }
            }
            let mut rights: Vec<(u32, u32)> = Vec::new();
            while let Some(top) = maxq.peek() {
                if top.key != k3 {
                    break;
                }
                let entry = maxq.pop().expect("peeked");
                stats.steps += 1;
                rights.push((entry.left, entry.right));
                if entry.right > 0 {
                    let key = entry.key - &t4.entries[entry.right as usize].value
                        + &t4.entries[entry.right as usize - 1].value;
                    maxq.push(QueueEntry { key, left: entry.left, right: entry.right - 1 });
                }
            }
            stats.max_queue = stats.max_queue.max(minq.len()).max(maxq.len());
            for &(a1, a2) in &lefts {
                for &(b3, b4) in &rights {
                    let quad = [
                        t1.entries[a1 as usize].mask.clone(),
                        t2.entries[a2 as usize].mask.clone(),
                        t3.entries[b3 as usize].mask.clone(),
                        t4.entries[b4 as usize].mask.clone(),
                    ];
                    if emit(quad) {
                        return;
                    }
                }
            }
        }
        stats.max_queue = stats.max_queue.max(minq.len()).max(maxq.len());
    }
}

/// How a solver obtains its stream of divisions.
#[derive(Clone, Copy, Debug)]
pub enum DivisionSource {
    /// The deterministic splitting system: at most n^(k-1) divisions, with a
    /// good one guaranteed for every subset, so exhausting the stream proves
    /// there is no solution.
    Deterministic,
    /// Independent uniform divisions; a good one is expected within
    /// O(ell^((k-1)/2)) draws but there is no certificate of absence.
    Random(RngHandle),
}

/// Caps on the division search.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchLimits {
    /// Most divisions to try. With a random source and no explicit cap, the
    /// solver uses 4 * n^(k-1), far beyond the expected number of draws.
    pub max_divisions: Option<u64>,
}

/// Outcome of a division-driven solve, including the counters behind the
/// resource-bound claims. Serializes with the solution as a bit string.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub algorithm: String,
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    pub solution: Option<SolutionVector>,
    pub divisions_tried: u64,
    pub queue_steps: u64,
    pub max_queue: u64,
    pub max_table: u64,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<RngHandle>,
}

impl SolveReport {
    fn new(algorithm: &str, instance: &Instance, k: usize, seed: Option<RngHandle>) -> Self {
        Self {
            algorithm: algorithm.to_owned(),
            n: instance.n(),
            ell: instance.ell(),
            k,
            solution: None,
            divisions_tried: 0,
            queue_steps: 0,
            max_queue: 0,
            max_table: 0,
            elapsed_ms: 0,
            seed,
        }
    }
}

fn default_random_budget(n: usize, k: usize) -> u64 {
    4u64.saturating_mul((n as u64).saturating_pow(k as u32 - 1))
}

fn division_budget(limits: &SearchLimits, source: &DivisionSource, n: usize, k: usize) -> Option<u64> {
    match (limits.max_divisions, source) {
        (Some(b), _) => Some(b),
        (None, DivisionSource::Deterministic) => None,
        (None, DivisionSource::Random(_)) => Some(default_random_budget(n, k)),
    }
}

/// Schroeppel-Shamir over a stream of 4-divisions: builds the four block
/// tables per division and runs the queue search until a verified solution
/// appears or the stream ends.
pub fn solve_ss4(
    instance: &Instance,
    source: DivisionSource,
    limits: SearchLimits,
) -> Result<SolveReport> {
    let params = SplitParams::new(instance.n(), instance.ell(), 4)?;
    let start = Instant::now();
    let seed = match source {
        DivisionSource::Random(handle) => Some(handle),
        DivisionSource::Deterministic => None,
    };
    let mut report = SolveReport::new("ss4", instance, 4, seed);
    let budget = division_budget(&limits, &source, instance.n(), 4);
    let mut rng = seed.map(|h| h.rng());

    let mut deterministic = match source {
        DivisionSource::Deterministic => Some(deterministic_divisions(&params)),
        DivisionSource::Random(_) => None,
    };
    loop {
        if let Some(budget) = budget {
            if report.divisions_tried >= budget {
                report.elapsed_ms = start.elapsed().as_millis() as u64;
                return Err(Error::Budget { partial: Box::new(report) });
            }
        }
        let division = match (&mut deterministic, &mut rng) {
            (Some(stream), _) => match stream.next() {
                Some(d) => d,
                None => break,
            },
            (None, Some(rng)) => random_division_rng(&params, rng),
            (None, None) => unreachable!("a source is always configured"),
        };
        report.divisions_tried += 1;

        let tables: Vec<SortedTable> = (0..4)
            .map(|j| enumerate_subproblems(instance, &division, j))
            .collect::<Result<_>>()?;
        report.max_table =
            report.max_table.max(tables.iter().map(|t| t.len() as u64).max().unwrap_or(0));
        let refs = [&tables[0], &tables[1], &tables[2], &tables[3]];
        let mut stats = SearchStats::default();
        let hit = ss_search(&refs, instance.target(), &mut stats);
        report.queue_steps += stats.steps;
        report.max_queue = report.max_queue.max(stats.max_queue as u64);

        if let Some(quad) = hit {
            let ones: Vec<usize> = quad.iter().flatten().copied().collect();
            let x = SolutionVector::from_indices(instance.n(), &ones);
            assert!(
                is_solution(instance, &x).expect("solver output has length n"),
                "schroeppel-shamir produced an invalid solution"
            );
            report.solution = Some(x);
            break;
        }
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// Two-table meet-in-the-middle baseline: per division, binary-search the
/// sorted first table for the complement of each second-block subset sum.
pub fn solve_mitm2(
    instance: &Instance,
    source: DivisionSource,
    limits: SearchLimits,
) -> Result<SolveReport> {
    let params = SplitParams::new(instance.n(), instance.ell(), 2)?;
    let start = Instant::now();
    let seed = match source {
        DivisionSource::Random(handle) => Some(handle),
        DivisionSource::Deterministic => None,
    };
    let mut report = SolveReport::new("mitm2", instance, 2, seed);
    let budget = division_budget(&limits, &source, instance.n(), 2);
    let mut rng = seed.map(|h| h.rng());

    let mut deterministic = match source {
        DivisionSource::Deterministic => Some(deterministic_divisions(&params)),
        DivisionSource::Random(_) => None,
    };
    let target = instance.target();
    loop {
        if let Some(budget) = budget {
            if report.divisions_tried >= budget {
                report.elapsed_ms = start.elapsed().as_millis() as u64;
                return Err(Error::Budget { partial: Box::new(report) });
            }
        }
        let division = match (&mut deterministic, &mut rng) {
            (Some(stream), _) => match stream.next() {
                Some(d) => d,
                None => break,
            },
            (None, Some(rng)) => random_division_rng(&params, rng),
            (None, None) => unreachable!("a source is always configured"),
        };
        report.divisions_tried += 1;

        let t1 = enumerate_subproblems(instance, &division, 0)?;
        let t2 = enumerate_subproblems(instance, &division, 1)?;
        report.max_table = report.max_table.max(t1.len().max(t2.len()) as u64);

        let mut hit: Option<(Vec<usize>, Vec<usize>)> = None;
        for p2 in t2.entries() {
            if p2.value > *target {
                continue;
            }
            let need = target - &p2.value;
            report.queue_steps += 1;
            let pos = t1.entries().partition_point(|e| e.value < need);
            if let Some(p1) = t1.entries().get(pos) {
                if p1.value == need {
                    hit = Some((p1.mask.clone(), p2.mask.clone()));
                    break;
                }
            }
        }
        if let Some((m1, m2)) = hit {
            let ones: Vec<usize> = m1.iter().chain(&m2).copied().collect();
            let x = SolutionVector::from_indices(instance.n(), &ones);
            assert!(
                is_solution(instance, &x).expect("solver output has length n"),
                "meet-in-the-middle produced an invalid solution"
            );
            report.solution = Some(x);
            break;
        }
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute::brute_force;
    use crate::instance::{evaluate, gen_instance};
    use crate::splitting::{good_probability_exact, random_division};
    use num_traits::ToPrimitive;

    fn inst(weights: &[u64], ell: usize, t: u64) -> Instance {
        Instance::new(weights.iter().map(|&w| w.into()).collect(), ell, t.into()).unwrap()
    }

    fn block_division(sizes: &[usize], weights: &[usize]) -> Division {
        let mut blocks = Vec::new();
        let mut next = 0;
        for &s in sizes {
            blocks.push((next..next + s).collect());
            next += s;
        }
        Division::new(blocks, weights.to_vec()).unwrap()
    }

    #[test]
    fn table_of_singletons() {
        let p = inst(&[1, 2, 3, 4], 2, 3);
        let d = block_division(&[2, 2], &[1, 1]);
        let t = enumerate_subproblems(&p, &d, 0).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.entries()[0].value, 1u32.into());
        assert_eq!(t.entries()[0].mask, vec![0]);
        assert_eq!(t.entries()[1].value, 2u32.into());
    }

    #[test]
    fn table_weight_zero_is_the_empty_subset() {
        let p = inst(&[5, 6], 0, 0);
        let d = block_division(&[2], &[0]);
        let t = enumerate_subproblems(&p, &d, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.entries()[0].mask.is_empty());
        assert_eq!(t.entries()[0].value, 0u32.into());
    }

    #[test]
    fn table_is_sorted_and_complete() {
        let p = gen_instance(6, 3, 1.0, RngHandle::new(4), false).unwrap();
        let d = block_division(&[6], &[3]);
        let t = enumerate_subproblems(&p, &d, 0).unwrap();
        assert_eq!(t.len(), 20);
        for pair in t.entries().windows(2) {
            assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn search_recovers_unique_binary_representation() {
        let weights: Vec<u64> = (0..16).map(|i| 1u64 << i).collect();
        let ones = [0usize, 3, 5, 6, 9, 10, 12, 15];
        let t: u64 = ones.iter().map(|&i| 1u64 << i).sum();
        let p = inst(&weights, 8, t);
        let d = block_division(&[4, 4, 4, 4], &[2, 2, 2, 2]);
        let tables: Vec<SortedTable> =
            (0..4).map(|j| enumerate_subproblems(&p, &d, j).unwrap()).collect();
        let refs = [&tables[0], &tables[1], &tables[2], &tables[3]];
        let mut stats = SearchStats::default();
        let quad = ss_search(&refs, p.target(), &mut stats).expect("planted");
        let mut got: Vec<usize> = quad.iter().flatten().copied().collect();
        got.sort_unstable();
        assert_eq!(got, ones);

        // Independent check: the quadruple is unique among all cross picks.
        let mut count = 0;
        for a in tables[0].entries() {
            for b in tables[1].entries() {
                for c in tables[2].entries() {
                    for e in tables[3].entries() {
                        if &a.value + &b.value + &c.value + &e.value == *p.target() {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 1);
    }

    #[test]
    fn unreachable_target_exits_immediately() {
        let p = inst(&[1, 2, 3, 4, 5, 6, 7, 8], 4, 1_000_000);
        let d = block_division(&[2, 2, 2, 2], &[1, 1, 1, 1]);
        let tables: Vec<SortedTable> =
            (0..4).map(|j| enumerate_subproblems(&p, &d, j).unwrap()).collect();
        let refs = [&tables[0], &tables[1], &tables[2], &tables[3]];
        let mut stats = SearchStats::default();
        assert!(ss_search(&refs, p.target(), &mut stats).is_none());
        assert!(stats.steps <= (tables[0].len() + tables[2].len()) as u64);
    }

    #[test]
    fn tie_stress_enumerates_every_quadruple() {
        // All weights equal: every pick of one index per block is a solution.
        let p = inst(&[1; 8], 4, 4);
        let d = block_division(&[2, 2, 2, 2], &[1, 1, 1, 1]);
        let tables: Vec<SortedTable> =
            (0..4).map(|j| enumerate_subproblems(&p, &d, j).unwrap()).collect();
        let refs = [&tables[0], &tables[1], &tables[2], &tables[3]];
        let mut stats = SearchStats::default();
        let all = ss_search_all(&refs, p.target(), &mut stats);
        assert_eq!(all.len(), 16);

        let mut stats = SearchStats::default();
        let first = ss_search(&refs, p.target(), &mut stats).unwrap();
        assert_eq!(first, all[0], "first solution is deterministic");
    }

    #[test]
    fn search_agrees_with_quadruple_scan_on_random_tables() {
        for seed in 0..20 {
            let p = gen_instance(12, 4, 1.6, RngHandle::new(seed), seed % 2 == 0).unwrap();
            let d = block_division(&[3, 3, 3, 3], &[1, 1, 1, 1]);
            let tables: Vec<SortedTable> =
                (0..4).map(|j| enumerate_subproblems(&p, &d, j).unwrap()).collect();
            let refs = [&tables[0], &tables[1], &tables[2], &tables[3]];

            let mut expected = Vec::new();
            for a in tables[0].entries() {
                for b in tables[1].entries() {
                    for c in tables[2].entries() {
                        for e in tables[3].entries() {
                            if &a.value + &b.value + &c.value + &e.value == *p.target() {
                                expected.push([
                                    a.mask.clone(),
                                    b.mask.clone(),
                                    c.mask.clone(),
                                    e.mask.clone(),
                                ]);
                            }
                        }
                    }
                }
            }
            let mut stats = SearchStats::default();
            let mut got = ss_search_all(&refs, p.target(), &mut stats);
            got.sort();
            expected.sort();
            assert_eq!(got, expected, "seed {seed}");
        }
    }

    #[test]
    fn completeness_on_a_good_division() {
        // Plant a solution, hand the solver a division that splits it evenly,
        // and require a hit with no division search involved.
        for seed in 0..10 {
            let p = gen_instance(16, 8, 0.9, RngHandle::new(seed), true).unwrap();
            let y = brute_force(&p).unwrap().expect("planted");
            let ones: Vec<usize> = y.ones().collect();
            let rest: Vec<usize> = (0..16).filter(|i| !ones.contains(i)).collect();
            // Two solution indices and two others per block.
            let blocks: Vec<Vec<usize>> = (0..4)
                .map(|j| {
                    let mut b: Vec<usize> = ones[2 * j..2 * j + 2].to_vec();
                    b.extend_from_slice(&rest[2 * j..2 * j + 2]);
                    b.sort_unstable();
                    b
                })
                .collect();
            let d = Division::new(blocks, vec![2; 4]).unwrap();
            let tables: Vec<SortedTable> =
                (0..4).map(|j| enumerate_subproblems(&p, &d, j).unwrap()).collect();
            let refs = [&tables[0], &tables[1], &tables[2], &tables[3]];
            let mut stats = SearchStats::default();
            let quad = ss_search(&refs, p.target(), &mut stats).expect("good division");
            let ones: Vec<usize> = quad.iter().flatten().copied().collect();
            let x = SolutionVector::from_indices(16, &ones);
            assert!(is_solution(&p, &x).unwrap());
        }
    }

    #[test]
    fn solve_ss4_planted_with_deterministic_stream() {
        let p = gen_instance(16, 8, 0.9, RngHandle::new(11), true).unwrap();
        let report = solve_ss4(&p, DivisionSource::Deterministic, SearchLimits::default()).unwrap();
        let x = report.solution.expect("planted instance");
        assert!(is_solution(&p, &x).unwrap());
        assert!(report.divisions_tried <= 16u64.pow(3));
    }

    #[test]
    fn solve_ss4_proves_infeasible_by_exhaustion() {
        let weights: Vec<u64> = (1..=12).collect();
        let total: u64 = weights.iter().sum();
        let p = inst(&weights, 4, total + 1);
        let report = solve_ss4(&p, DivisionSource::Deterministic, SearchLimits::default()).unwrap();
        assert!(report.solution.is_none());
        let expected_stream_len = 12 * 9 * 6;
        assert_eq!(report.divisions_tried, expected_stream_len);
    }

    #[test]
    fn solve_ss4_budget_error_carries_counters() {
        let weights: Vec<u64> = (1..=12).collect();
        let total: u64 = weights.iter().sum();
        let p = inst(&weights, 4, total + 1);
        let err = solve_ss4(
            &p,
            DivisionSource::Random(RngHandle::new(0)),
            SearchLimits { max_divisions: Some(5) },
        )
        .unwrap_err();
        match err {
            Error::Budget { partial } => {
                assert_eq!(partial.divisions_tried, 5);
                assert!(partial.solution.is_none());
            }
            other => panic!("expected budget error, got {other}"),
        }
    }

    #[test]
    fn random_stream_division_count_matches_good_probability() {
        // Mean divisions to the first good one is 1/p; allow 3 sigma on the
        // mean of 10 geometric draws.
        let params = SplitParams::new(24, 12, 4).unwrap();
        let p_good = {
            let r = good_probability_exact(&params).unwrap();
            r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
        };
        let runs = 10;
        let mut total = 0u64;
        for seed in 0..runs {
            let inst = gen_instance(24, 12, 0.9, RngHandle::with_stream(31, seed), true).unwrap();
            let report = solve_ss4(
                &inst,
                DivisionSource::Random(RngHandle::with_stream(32, seed)),
                SearchLimits::default(),
            )
            .unwrap();
            assert!(report.solution.is_some());
            total += report.divisions_tried;
        }
        let mean = total as f64 / runs as f64;
        let expected = 1.0 / p_good;
        let sigma = ((1.0 - p_good) / (p_good * p_good) / runs as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * sigma,
            "mean {mean} vs expected {expected} (sigma {sigma})"
        );
    }

    #[test]
    fn mitm2_finds_planted_solutions() {
        let p = gen_instance(16, 8, 0.9, RngHandle::new(13), true).unwrap();
        let report =
            solve_mitm2(&p, DivisionSource::Deterministic, SearchLimits::default()).unwrap();
        let x = report.solution.expect("planted");
        assert!(is_solution(&p, &x).unwrap());
        assert_eq!(report.max_table, 70, "C(8,4) entries per side");
    }

    #[test]
    fn mitm2_agrees_with_brute_force_on_solvability() {
        for seed in 0..40 {
            let planted = seed % 2 == 0;
            let p = gen_instance(12, 4, 1.1, RngHandle::with_stream(41, seed), planted).unwrap();
            let brute = brute_force(&p).unwrap();
            let report =
                solve_mitm2(&p, DivisionSource::Deterministic, SearchLimits::default()).unwrap();
            assert_eq!(brute.is_some(), report.solution.is_some(), "seed {seed}");
            if let Some(x) = report.solution {
                assert!(is_solution(&p, &x).unwrap());
            }
        }
    }

    #[test]
    fn stirling_band_for_quarter_tables() {
        // C(n/4, l/4) tracks C(n, l)^(1/4) * (l(n-l)/n)^(-3/8) up to a
        // constant; the ratio must stay in a loose fixed band.
        for n in [16u64, 24, 32] {
            let l = n / 2;
            let quarter = binomial(n / 4, l / 4).to_f64().unwrap();
            let whole = binomial(n, l).to_f64().unwrap();
            let ratio =
                quarter / whole.powf(0.25) * ((l * (n - l)) as f64 / n as f64).powf(0.375);
            assert!((0.1..=10.0).contains(&ratio), "n={n} ratio={ratio}");
        }
    }

    #[test]
    fn report_serializes_with_solution_string() {
        let p = inst(&[1, 2, 3, 4], 2, 3);
        let report =
            solve_mitm2(&p, DivisionSource::Deterministic, SearchLimits::default()).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(json["algorithm"], "mitm2");
        assert!(json["solution"].is_string());
        assert!(json["divisions_tried"].is_u64());
        assert!(json["queue_steps"].is_u64());
        assert!(json["max_queue"].is_u64());
        assert!(json["elapsed_ms"].is_u64());
        assert!(json.get("seed").is_none(), "deterministic runs echo no seed");
    }

    #[test]
    fn queue_growth_is_bounded_per_division() {
        for seed in 0..5 {
            let p = gen_instance(24, 12, 0.9, RngHandle::with_stream(51, seed), true).unwrap();
            let params = SplitParams::new(24, 12, 4).unwrap();
            let d = random_division(&params, RngHandle::with_stream(52, seed));
            let tables: Vec<SortedTable> =
                (0..4).map(|j| enumerate_subproblems(&p, &d, j).unwrap()).collect();
            let refs = [&tables[0], &tables[1], &tables[2], &tables[3]];
            let mut stats = SearchStats::default();
            let _ = ss_search(&refs, p.target(), &mut stats);
            let bound = binomial(24 / 4 + 3, 12 / 4 + 3).to_u64().unwrap();
            assert!(stats.max_queue as u64 <= bound);
            assert!(stats.steps <= 2 * bound * bound);
        }
    }

    #[test]
    fn evaluate_matches_table_values() {
        let p = gen_instance(8, 4, 1.0, RngHandle::new(8), true).unwrap();
        let d = block_division(&[4, 4], &[2, 2]);
        let t = enumerate_subproblems(&p, &d, 1).unwrap();
        for e in t.entries() {
            let x = SolutionVector::from_indices(8, &e.mask);
            assert_eq!(evaluate(&p, &x).unwrap(), e.value);
        }
    }
}
