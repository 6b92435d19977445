//! Binomial coefficients and lexicographic enumeration of fixed weight
//! index subsets.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Exact binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // Every prefix product is itself a binomial, so the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `C(n, k)` as a double, saturating to infinity when it overflows.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// Visits every `k`-element subset of `0..n` in lexicographic order. The
/// visitor returns `true` to stop early; the chosen subset is then returned.
pub fn for_each_combination<F>(n: usize, k: usize, mut visit: F) -> Option<Vec<usize>>
where
    F: FnMut(&[usize]) -> bool,
{
    if k > n {
        return None;
    }
    let mut idxs: Vec<usize> = (0..k).collect();
    loop {
        if visit(&idxs) {
            return Some(idxs);
        }
        // Lexicographic successor: bump the rightmost index that has room.
        let mut j = k;
        loop {
            if j == 0 {
                return None;
            }
            j -= 1;
            if idxs[j] != j + n - k {
                break;
            }
            if j == 0 {
                return None;
            }
        }
        idxs[j] += 1;
        for t in j + 1..k {
            idxs[t] = idxs[t - 1] + 1;
        }
    }
}

/// Visits every `k`-element subset of the index range `0..weights.len()` in
/// lexicographic order, passing the subset and the exact sum of its weights.
/// Sums are maintained incrementally. The visitor returns `true` to stop; the
/// accepted subset is returned.
pub fn for_each_weight_subset<F>(weights: &[BigUint], k: usize, mut visit: F) -> Option<Vec<usize>>
where
    F: FnMut(&[usize], &BigUint) -> bool,
{
    let n = weights.len();
    if k > n {
        return None;
    }
    if k == 0 {
        let zero = BigUint::zero();
        return visit(&[], &zero).then(Vec::new);
    }
    // partial[d] = sum of the weights chosen at depths 0..=d
    let mut idxs = vec![0usize; k];
    let mut partial = vec![BigUint::zero(); k];
    let mut depth = 0usize;
    idxs[0] = 0;
    loop {
        let i = idxs[depth];
        if i + (k - depth) > n {
            // No room for the remaining picks; backtrack.
            if depth == 0 {
                return None;
            }
            depth -= 1;
            idxs[depth] += 1;
            continue;
        }
        partial[depth] = if depth == 0 {
            weights[i].clone()
        } else {
            &partial[depth - 1] + &weights[i]
        };
        if depth + 1 == k {
            if visit(&idxs, &partial[depth]) {
                return Some(idxs);
            }
            idxs[depth] += 1;
        } else {
            depth += 1;
            idxs[depth] = i + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pascal-triangle oracle, independent of the multiplicative formula.
    fn pascal(n: usize, k: usize) -> BigUint {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one()];
            for j in 1..row.len() {
                next.push(&row[j - 1] + &row[j]);
            }
            next.push(BigUint::one());
            row = next;
        }
        row.get(k).cloned().unwrap_or_default()
    }

    #[test]
    fn binomial_matches_pascal() {
        for n in 0..=24u64 {
            for k in 0..=n {
                assert_eq!(binomial(n, k), pascal(n as usize, k as usize), "C({n},{k})");
            }
        }
        assert_eq!(binomial(8, 4), BigUint::from(70u32));
        assert_eq!(binomial(24, 12), BigUint::from(2_704_156u32));
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(17, 0), BigUint::one());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(binomial(5, 9), BigUint::zero());
    }

    #[test]
    fn combinations_are_lexicographic_and_complete() {
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for_each_combination(6, 3, |c| {
            seen.push(c.to_vec());
            false
        });
        assert_eq!(seen.len(), 20);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[19], vec![3, 4, 5]);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, seen, "lexicographic order, no duplicates");
    }

    #[test]
    fn weight_subsets_track_sums() {
        let weights: Vec<BigUint> = [7u32, 11, 13, 17].iter().map(|&w| w.into()).collect();
        let mut count = 0;
        for_each_weight_subset(&weights, 2, |idxs, sum| {
            let expect: BigUint = idxs.iter().map(|&i| weights[i].clone()).sum();
            assert_eq!(*sum, expect);
            count += 1;
            false
        });
        assert_eq!(count, 6);
    }

    #[test]
    fn weight_subsets_zero_weight() {
        let weights: Vec<BigUint> = vec![BigUint::from(5u32)];
        let mut visited = 0;
        for_each_weight_subset(&weights, 0, |idxs, sum| {
            assert!(idxs.is_empty());
            assert_eq!(*sum, BigUint::zero());
            visited += 1;
            false
        });
        assert_eq!(visited, 1);
    }

    #[test]
    fn weight_subsets_stop_early() {
        let weights: Vec<BigUint> = (1u32..=6).map(BigUint::from).collect();
        let hit = for_each_weight_subset(&weights, 2, |_, sum| *sum == BigUint::from(9u32));
        assert_eq!(hit, Some(vec![2, 5])); // 3 + 6, first such pair in lex order
    }
}
