//! Exhaustive oracles: plain brute force over weight-`ell` subsets and exact
//! counting of modular solutions. Every other solver is tested against these.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::combin::{binomial, for_each_combination, for_each_weight_subset};
use crate::error::{Error, Result};
use crate::instance::{Instance, SolutionVector};

/// Default ceiling on how many combinations the exhaustive oracles will scan.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

fn check_cap(instance: &Instance, cap: u64, what: &str) -> Result<()> {
    let combos = binomial(instance.n() as u64, instance.ell() as u64);
    if combos > BigUint::from(cap) {
        return Err(Error::Resource(format!(
            "{what} would scan C({}, {}) = {combos} combinations, above the cap {cap}",
            instance.n(),
            instance.ell()
        )));
    }
    Ok(())
}

/// Scans weight-`ell` subsets in lexicographic order and returns the first
/// one meeting the target, if any.
pub fn brute_force(instance: &Instance) -> Result<Option<SolutionVector>> {
    brute_force_capped(instance, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_capped(instance: &Instance, cap: u64) -> Result<Option<SolutionVector>> {
    check_cap(instance, cap, "brute force")?;
    let hit = for_each_weight_subset(instance.weights(), instance.ell(), |_, sum| {
        sum == instance.target()
    });
    Ok(hit.map(|ones| SolutionVector::from_indices(instance.n(), &ones)))
}

/// Exact number of weight-`ell` subsets whose sum is `t` modulo `m`.
/// `m = 1` counts everything: all residues are zero.
pub fn count_modular_solutions(instance: &Instance, m: u64) -> Result<u64> {
    count_modular_solutions_capped(instance, m, DEFAULT_ENUMERATION_CAP)
}

pub fn count_modular_solutions_capped(instance: &Instance, m: u64, cap: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::Input("modulus must be at least 1".into()));
    }
    check_cap(instance, cap, "modular solution count")?;
    let residues = weight_residues(instance, m);
    let t_mod = reduce(instance.target(), m);
    let mut count = 0u64;
    for_each_combination(instance.n(), instance.ell(), |idxs| {
        let mut acc = 0u64;
        for &i in idxs {
            acc = (acc + residues[i]) % m;
        }
        if acc == t_mod {
            count += 1;
        }
        false
    });
    Ok(count)
}

/// Enumerates every weight-`ell` modular solution. Only intended for small
/// instances where the full list fits comfortably in memory; used as the
/// reference set for the oracle uniformity experiments.
pub fn find_modular_solutions(instance: &Instance, m: u64, cap: u64) -> Result<Vec<SolutionVector>> {
    if m == 0 {
        return Err(Error::Input("modulus must be at least 1".into()));
    }
    check_cap(instance, cap, "modular solution enumeration")?;
    let residues = weight_residues(instance, m);
    let t_mod = reduce(instance.target(), m);
    let mut found = Vec::new();
    for_each_combination(instance.n(), instance.ell(), |idxs| {
        let mut acc = 0u64;
        for &i in idxs {
            acc = (acc + residues[i]) % m;
        }
        if acc == t_mod {
            found.push(SolutionVector::from_indices(instance.n(), idxs));
        }
        false
    });
    Ok(found)
}

pub(crate) fn weight_residues(instance: &Instance, m: u64) -> Vec<u64> {
    instance.weights().iter().map(|w| reduce(w, m)).collect()
}

pub(crate) fn reduce(x: &BigUint, m: u64) -> u64 {
    (x % m).to_u64().expect("residue fits")
}
