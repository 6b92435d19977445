//! Problem instances: `n` positive arbitrary-precision weights, a target `t`,
//! and a prescribed Hamming weight `ell` for candidate solutions.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combin::binomial;
use crate::error::{Error, Result};
use crate::rng::RngHandle;

/// A fixed weight subset sum instance. Immutable after construction and safe
/// to share across threads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct Instance {
    n: usize,
    ell: usize,
    weights: Vec<BigUint>,
    target: BigUint,
}

impl Instance {
    /// Builds an instance, checking that every weight is at least one and
    /// that `ell <= n`. Weight zero only arises through
    /// [`complement_transform`] of a full-weight problem; it is permitted so
    /// the complement stays an involution. Infeasible targets are allowed:
    /// solvers simply report no solution.
    pub fn new(weights: Vec<BigUint>, ell: usize, target: BigUint) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Input("instance needs at least one weight".into()));
        }
        if weights.iter().any(|w| w.is_zero()) {
            return Err(Error::Input("weights must be positive".into()));
        }
        if ell > weights.len() {
            return Err(Error::Input(format!(
                "ell = {} exceeds the number of weights {}",
                ell,
                weights.len()
            )));
        }
        Ok(Self { n: weights.len(), ell, weights, target })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn weights(&self) -> &[BigUint] {
        &self.weights
    }

    pub fn target(&self) -> &BigUint {
        &self.target
    }

    pub fn weight_sum(&self) -> BigUint {
        self.weights.iter().sum()
    }

    pub fn max_weight(&self) -> &BigUint {
        self.weights.iter().max().expect("nonempty by construction")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_json() + "\n")?)
    }
}

/// On-disk form: decimal strings keep the weights arbitrary precision.
/// Unknown fields are rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    n: usize,
    ell: usize,
    t: String,
    a: Vec<String>,
}

impl TryFrom<InstanceJson> for Instance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        if raw.a.len() != raw.n {
            return Err(Error::Input(format!(
                "field n = {} disagrees with {} weights",
                raw.n,
                raw.a.len()
            )));
        }
        let parse = |s: &str| {
            BigUint::from_str(s).map_err(|_| Error::Input(format!("bad decimal integer: {s:?}")))
        };
        let weights = raw.a.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        let target = parse(&raw.t)?;
        Instance::new(weights, raw.ell, target)
    }
}

impl From<Instance> for InstanceJson {
    fn from(inst: Instance) -> Self {
        InstanceJson {
            n: inst.n,
            ell: inst.ell,
            t: inst.target.to_string(),
            a: inst.weights.iter().map(|w| w.to_string()).collect(),
        }
    }
}

/// A candidate solution: a bit per index. Serialized as a '0'/'1' string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SolutionVector(Vec<bool>);

impl SolutionVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// All-zero vector of length `n` with the given indices set.
    pub fn from_indices(n: usize, ones: &[usize]) -> Self {
        let mut bits = vec![false; n];
        for &i in ones {
            bits[i] = true;
        }
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }

    /// Bitwise complement, mapping solutions of a problem to solutions of its
    /// complement transform.
    pub fn complemented(&self) -> Self {
        Self(self.0.iter().map(|&b| !b).collect())
    }
}

impl fmt::Display for SolutionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SolutionVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Input(format!("bad solution bit {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(Self)
    }
}

impl TryFrom<String> for SolutionVector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SolutionVector> for String {
    fn from(x: SolutionVector) -> String {
        x.to_string()
    }
}

/// Density statistics of an instance; the modular fields are present only
/// when a modulus is supplied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modular_density: Option<f64>,
    pub information_density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modular_information_density: Option<f64>,
    pub pseudo_density: f64,
}

/// Double-precision base-2 logarithm of an arbitrary-precision integer,
/// computed from the top 53 bits plus the bit length.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().expect("53 bits fit in f64");
    top.log2() + shift as f64
}

/// Evaluates `sum a_i x_i` over the integers.
pub fn evaluate(instance: &Instance, x: &SolutionVector) -> Result<BigUint> {
    if x.len() != instance.n() {
        return Err(Error::Input(format!(
            "solution length {} does not match n = {}",
            x.len(),
            instance.n()
        )));
    }
    Ok(x.ones().map(|i| &instance.weights()[i]).sum())
}

/// True iff `x` has weight `ell` and hits the target exactly.
pub fn is_solution(instance: &Instance, x: &SolutionVector) -> Result<bool> {
    Ok(x.weight() == instance.ell() && evaluate(instance, x)? == *instance.target())
}

/// Density statistics; `m` adds the modular variants.
pub fn densities(instance: &Instance, m: Option<u64>) -> Result<DensityReport> {
    if let Some(m) = m {
        if m < 2 {
            return Err(Error::Input(format!("modulus must be at least 2, got {m}")));
        }
    }
    let n = instance.n() as f64;
    let log_a = log2_biguint(instance.max_weight());
    let log_binom = log2_biguint(&binomial(instance.n() as u64, instance.ell() as u64));
    let log_m = m.map(|m| (m as f64).log2());
    Ok(DensityReport {
        density: n / log_a,
        modular_density: log_m.map(|lm| n / lm),
        information_density: log_binom / log_a,
        modular_information_density: log_m.map(|lm| log_binom / lm),
        pseudo_density: instance.ell() as f64 * n.log2() / log_a,
    })
}

/// Draws a fresh instance. Weights are uniform over `[1, 2^ceil(n/density)]`.
/// Planted instances take the target from a uniformly random weight-`ell`
/// solution, guaranteeing feasibility; otherwise the target is uniform over
/// `[1, ell * max_weight]`, which covers every achievable sum.
pub fn gen_instance(
    n: usize,
    ell: usize,
    density: f64,
    handle: RngHandle,
    planted: bool,
) -> Result<Instance> {
    if n == 0 || ell == 0 || ell > n {
        return Err(Error::Input(format!("need 1 <= ell <= n, got n = {n}, ell = {ell}")));
    }
    if !(density > 0.0) {
        return Err(Error::Input(format!("density must be positive, got {density}")));
    }
    let mut rng = handle.rng();
    let exponent = (n as f64 / density).ceil() as u64;
    let bound = BigUint::one() << exponent;
    let upper = &bound + 1u32; // gen range is half-open
    let one = BigUint::one();
    let weights: Vec<BigUint> = (0..n).map(|_| rng.gen_biguint_range(&one, &upper)).collect();

    let target = if planted {
        let chosen = rand::seq::index::sample(&mut rng, n, ell);
        chosen.iter().map(|i| &weights[i]).sum()
    } else {
        let max = weights.iter().max().expect("n >= 1");
        let hi = max * ell + 1u32;
        rng.gen_biguint_range(&one, &hi)
    };
    Instance::new(weights, ell, target)
}

/// Swaps the problem for its mirror: choose the `n - ell` weights left out,
/// targeting `sum(a) - t`. A solution of the transform maps back through
/// [`SolutionVector::complemented`].
pub fn complement_transform(instance: &Instance) -> Result<Instance> {
    let total = instance.weight_sum();
    if *instance.target() > total {
        return Err(Error::Input(format!(
            "target {} exceeds the weight sum {}, complement target would be negative",
            instance.target(),
            total
        )));
    }
    Instance::new(
        instance.weights().to_vec(),
        instance.n() - instance.ell(),
        total - instance.target(),
    )
}
