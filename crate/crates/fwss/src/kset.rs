//! The k-set driver: validates the (m, k) regime, then loops
//! division -> randomizers -> lists -> oracle -> integer check until a
//! verified solution appears or the iteration budget runs out. A parallel
//! variant runs the same loop on independent streams, first verified
//! solution wins.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::brute::reduce;
use crate::combin::{binomial, binomial_f64};
use crate::error::{Error, Result};
use crate::instance::{complement_transform, evaluate, is_solution, Instance, SolutionVector};
use crate::rng::RngHandle;
use crate::splitting::{random_blocks_rng, random_division_rng, Division, SplitParams};
use crate::wagner::{
    apply_randomizers, build_lists_with, oracle, ListMode, ModParams, RandomizerSet,
};

/// Which inequalities gate a run: the theorem hypotheses as hard errors, or
/// the experimental sweep regime where everything is reported but only
/// impossibilities stop the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Strict,
    Experimental,
}

/// Whether list elements are weight-mandated subsets or arbitrary subsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    FixedWeight,
    Unrestricted,
}

impl SolveMode {
    fn as_str(&self) -> &'static str {
        match self {
            SolveMode::FixedWeight => "fixed_weight",
            SolveMode::Unrestricted => "unrestricted",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KsetConfig {
    pub k: usize,
    pub m: u64,
    pub alpha: u32,
    pub cap_factor: u32,
    pub max_iterations: Option<u64>,
    pub validation_mode: ValidationMode,
    pub mode: SolveMode,
    pub workers: usize,
    /// Mirror the problem to weight n - ell when ell > n/2.
    pub use_complement: bool,
    /// In unrestricted mode, accept any integer solution instead of only
    /// weight-ell ones. Off by default so every returned solution passes
    /// the full check.
    pub accept_any_weight: bool,
    /// Let a block that cannot supply a full list contribute every subset
    /// it has instead of failing; how the starved sweep cells run.
    pub allow_short_lists: bool,
}

impl KsetConfig {
    pub fn new(k: usize, m: u64) -> Self {
        Self {
            k,
            m,
            alpha: 4,
            cap_factor: 8,
            max_iterations: None,
            validation_mode: ValidationMode::Strict,
            mode: SolveMode::FixedWeight,
            workers: 1,
            use_complement: true,
            accept_any_weight: false,
            allow_short_lists: false,
        }
    }

    fn mod_params(&self) -> Result<ModParams> {
        ModParams::with_cap_factor(self.m, self.k, self.alpha, self.cap_factor)
    }

    fn list_mode(&self) -> ListMode {
        match self.mode {
            SolveMode::FixedWeight => ListMode::FixedWeight,
            SolveMode::Unrestricted => ListMode::Unrestricted,
        }
    }
}

/// Outcome of parameter validation: each violated inequality spelled out
/// with both sides, plus advisory warnings that do not stop a run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        self.violations.join("; ")
    }
}

/// Checks the mode-dependent inequalities on (n, ell, m, k). Strict mode
/// enforces the theorem hypotheses; experimental mode downgrades the regime
/// checks to warnings, since the sweep deliberately leaves the theorem's
/// territory.
pub fn validate_params(n: usize, ell: usize, config: &KsetConfig) -> Diagnostics {
    let mut d = Diagnostics::default();
    let k = config.k;
    let m = config.m;
    if k < 2 || !k.is_power_of_two() {
        d.violations.push(format!("k must be a power of two >= 2: k = {k}"));
        return d;
    }
    if m < 2 {
        d.violations.push(format!("modulus must be at least 2: m = {m}"));
        return d;
    }
    let levels = k.trailing_zeros() as u32;
    let log2m = (m as f64).log2();
    let log_floor = 2.0 * (levels as f64) * (levels as f64);

    let theorem_log = log2m >= log_floor;
    let log_text = format!(
        "log2 m >= 2 (log2 k)^2: log2 {m} = {log2m:.3} vs 2 * {levels}^2 = {log_floor}"
    );

    match config.mode {
        SolveMode::FixedWeight => {
            let c = binomial((n / k) as u64, (ell / k) as u64);
            let c_text = format!("C({}, {}) = {c}", n / k, ell / k);
            match config.validation_mode {
                ValidationMode::Strict => {
                    if BigUint::from(m) >= c {
                        d.violations.push(format!("m < C(n/k, ell/k) fails: m = {m} vs {c_text}"));
                    }
                    if !theorem_log {
                        d.violations.push(format!("{log_text} fails"));
                    }
                }
                ValidationMode::Experimental => {
                    let ceiling = c.pow(levels + 1);
                    if BigUint::from(m) > ceiling {
                        d.warnings.push(format!(
                            "m = {m} exceeds {c_text}^(log2 k + 1) = {ceiling}; \
                             blocks cannot fill their lists"
                        ));
                    }
                    if BigUint::from(m) >= c && !c.is_zero() {
                        d.warnings.push(format!(
                            "m = {m} >= {c_text}: outside the theorem regime"
                        ));
                    }
                    if !theorem_log {
                        d.warnings.push(log_text.clone());
                    }
                }
            }
        }
        SolveMode::Unrestricted => {
            let block_bits = (n / k) as f64;
            match config.validation_mode {
                ValidationMode::Strict => {
                    if log2m >= block_bits {
                        d.violations.push(format!(
                            "m < 2^(n/k) fails: log2 {m} = {log2m:.3} vs n/k = {block_bits}"
                        ));
                    }
                    if !theorem_log {
                        d.violations.push(format!("{log_text} fails"));
                    }
                }
                ValidationMode::Experimental => {
                    if log2m > block_bits * (levels as f64 + 1.0) {
                        d.warnings.push(format!(
                            "log2 m = {log2m:.3} exceeds (n/k)(log2 k + 1) = {}; \
                             blocks cannot fill their lists",
                            block_bits * (levels as f64 + 1.0)
                        ));
                    }
                    if !theorem_log {
                        d.warnings.push(log_text.clone());
                    }
                }
            }
        }
    }

    // The conjectured usefulness boundary.
    let dm = n as f64 / log2m;
    let floor = k as f64 / (levels as f64 + 1.0);
    if dm < floor {
        d.warnings.push(format!(
            "modular density {dm:.3} is below the conjectured boundary k/(log2 k + 1) = {floor:.3}; \
             the oracle will rarely succeed"
        ));
    }
    d
}

/// Counters from one driver run.
#[derive(Clone, Debug, Serialize)]
pub struct KsetReport {
    pub algorithm: String,
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    pub m: u64,
    pub alpha: u32,
    pub mode: String,
    pub workers: usize,
    pub solution: Option<SolutionVector>,
    pub iterations: u64,
    pub oracle_successes: u64,
    pub divisions_sampled: u64,
    pub elapsed_ms: u64,
    pub expected_no: f64,
    pub complemented: bool,
    pub seed: RngHandle,
}

/// Expected number of oracle successes before the integer solution shows up:
/// the solution is one of roughly C(n, ell)/m (fixed weight) or 2^n/m
/// (unrestricted) modular solutions.
pub fn expected_oracle_successes(n: usize, ell: usize, m: u64, mode: SolveMode) -> f64 {
    match mode {
        SolveMode::FixedWeight => binomial_f64(n as u64, ell as u64) / m as f64,
        SolveMode::Unrestricted => (n as f64).exp2() / m as f64,
    }
}

struct LoopOutcome {
    solution: Option<SolutionVector>,
    iterations: u64,
    oracle_successes: u64,
    divisions_sampled: u64,
    late_starts: u64,
}

/// The driver loop on the effective (possibly complemented) instance.
fn run_loop(
    instance: &Instance,
    config: &KsetConfig,
    params: &ModParams,
    split: Option<&SplitParams>,
    expected_no: f64,
    handle: RngHandle,
    stop: Option<&AtomicBool>,
) -> Result<LoopOutcome> {
    let mut rng = handle.rng();
    let mut out = LoopOutcome {
        solution: None,
        iterations: 0,
        oracle_successes: 0,
        divisions_sampled: 0,
        late_starts: 0,
    };
    let n = instance.n();
    let k = config.k;
    let m = config.m;
    let t_mod = reduce(instance.target(), m);

    loop {
        if let Some(stop) = stop {
            if stop.load(Ordering::Relaxed) {
                // Contract: no iteration starts once the flag is visible.
                break;
            }
        }
        match config.max_iterations {
            Some(budget) => {
                if out.iterations >= budget {
                    break;
                }
            }
            None => {
                // Adaptive budget: 16 E[N_o] / success-rate, re-estimated from
                // the counters after a 100-iteration warmup, with the rate
                // floored so a dead oracle still terminates.
                if out.iterations >= 100 {
                    let rate =
                        (out.oracle_successes as f64 / out.iterations as f64).max(0.01);
                    let budget = (16.0 * expected_no / rate).ceil().max(100.0) as u64;
                    if out.iterations >= budget {
                        break;
                    }
                }
            }
        }

        let division = match split {
            Some(split) => random_division_rng(split, &mut rng),
            None => Division::new(random_blocks_rng(n, k, &mut rng), vec![0; k])
                .expect("random blocks always partition"),
        };
        out.divisions_sampled += 1;
        out.iterations += 1;

        let randomizers = RandomizerSet::generate(k, m, &mut rng);
        let mut lists = build_lists_with(
            instance,
            &division,
            params,
            &mut rng,
            config.list_mode(),
            config.allow_short_lists,
        )?;
        apply_randomizers(&mut lists, &randomizers, params)?;
        let run = oracle(&lists, params, &mut rng);

        let Some(parts) = run.solution else { continue };
        out.oracle_successes += 1;

        let ones: Vec<usize> = parts.iter().flat_map(|s| s.indices.iter().copied()).collect();
        let x = SolutionVector::from_indices(n, &ones);
        let sum = evaluate(instance, &x).expect("reconstructed vector has length n");
        assert_eq!(
            reduce(&sum, m),
            t_mod,
            "modular oracle output does not reconstruct to t mod m"
        );

        if sum != *instance.target() {
            continue;
        }
        let weight_ok = x.weight() == instance.ell();
        if !weight_ok && !(config.mode == SolveMode::Unrestricted && config.accept_any_weight) {
            continue;
        }
        if weight_ok {
            assert!(
                is_solution(instance, &x).expect("length checked"),
                "kset driver accepted an invalid solution"
            );
        }
        out.solution = Some(x);
        break;
    }
    Ok(out)
}

fn prepare(
    instance: &Instance,
    config: &KsetConfig,
) -> Result<Option<(Instance, bool, ModParams, Option<SplitParams>, f64)>> {
    // Degenerate weights first: the all-ones and all-zeros problems have a
    // single candidate each.
    if instance.ell() == instance.n() || instance.ell() == 0 {
        return Ok(None);
    }
    let complemented = config.use_complement
        && instance.ell() > instance.n() / 2
        && *instance.target() <= instance.weight_sum();
    let effective =
        if complemented { complement_transform(instance)? } else { instance.clone() };

    let diagnostics = validate_params(effective.n(), effective.ell(), config);
    for warning in &diagnostics.warnings {
        log::warn!("kset: {warning}");
    }
    if !diagnostics.is_ok() {
        return Err(Error::Parameter(diagnostics.summary()));
    }

    let params = config.mod_params()?;
    let split = match config.mode {
        SolveMode::FixedWeight => {
            Some(SplitParams::new(effective.n(), effective.ell(), config.k)?)
        }
        SolveMode::Unrestricted => None,
    };
    let expected_no =
        expected_oracle_successes(effective.n(), effective.ell(), config.m, config.mode);
    Ok(Some((effective, complemented, params, split, expected_no)))
}

fn degenerate_report(
    instance: &Instance,
    config: &KsetConfig,
    handle: RngHandle,
    start: Instant,
) -> KsetReport {
    let want: BigUint = if instance.ell() == instance.n() {
        instance.weight_sum()
    } else {
        BigUint::zero()
    };
    let solution = (want == *instance.target()).then(|| {
        SolutionVector::from_bits(vec![instance.ell() == instance.n(); instance.n()])
    });
    report_from(instance, config, handle, solution, 0, 0, 0, false, start)
}

#[allow(clippy::too_many_arguments)]
fn report_from(
    instance: &Instance,
    config: &KsetConfig,
    seed: RngHandle,
    solution: Option<SolutionVector>,
    iterations: u64,
    oracle_successes: u64,
    divisions_sampled: u64,
    complemented: bool,
    start: Instant,
) -> KsetReport {
    KsetReport {
        algorithm: "kset".into(),
        n: instance.n(),
        ell: instance.ell(),
        k: config.k,
        m: config.m,
        alpha: config.alpha,
        mode: config.mode.as_str().into(),
        workers: config.workers,
        solution,
        iterations,
        oracle_successes,
        divisions_sampled,
        elapsed_ms: start.elapsed().as_millis() as u64,
        expected_no: expected_oracle_successes(instance.n(), instance.ell(), config.m, config.mode),
        complemented,
        seed,
    }
}

/// Serial driver. Returns a report whether or not a solution was found; the
/// iteration budget running out is a normal outcome with full counters.
pub fn solve_kset(instance: &Instance, config: &KsetConfig, handle: RngHandle) -> Result<KsetReport> {
    let start = Instant::now();
    let Some((effective, complemented, params, split, expected_no)) =
        prepare(instance, config)?
    else {
        return Ok(degenerate_report(instance, config, handle, start));
    };
    let out =
        run_loop(&effective, config, &params, split.as_ref(), expected_no, handle, None)?;
    let solution = out.solution.map(|x| if complemented { x.complemented() } else { x });
    if let Some(x) = &solution {
        if !(config.mode == SolveMode::Unrestricted && config.accept_any_weight) {
            assert!(is_solution(instance, x).expect("length checked"), "solution lost in mapping");
        }
    }
    Ok(report_from(
        instance,
        config,
        handle,
        solution,
        out.iterations,
        out.oracle_successes,
        out.divisions_sampled,
        complemented,
        start,
    ))
}

/// Parallel driver: `config.workers` independent loops on split streams
/// sharing one stop flag; the first verified solution wins and the counters
/// of all workers are summed. Worker 0 runs the same stream the serial
/// driver would, so `workers = 1` reproduces [`solve_kset`] exactly.
pub fn solve_kset_parallel(
    instance: &Instance,
    config: &KsetConfig,
    handle: RngHandle,
) -> Result<KsetReport> {
    if config.workers == 0 {
        return Err(Error::Parameter("worker count must be at least 1".into()));
    }
    let start = Instant::now();
    let Some((effective, complemented, params, split, expected_no)) =
        prepare(instance, config)?
    else {
        return Ok(degenerate_report(instance, config, handle, start));
    };

    let stop = AtomicBool::new(false);
    let winner: Mutex<Option<SolutionVector>> = Mutex::new(None);
    let outcomes: Mutex<Vec<LoopOutcome>> = Mutex::new(Vec::new());
    let mut first_error: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for worker in 0..config.workers {
            let worker_handle =
                if worker == 0 { handle } else { handle.split(worker as u64) };
            let effective = &effective;
            let params = &params;
            let split = split.as_ref();
            let stop = &stop;
            let winner = &winner;
            let outcomes = &outcomes;
            let first_error = &first_error;
            scope.spawn(move || {
                match run_loop(effective, config, params, split, expected_no, worker_handle, Some(stop))
                {
                    Ok(out) => {
                        if out.solution.is_some() {
                            let mut slot = winner.lock().unwrap();
                            if slot.is_none() {
                                *slot = out.solution.clone();
                            }
                            stop.store(true, Ordering::Relaxed);
                        }
                        outcomes.lock().unwrap().push(out);
                    }
                    Err(err) => {
                        let mut slot = first_error.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(err);
                        }
                        stop.store(true, Ordering::Relaxed);
                    }
                }
            });
        }
    });

    if let Some(err) = first_error.get_mut().unwrap().take() {
        return Err(err);
    }
    let outcomes = outcomes.into_inner().unwrap();
    let late_starts: u64 = outcomes.iter().map(|o| o.late_starts).sum();
    assert_eq!(late_starts, 0, "a worker kept iterating after the stop flag");
    let solution = winner
        .into_inner()
        .unwrap()
        .map(|x| if complemented { x.complemented() } else { x });
    if let Some(x) = &solution {
        if !(config.mode == SolveMode::Unrestricted && config.accept_any_weight) {
            assert!(is_solution(instance, x).expect("length checked"), "solution lost in mapping");
        }
    }
    Ok(report_from(
        instance,
        config,
        handle,
        solution,
        outcomes.iter().map(|o| o.iterations).sum(),
        outcomes.iter().map(|o| o.oracle_successes).sum(),
        outcomes.iter().map(|o| o.divisions_sampled).sum(),
        complemented,
        start,
    ))
}
