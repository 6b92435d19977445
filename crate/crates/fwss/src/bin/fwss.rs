//! Command line front end: instance generation and I/O, solver dispatch,
//! solution verification, and the experiment sweep.
//!
//! Exit codes: 0 success / solution found, 1 no solution, 2 usage error,
//! 3 resource limit or I/O failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fwss::bench::{run_no_experiment, run_success_experiment, render_csv, ExperimentSpec};
use fwss::brute::brute_force;
use fwss::instance::{gen_instance, is_solution};
use fwss::kset::{solve_kset, solve_kset_parallel, KsetConfig, SolveMode, ValidationMode};
use fwss::ss4::{solve_mitm2, solve_ss4, DivisionSource, SearchLimits};
use fwss::{Error, Instance, Result, RngHandle, SolutionVector};

#[derive(Parser)]
#[command(
    name = "fwss",
    version,
    about = "Fixed weight subset sum solvers and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Algo {
    Brute,
    Mitm2,
    Ss4,
    Kset,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fixed,
    Unrestricted,
}

impl From<Mode> for SolveMode {
    fn from(mode: Mode) -> SolveMode {
        match mode {
            Mode::Fixed => SolveMode::FixedWeight,
            Mode::Unrestricted => SolveMode::Unrestricted,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        /// Integer density n / log2(max weight).
        #[arg(long, default_value_t = 0.9)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw the target uniformly instead of planting a solution.
        #[arg(long)]
        unplanted: bool,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance file with a chosen algorithm, printing a JSON report.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        /// Sample divisions at random instead of the deterministic stream
        /// (mitm2 / ss4).
        #[arg(long)]
        random_divisions: bool,
        /// Cap on divisions tried (mitm2 / ss4).
        #[arg(long)]
        max_divisions: Option<u64>,
        /// Lists per oracle invocation (kset).
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Modulus as a power of two: m = 2^bits (kset).
        #[arg(long)]
        m_bits: Option<u32>,
        /// Modulus via modular density: m = 2^floor(n / dm) (kset).
        #[arg(long)]
        dm: Option<f64>,
        /// List oversize factor (kset).
        #[arg(long, default_value_t = 4)]
        alpha: u32,
        #[arg(long)]
        max_iters: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = Mode::Fixed)]
        mode: Mode,
        /// Enforce the theorem hypotheses instead of the experimental regime.
        #[arg(long)]
        strict: bool,
        /// Accept any-weight integer solutions in unrestricted mode.
        #[arg(long)]
        accept_any_weight: bool,
        /// Fail instead of clamping when a block cannot fill its list.
        #[arg(long)]
        strict_lists: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the (k, d_m) experiment sweep and write a CSV table.
    Bench {
        #[arg(long)]
        n: usize,
        /// Planted solution weight; n/2 when omitted.
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long, default_value_t = 0.9)]
        density: f64,
        /// Comma-separated k values from {2, 4, 8}.
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        k: Vec<usize>,
        /// Comma-separated modular densities.
        #[arg(long, value_delimiter = ',', default_value = "1.5,2")]
        dm: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        alpha: u32,
        #[arg(long, value_enum, default_value_t = Mode::Unrestricted)]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Wall-clock budget per cell in seconds.
        #[arg(long, default_value_t = 600)]
        cell_budget_s: u64,
        /// Tabulate success rates and times instead of oracle-success counts
        /// (both sweeps share the same CSV columns).
        #[arg(long)]
        success: bool,
        /// Run cells on separate threads; timings become unreliable.
        #[arg(long)]
        parallel_cells: bool,
        /// Prepend '#' metadata comments recording ell, alpha, seed, mode.
        #[arg(long)]
        meta: bool,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a solution bit string against an instance file.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// Solution as a '0'/'1' string of length n.
        #[arg(long)]
        x: String,
    },
}

#[derive(Serialize)]
struct BruteReport {
    algorithm: &'static str,
    n: usize,
    ell: usize,
    solution: Option<SolutionVector>,
    elapsed_ms: u64,
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serialization"));
}

fn solution_exit<T>(solution: &Option<T>) -> i32 {
    if solution.is_some() {
        0
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen { n, ell, density, seed, unplanted, out } => {
            let instance = gen_instance(n, ell, density, RngHandle::new(seed), !unplanted)?;
            match out {
                Some(path) => instance.write_file(path)?,
                None => println!("{}", instance.to_json()),
            }
            Ok(0)
        }
        Command::Solve {
            instance,
            algo,
            random_divisions,
            max_divisions,
            k,
            m_bits,
            dm,
            alpha,
            max_iters,
            workers,
            mode,
            strict,
            accept_any_weight,
            strict_lists,
            seed,
        } => {
            let instance = Instance::read_file(instance)?;
            let limits = SearchLimits { max_divisions };
            let source = if random_divisions {
                DivisionSource::Random(RngHandle::new(seed))
            } else {
                DivisionSource::Deterministic
            };
            match algo {
                Algo::Brute => {
                    let start = Instant::now();
                    let solution = brute_force(&instance)?;
                    let report = BruteReport {
                        algorithm: "brute",
                        n: instance.n(),
                        ell: instance.ell(),
                        solution,
                        elapsed_ms: start.elapsed().as_millis() as u64,
                    };
                    print_json(&report);
                    Ok(solution_exit(&report.solution))
                }
                Algo::Mitm2 => {
                    let report = solve_mitm2(&instance, source, limits)?;
                    print_json(&report);
                    Ok(solution_exit(&report.solution))
                }
                Algo::Ss4 => {
                    let report = solve_ss4(&instance, source, limits)?;
                    print_json(&report);
                    Ok(solution_exit(&report.solution))
                }
                Algo::Kset => {
                    let m = match (m_bits, dm) {
                        (Some(bits), _) => 1u64
                            .checked_shl(bits)
                            .filter(|&m| m >= 2)
                            .ok_or_else(|| Error::Input(format!("bad m-bits {bits}")))?,
                        (None, Some(dm)) => {
                            let bits = (instance.n() as f64 / dm).floor();
                            if !(1.0..63.0).contains(&bits) {
                                return Err(Error::Input(format!("d_m = {dm} gives no modulus")));
                            }
                            1u64 << bits as u32
                        }
                        (None, None) => {
                            return Err(Error::Input(
                                "kset needs --m-bits or --dm to fix the modulus".into(),
                            ))
                        }
                    };
                    let mut config = KsetConfig::new(k, m);
                    config.alpha = alpha;
                    config.max_iterations = max_iters;
                    config.mode = mode.into();
                    config.validation_mode = if strict {
                        ValidationMode::Strict
                    } else {
                        ValidationMode::Experimental
                    };
                    config.workers = workers;
                    config.accept_any_weight = accept_any_weight;
                    config.allow_short_lists = !strict_lists;
                    let handle = RngHandle::new(seed);
                    let report = if workers > 1 {
                        solve_kset_parallel(&instance, &config, handle)?
                    } else {
                        solve_kset(&instance, &config, handle)?
                    };
                    print_json(&report);
                    Ok(solution_exit(&report.solution))
                }
            }
        }
        Command::Bench {
            n,
            ell,
            density,
            k,
            dm,
            trials,
            seed,
            alpha,
            mode,
            workers,
            cell_budget_s,
            success,
            parallel_cells,
            meta,
            out,
        } => {
            let mut spec = ExperimentSpec::new(n, k, dm);
            spec.ell = ell;
            spec.integer_density = density;
            spec.trials = trials;
            spec.seed = seed;
            spec.alpha = alpha;
            spec.mode = mode.into();
            spec.workers = workers;
            spec.cell_budget = Duration::from_secs(cell_budget_s);
            let rows = if parallel_cells {
                run_cells_parallel(&spec, success)?
            } else if success {
                run_success_experiment(&spec)?
            } else {
                run_no_experiment(&spec)?
            };
            let mut text = String::new();
            if meta {
                text.push_str(&spec.metadata_comments());
            }
            text.push_str(&render_csv(&rows));
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Verify { instance, x } => {
            let instance = Instance::read_file(instance)?;
            let x: SolutionVector = x.parse()?;
            if is_solution(&instance, &x)? {
                println!("valid");
                Ok(0)
            } else {
                println!("invalid");
                Ok(1)
            }
        }
    }
}

/// One thread per (k, d_m) cell; rows come back in sweep order.
fn run_cells_parallel(spec: &ExperimentSpec, success: bool) -> Result<Vec<fwss::bench::ExperimentRow>> {
    let mut cells = Vec::new();
    for &k in &spec.k_values {
        for &dm in &spec.dm_values {
            let mut single = spec.clone();
            single.k_values = vec![k];
            single.dm_values = vec![dm];
            cells.push(single);
        }
    }
    let results: Vec<Result<Vec<fwss::bench::ExperimentRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|cell| {
                scope.spawn(move || {
                    if success {
                        run_success_experiment(cell)
                    } else {
                        run_no_experiment(cell)
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("cell thread panicked")).collect()
    });
    let mut rows = Vec::new();
    for result in results {
        rows.extend(result?);
    }
    Ok(rows)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FWSS_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    std::process::exit(code);
}
