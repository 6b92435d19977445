//! Experiment harness: sweeps (k, d_m) cells, each cell solving freshly
//! planted instances with the k-set driver, and tabulates oracle-success
//! counts against their closed-form expectations plus success rates and
//! wall times, as CSV.

use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::gen_instance;
use crate::kset::{solve_kset, solve_kset_parallel, KsetConfig, SolveMode, ValidationMode};
use crate::rng::RngHandle;

/// One sweep: every k in `k_values` crossed with every modular density in
/// `dm_values`, `trials` fresh planted instances per cell.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub n: usize,
    /// Planted solution weight; defaults to n/2 when absent (the sweep's
    /// reference experiments never state it).
    pub ell: Option<usize>,
    pub integer_density: f64,
    pub k_values: Vec<usize>,
    pub dm_values: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
    pub mode: SolveMode,
    pub alpha: u32,
    pub workers: usize,
    /// Wall-clock ceiling per cell; a cell that runs over is emitted with
    /// however many trials completed.
    pub cell_budget: Duration,
    /// Starved cells (lists clamped to whatever subsets exist) still run;
    /// that regime is part of the sweep.
    pub allow_short_lists: bool,
}

impl ExperimentSpec {
    pub fn new(n: usize, k_values: Vec<usize>, dm_values: Vec<f64>) -> Self {
        Self {
            n,
            ell: None,
            integer_density: 0.9,
            k_values,
            dm_values,
            trials: 10,
            seed: 0,
            mode: SolveMode::Unrestricted,
            alpha: 4,
            workers: 1,
            cell_budget: Duration::from_secs(600),
            allow_short_lists: true,
        }
    }

    pub fn planted_weight(&self) -> usize {
        self.ell.unwrap_or(self.n / 2)
    }

    /// Modulus for a cell: 2^floor(n / d_m).
    pub fn cell_modulus(&self, dm: f64) -> u64 {
        1u64 << ((self.n as f64 / dm).floor() as u32)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Input("at least one trial per cell".into()));
        }
        if self.k_values.is_empty() || self.dm_values.is_empty() {
            return Err(Error::Input("empty k or d_m list".into()));
        }
        for &k in &self.k_values {
            if !matches!(k, 2 | 4 | 8) {
                return Err(Error::Input(format!("k values must be in {{2, 4, 8}}, got {k}")));
            }
        }
        for &dm in &self.dm_values {
            if !(dm > 0.0) || (self.n as f64 / dm) >= 63.0 {
                return Err(Error::Input(format!("d_m = {dm} gives an unusable modulus")));
            }
        }
        let ell = self.planted_weight();
        if ell == 0 || ell > self.n {
            return Err(Error::Input(format!("planted weight {ell} out of range")));
        }
        Ok(())
    }

    /// Comment block recording the knobs the reference tables never state.
    pub fn metadata_comments(&self) -> String {
        format!(
            "# n={} ell={} integer_density={} mode={} alpha={} trials={} seed={} workers={}\n",
            self.n,
            self.planted_weight(),
            self.integer_density,
            match self.mode {
                SolveMode::FixedWeight => "fixed",
                SolveMode::Unrestricted => "unrestricted",
            },
            self.alpha,
            self.trials,
            self.seed,
            self.workers,
        )
    }
}

/// One sweep cell's aggregates.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRow {
    pub k: usize,
    pub d_m: f64,
    pub mean_no: f64,
    pub expected_no: f64,
    pub success_pct: f64,
    pub mean_time_s: f64,
    pub trials: u32,
}

/// Runs the sweep and reports mean oracle-success counts against the
/// closed-form expectation per cell.
pub fn run_no_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    run_cells(spec)
}

/// Runs the sweep and reports oracle success rates and mean solve times per
/// cell. Same cells and counters as [`run_no_experiment`]; the two views
/// share one row shape.
pub fn run_success_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    run_cells(spec)
}

fn run_cells(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    let ell = spec.planted_weight();
    let mut rows = Vec::new();
    for &k in &spec.k_values {
        for &dm in &spec.dm_values {
            let m = spec.cell_modulus(dm);
            let mut config = KsetConfig::new(k, m);
            config.alpha = spec.alpha;
            config.mode = spec.mode;
            config.validation_mode = ValidationMode::Experimental;
            config.allow_short_lists = spec.allow_short_lists;
            config.workers = spec.workers;

            // Streams derive from the cell's values, not its position, so a
            // sweep split across threads draws the same instances.
            let cell_handle = RngHandle::new(spec.seed).split(k as u64).split(dm.to_bits());

            let cell_start = Instant::now();
            let mut completed = 0u32;
            let mut total_no = 0u64;
            let mut total_iterations = 0u64;
            let mut total_successes = 0u64;
            let mut total_time = Duration::ZERO;
            let mut expected_no = 0.0;
            for trial in 0..spec.trials {
                if completed > 0 && cell_start.elapsed() > spec.cell_budget {
                    log::warn!(
                        "cell k={k} d_m={dm}: budget exhausted after {completed} trials"
                    );
                    break;
                }
                let instance = gen_instance(
                    spec.n,
                    ell,
                    spec.integer_density,
                    cell_handle.split(2 * trial as u64),
                    true,
                )?;
                let solver_handle = cell_handle.split(2 * trial as u64 + 1);
                let solve_start = Instant::now();
                let report = if spec.workers > 1 {
                    solve_kset_parallel(&instance, &config, solver_handle)?
                } else {
                    solve_kset(&instance, &config, solver_handle)?
                };
                total_time += solve_start.elapsed();
                total_no += report.oracle_successes;
                total_iterations += report.iterations;
                total_successes += report.oracle_successes;
                expected_no = report.expected_no;
                completed += 1;
                if report.solution.is_none() {
                    log::warn!("cell k={k} d_m={dm} trial {trial}: no integer solution found");
                }
            }
            rows.push(ExperimentRow {
                k,
                d_m: dm,
                mean_no: total_no as f64 / completed.max(1) as f64,
                expected_no,
                success_pct: 100.0 * total_successes as f64 / (total_iterations.max(1)) as f64,
                mean_time_s: total_time.as_secs_f64() / completed.max(1) as f64,
                trials: completed,
            });
        }
    }
    Ok(rows)
}

/// CSV lines for the rows: a fixed header plus one line per cell, plain
/// decimal points, newline separated.
pub fn render_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("k,d_m,mean_No,expected_No,success_pct,mean_time_s,trials\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{:.3},{:.6},{}\n",
            row.k, row.d_m, row.mean_no, row.expected_no, row.success_pct, row.mean_time_s,
            row.trials
        ));
    }
    out
}

/// Writes the rows as CSV.
pub fn write_csv(rows: &[ExperimentRow], path: impl AsRef<Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Input("no rows to write".into()));
    }
    Ok(std::fs::write(path, render_csv(rows))?)
}
