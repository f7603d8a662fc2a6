//! Benchmark sweeps over `alpha × method` on one shared instance.

use std::io::Write;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::random::generate_random_problem;
use crate::solvers::{solve, Method, SolverConfig};
use crate::tensor::{check_alpha, ProblemInstance};

pub const CSV_HEADER: [&str; 8] = ["alpha", "method", "n", "factorizations", "total_inner_steps", "nres", "time_ms", "converged"];

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub n: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub methods: Vec<Method>,
    pub inner_steps: usize,
    pub tol: f64,
    pub max_outer: usize,
    pub max_total_steps: usize,
    /// Run the rows of a sweep concurrently. Timings then include contention.
    pub concurrent_rows: bool,
    /// Execution policy for the kernels inside each solve.
    pub execution: Execution,
}

impl BenchSpec {
    pub fn new(n: usize, seed: u64, alphas: Vec<f64>, methods: Vec<Method>) -> Self {
        let defaults = SolverConfig::default();
        BenchSpec {
            n,
            seed,
            alphas,
            methods,
            inner_steps: defaults.inner_steps,
            tol: defaults.tol,
            max_outer: defaults.max_outer,
            max_total_steps: defaults.max_total_steps,
            concurrent_rows: false,
            execution: defaults.execution,
        }
    }

    fn config(&self, method: Method) -> SolverConfig {
        SolverConfig {
            method,
            inner_steps: self.inner_steps,
            tol: self.tol,
            max_outer: self.max_outer,
            max_total_steps: self.max_total_steps,
            enforce_monotone: false,
            initial: None,
            execution: self.execution,
        }
    }

    /// `(alpha, method)` pairs in table order: grouped by alpha as listed,
    /// methods in [`Method`] declaration order with duplicates dropped.
    pub fn cells(&self) -> Vec<(f64, Method)> {
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        self.alphas.iter().flat_map(|&a| methods.iter().map(move |&m| (a, m))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub alpha: f64,
    pub method: Method,
    pub n: usize,
    pub factorizations: usize,
    pub total_inner_steps: usize,
    pub nres: f64,
    pub time_ms: f64,
    pub converged: bool,
}

impl BenchRow {
    pub fn record(&self) -> [String; 8] {
        [
            self.alpha.to_string(),
            self.method.name().to_string(),
            self.n.to_string(),
            self.factorizations.to_string(),
            self.total_inner_steps.to_string(),
            format!("{:.6e}", self.nres),
            format!("{:.3}", self.time_ms),
            self.converged.to_string(),
        ]
    }
}

/// Generates the `(n, seed)` instance once and runs every cell on it.
pub fn run_benchmark(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    let first_alpha = spec.alphas.first().copied().unwrap_or(0.0);
    check_alpha(first_alpha)?;
    let base = generate_random_problem(spec.n, spec.seed, first_alpha)?;
    run_benchmark_on(&base, spec)
}

/// Runs the sweep on `base`'s tensor and teleportation vector; `spec.n` and
/// `spec.seed` are ignored.
pub fn run_benchmark_on(base: &ProblemInstance, spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    for &a in &spec.alphas {
        check_alpha(a)?;
    }
    let cells = spec.cells();
    let run = |&(alpha, method): &(f64, Method)| -> Result<BenchRow> {
        let inst = base.with_alpha(alpha)?;
        Ok(run_cell(&inst, &spec.config(method)))
    };
    #[cfg(feature = "parallel")]
    if spec.concurrent_rows {
        return cells.par_iter().map(run).collect();
    }
    cells.iter().map(run).collect()
}

fn run_cell(inst: &ProblemInstance, cfg: &SolverConfig) -> BenchRow {
    let row = |factorizations, total_inner_steps, nres, elapsed: std::time::Duration, converged| BenchRow {
        alpha: inst.alpha(),
        method: cfg.method,
        n: inst.n(),
        factorizations,
        total_inner_steps,
        nres,
        time_ms: elapsed.as_secs_f64() * 1e3,
        converged,
    };
    let started = std::time::Instant::now();
    match solve(inst, cfg) {
        Ok(r) => row(r.factorizations, r.total_inner_steps, r.nres_final, r.elapsed, true),
        Err(Error::NotConverged(r)) => row(r.factorizations, r.total_inner_steps, r.nres_final, r.elapsed, false),
        Err(_) => row(0, 0, f64::NAN, started.elapsed(), false),
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(())
}
