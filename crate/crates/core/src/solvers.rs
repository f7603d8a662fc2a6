//! Fixed-point, Newton, chord and modified Newton iterations.
//!
//! The three Newton-type methods share one refresh-and-reuse loop: the
//! derivative is assembled and factorized at the start of each block and the
//! factors are reused for the block's inner steps. Newton refreshes every
//! step, the modified method every `inner_steps` steps, and the chord method
//! never refreshes after the first factorization.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{lu_factorize_with, Factorization};
use crate::residual::{derivative_matrix_with, evaluate_with, Evaluation};
use crate::tensor::{check_len, ProblemInstance};

/// Entrywise slack for the monotonicity and sign checks.
pub const MONOTONE_TOL: f64 = 1e-13;

/// Declaration order is the row order used by benchmark tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Newton,
    ModifiedNewton,
    Chord,
    FixedPoint,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Newton, Method::ModifiedNewton, Method::Chord, Method::FixedPoint];

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::ModifiedNewton => "modified",
            Method::Chord => "chord",
            Method::FixedPoint => "fixed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| format!("unknown method '{s}' (expected fixed, newton, modified or chord)"))
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub method: Method,
    /// Steps per factorization for the modified method. Newton uses 1 and
    /// the chord method ignores it.
    pub inner_steps: usize,
    /// Stop once NRes drops to this value.
    pub tol: f64,
    /// Cap on factorizations.
    pub max_outer: usize,
    /// Cap on iteration steps, all methods.
    pub max_total_steps: usize,
    /// Keep every iterate and count monotonicity violations in the report.
    pub enforce_monotone: bool,
    /// Starting point; zero when `None`.
    pub initial: Option<Vec<f64>>,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::ModifiedNewton,
            inner_steps: 4,
            tol: 1e-12,
            max_outer: 200,
            max_total_steps: 10_000,
            enforce_monotone: true,
            initial: None,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        SolverConfig { method, ..Default::default() }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.inner_steps == 0 {
            return Err(Error::InvalidConfig("inner_steps must be at least 1".into()));
        }
        if let Some(x0) = &self.initial {
            check_len(n, x0)?;
        }
        Ok(())
    }
}

fn serialize_secs<S: Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub method: Method,
    /// Final iterate, or the iterate with the smallest NRes when the run did
    /// not converge.
    pub solution: Vec<f64>,
    pub nres_final: f64,
    /// `‖F(solution)‖₁`.
    pub residual_l1_final: f64,
    /// NRes of every iterate, starting with the initial point.
    pub nres_history: Vec<f64>,
    /// `eᵀx` of every iterate.
    pub sum_history: Vec<f64>,
    /// `max_i F(x)_i` of every iterate.
    pub residual_max_history: Vec<f64>,
    /// Every iterate including the initial point; empty unless
    /// `enforce_monotone` was set.
    #[serde(skip)]
    pub iterates: Vec<Vec<f64>>,
    /// Number of derivative factorizations (outer iterations).
    pub factorizations: usize,
    pub total_inner_steps: usize,
    pub monotone_violations: usize,
    #[serde(rename = "elapsed_secs", serialize_with = "serialize_secs")]
    pub elapsed: Duration,
    pub converged: bool,
}

struct Trace {
    keep_iterates: bool,
    iterates: Vec<Vec<f64>>,
    nres: Vec<f64>,
    sums: Vec<f64>,
    residual_max: Vec<f64>,
    best: (f64, Vec<f64>, f64),
}

impl Trace {
    fn new(keep_iterates: bool) -> Self {
        Trace {
            keep_iterates,
            iterates: Vec::new(),
            nres: Vec::new(),
            sums: Vec::new(),
            residual_max: Vec::new(),
            best: (f64::INFINITY, Vec::new(), f64::NAN),
        }
    }

    fn record(&mut self, x: &[f64], eval: &Evaluation) {
        if self.keep_iterates {
            self.iterates.push(x.to_vec());
        }
        self.nres.push(eval.nres);
        self.sums.push(x.iter().sum());
        self.residual_max.push(eval.residual.max_entry());
        if eval.nres < self.best.0 || self.best.1.is_empty() {
            self.best = (eval.nres, x.to_vec(), eval.residual.l1_norm());
        }
    }

    fn finish(
        self,
        method: Method,
        last: (Vec<f64>, &Evaluation),
        factorizations: usize,
        steps: usize,
        started: Instant,
        converged: bool,
    ) -> Result<SolveReport> {
        let elapsed = started.elapsed();
        let (solution, nres_final, residual_l1_final) =
            if converged { (last.0, last.1.nres, last.1.residual.l1_norm()) } else { (self.best.1, self.best.0, self.best.2) };
        let keep = self.keep_iterates;
        let mut report = SolveReport {
            method,
            solution,
            nres_final,
            residual_l1_final,
            nres_history: self.nres,
            sum_history: self.sums,
            residual_max_history: self.residual_max,
            iterates: self.iterates,
            factorizations,
            total_inner_steps: steps,
            monotone_violations: 0,
            elapsed,
            converged,
        };
        if keep {
            report.monotone_violations = verify_monotone_theorem(&report).len();
        }
        if converged {
            Ok(report)
        } else {
            Err(Error::NotConverged(Box::new(report)))
        }
    }
}

fn start_point(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Vec<f64>> {
    cfg.validate(inst.n())?;
    Ok(cfg.initial.clone().unwrap_or_else(|| vec![0.0; inst.n()]))
}

/// Dispatches on `cfg.method`.
pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    match cfg.method {
        Method::FixedPoint => fixed_point_solve(inst, cfg),
        Method::Newton => newton_solve(inst, cfg),
        Method::ModifiedNewton => modified_newton_solve(inst, cfg),
        Method::Chord => chord_solve(inst, cfg),
    }
}

/// Iterates `x ← alpha R(x ⊗ x) + (1 - alpha) v`. Never factorizes.
pub fn fixed_point_solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    let started = Instant::now();
    let mut x = start_point(inst, cfg)?;
    let alpha = inst.alpha();
    let mut trace = Trace::new(cfg.enforce_monotone);
    let mut eval = evaluate_with(inst, &x, cfg.execution)?;
    trace.record(&x, &eval);
    let mut steps = 0;
    while eval.nres > cfg.tol && steps < cfg.max_total_steps {
        for ((xi, qi), vi) in x.iter_mut().zip(&eval.quadratic).zip(inst.v()) {
            *xi = alpha * qi + (1.0 - alpha) * vi;
        }
        steps += 1;
        eval = evaluate_with(inst, &x, cfg.execution)?;
        trace.record(&x, &eval);
    }
    let converged = eval.nres <= cfg.tol;
    trace.finish(Method::FixedPoint, (x, &eval), 0, steps, started, converged)
}

/// Newton's method: a fresh factorization at every step.
pub fn newton_solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    refresh_and_reuse(inst, cfg, Method::Newton, Some(1))
}

/// Factorizes `J(x_{i,0})` once per block and takes `cfg.inner_steps`
/// steps `x_{i,s} = x_{i,s-1} - J(x_{i,0})⁻¹ F(x_{i,s-1})` with it. The
/// stopping test runs after every step, so the last block may be partial.
pub fn modified_newton_solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    refresh_and_reuse(inst, cfg, Method::ModifiedNewton, Some(cfg.inner_steps))
}

/// One factorization at the starting point, reused for every step.
///
/// From the default start `x₀ = 0` the derivative is the identity, so the
/// chord iterates coincide with the fixed-point iterates.
pub fn chord_solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    refresh_and_reuse(inst, cfg, Method::Chord, None)
}

fn refresh_and_reuse(inst: &ProblemInstance, cfg: &SolverConfig, method: Method, block: Option<usize>) -> Result<SolveReport> {
    let started = Instant::now();
    let mut x = start_point(inst, cfg)?;
    let mut trace = Trace::new(cfg.enforce_monotone);
    let mut eval = evaluate_with(inst, &x, cfg.execution)?;
    trace.record(&x, &eval);

    let mut factors: Option<Factorization> = None;
    let mut factorizations = 0;
    let mut steps = 0;
    let mut used = 0;
    let converged = loop {
        if eval.nres <= cfg.tol {
            break true;
        }
        if steps >= cfg.max_total_steps {
            break false;
        }
        let refresh = match (&factors, block) {
            (None, _) => true,
            (Some(_), Some(b)) => used >= b,
            (Some(_), None) => false,
        };
        if refresh {
            if factorizations >= cfg.max_outer {
                break false;
            }
            let jac = derivative_matrix_with(inst, &x, cfg.execution)?;
            factors = Some(lu_factorize_with(&jac, cfg.execution)?);
            factorizations += 1;
            used = 0;
        }
        let lu = factors.as_ref().expect("factorized above");
        let rhs: Vec<f64> = eval.residual.vector.iter().map(|f| -f).collect();
        let step = lu.solve(&rhs)?;
        x.iter_mut().zip(&step).for_each(|(xi, di)| *xi += di);
        steps += 1;
        used += 1;
        eval = evaluate_with(inst, &x, cfg.execution)?;
        trace.record(&x, &eval);
    };
    trace.finish(method, (x, &eval), factorizations, steps, started, converged)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MonotoneViolation {
    /// `x_{step}[index]` is smaller than the previous iterate's entry.
    Decrease {
        step: usize,
        index: usize,
        drop: f64,
    },
    Negative {
        step: usize,
        index: usize,
        value: f64,
    },
    SumExceeded {
        step: usize,
        sum: f64,
    },
    PositiveResidual {
        step: usize,
        max_entry: f64,
    },
}

/// Checks the logged run against the monotone staircase: iterates are
/// nonnegative and entrywise nondecreasing, `eᵀx ≤ 1` and `F(x) ≤ 0`, each
/// within [`MONOTONE_TOL`].
///
/// These hold from any start `x₀` with `F(x₀) ≤ 0`, `x₀ ≥ 0` and `eᵀx₀ ≤ 1`
/// when `alpha < 1/2`. Entry checks need the iterates, which are only kept
/// when the run used `enforce_monotone`.
pub fn verify_monotone_theorem(report: &SolveReport) -> Vec<MonotoneViolation> {
    let mut out = Vec::new();
    for (step, x) in report.iterates.iter().enumerate() {
        for (index, &value) in x.iter().enumerate() {
            if value < -MONOTONE_TOL {
                out.push(MonotoneViolation::Negative { step, index, value });
            }
        }
        if step > 0 {
            let prev = &report.iterates[step - 1];
            for (index, (&a, &b)) in prev.iter().zip(x).enumerate() {
                if b < a - MONOTONE_TOL {
                    out.push(MonotoneViolation::Decrease { step, index, drop: a - b });
                }
            }
        }
    }
    for (step, &sum) in report.sum_history.iter().enumerate() {
        if sum > 1.0 + MONOTONE_TOL {
            out.push(MonotoneViolation::SumExceeded { step, sum });
        }
    }
    for (step, &max_entry) in report.residual_max_history.iter().enumerate() {
        if max_entry > MONOTONE_TOL {
            out.push(MonotoneViolation::PositiveResidual { step, max_entry });
        }
    }
    out
}
