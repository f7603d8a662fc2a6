//! Row-parallel execution helpers.
//!
//! Kernels hand each output row to exactly one closure invocation, so the
//! floating-point evaluation order inside a row never depends on the
//! scheduling policy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many rows the kernels stay on the calling thread.
pub const PAR_MIN_ROWS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is compiled in and
    /// falls back to [`Execution::Sequential`] otherwise.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work over `rows` rows will actually be spread over threads.
    pub fn is_parallel_for(self, rows: usize) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel && rows >= PAR_MIN_ROWS
    }
}

/// Sets `out[i] = f(i)` for every index.
pub(crate) fn map_rows<F>(exec: Execution, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel_for(out.len()) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
        return;
    }
    let _ = exec;
    out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

/// Calls `f(i, row_i)` on consecutive `row_len`-sized chunks of `data`.
pub(crate) fn for_each_row_mut<F>(exec: Execution, data: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel_for(data.len() / row_len) {
        data.par_chunks_mut(row_len).enumerate().for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = exec;
    data.chunks_mut(row_len).enumerate().for_each(|(i, row)| f(i, row));
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
