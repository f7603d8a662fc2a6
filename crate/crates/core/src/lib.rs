//! Solvers for the multilinear PageRank equation
//!
//! ```text
//! x = alpha * R (x ⊗ x) + (1 - alpha) * v
//! ```
//!
//! where `R` is the `n × n²` column-stochastic flattening of a third-order
//! stochastic tensor along its first index. The crate provides the tensor
//! kernels, the residual map and its derivatives, a reusable dense LU
//! factorization with M-matrix diagnostics, four iterative solvers
//! (fixed-point, Newton, chord and the refresh-and-reuse modified Newton
//! method) and the `mlpr` command line tool for problem files and benchmark
//! sweeps.
//!
//! Dense kernels run their rows on the rayon pool when the `parallel`
//! feature is enabled (the default). Every output entry is computed by a
//! single thread in a fixed order, so results are bit-identical between the
//! parallel and sequential paths.

pub mod bench;
pub mod error;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod random;
pub mod residual;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{diagnose_mmatrix, lu_factorize, solve_factored, DenseMatrix, Factorization, MmatrixDiagnosis, Verdict};
pub use random::{generate_random_problem, PrngState};
pub use residual::{derivative_matrix, nres, predicted_sum, residual, second_derivative_apply, DerivativeMatrix, ResidualValue};
pub use solvers::{
    chord_solve, fixed_point_solve, modified_newton_solve, newton_solve, solve, verify_monotone_theorem, Method, MonotoneViolation,
    SolveReport, SolverConfig,
};
pub use tensor::{apply_bilinear, flatten_tensor, FlattenedTensor, ProblemInstance};
