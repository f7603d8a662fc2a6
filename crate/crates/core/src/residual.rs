//! The residual `F(x) = x - alpha R(x ⊗ x) - (1 - alpha) v`, its first and
//! second derivatives, and the normalized residual used as stopping metric.

use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::linalg::DenseMatrix;
use crate::tensor::{bilinear_into, check_len, ProblemInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualValue {
    pub vector: Vec<f64>,
    /// `e^T F(x)`.
    pub sum: f64,
}

impl ResidualValue {
    fn new(vector: Vec<f64>) -> Self {
        let sum = vector.iter().sum();
        ResidualValue { vector, sum }
    }

    pub fn l1_norm(&self) -> f64 {
        self.vector.iter().map(|f| f.abs()).sum()
    }

    /// Largest entry, i.e. how far `F(x) <= 0` is from holding.
    pub fn max_entry(&self) -> f64 {
        self.vector.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `F(x)` together with the normalized residual, sharing one bilinear apply.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub residual: ResidualValue,
    pub nres: f64,
    /// `R(x ⊗ x)`.
    pub quadratic: Vec<f64>,
}

/// The derivative `J(x) = I - alpha R(x ⊗ I + I ⊗ x)` as a dense matrix.
#[derive(Clone, Debug)]
pub struct DerivativeMatrix {
    pub matrix: DenseMatrix,
    /// `e^T x` at the base point.
    pub base_point_sum: f64,
    /// Opaque identifier of the base point (hash of its bit pattern).
    pub base_point_tag: u64,
}

pub fn residual(inst: &ProblemInstance, x: &[f64]) -> Result<ResidualValue> {
    Ok(evaluate_with(inst, x, Execution::default())?.residual)
}

pub fn evaluate_with(inst: &ProblemInstance, x: &[f64], exec: Execution) -> Result<Evaluation> {
    check_len(inst.n(), x)?;
    let alpha = inst.alpha();
    let mut quad = vec![0.0; inst.n()];
    bilinear_into(inst.tensor(), x, x, exec, &mut quad);
    let vector: Vec<f64> = x.iter().zip(&quad).zip(inst.v()).map(|((&xi, &qi), &vi)| xi - alpha * qi - (1.0 - alpha) * vi).collect();
    let residual = ResidualValue::new(vector);
    let l1 = |v: &[f64]| v.iter().map(|a| a.abs()).sum::<f64>();
    let denom = (1.0 - alpha) * l1(inst.v()) + alpha * l1(&quad) + l1(x);
    let nres = residual.l1_norm() / denom;
    Ok(Evaluation { residual, nres, quadratic: quad })
}

/// Normalized 1-norm residual
/// `‖F(x)‖₁ / ((1 - alpha)‖v‖₁ + alpha‖R(x ⊗ x)‖₁ + ‖x‖₁)`.
pub fn nres(inst: &ProblemInstance, x: &[f64]) -> Result<f64> {
    Ok(evaluate_with(inst, x, Execution::default())?.nres)
}

pub fn derivative_matrix(inst: &ProblemInstance, x: &[f64]) -> Result<DerivativeMatrix> {
    derivative_matrix_with(inst, x, Execution::default())
}

/// Assembles `J(x)` row by row in a single pass over `R`.
///
/// `J[i][j] = δ_ij - alpha (Σ_k R[i][k n + j] x_k + Σ_l R[i][j n + l] x_l)`;
/// the first sum is column `j` of `R(x ⊗ I)`, the second of `R(I ⊗ x)`.
pub fn derivative_matrix_with(inst: &ProblemInstance, x: &[f64], exec: Execution) -> Result<DerivativeMatrix> {
    let n = inst.n();
    check_len(n, x)?;
    let r = inst.tensor();
    let alpha = inst.alpha();
    let mut data = vec![0.0; n * n];
    exec::for_each_row_mut(exec, &mut data, n, |i, out| {
        let row = r.row(i);
        out.fill(0.0);
        for (block, &xk) in row.chunks(n).zip(x) {
            for (o, &rv) in out.iter_mut().zip(block) {
                *o += rv * xk;
            }
        }
        for (j, (o, block)) in out.iter_mut().zip(row.chunks(n)).enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            *o = delta - alpha * (*o + exec::dot(block, x));
        }
    });
    Ok(DerivativeMatrix { matrix: DenseMatrix::from_row_major(n, n, data), base_point_sum: x.iter().sum(), base_point_tag: point_tag(x) })
}

fn point_tag(x: &[f64]) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    for v in x {
        v.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

/// `F''(z1, z2) = -alpha R(z1 ⊗ z2 + z2 ⊗ z1)`; independent of the base
/// point because `F` is quadratic.
pub fn second_derivative_apply(inst: &ProblemInstance, z1: &[f64], z2: &[f64]) -> Result<Vec<f64>> {
    let n = inst.n();
    check_len(n, z1)?;
    check_len(n, z2)?;
    let exec = Execution::default();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    bilinear_into(inst.tensor(), z1, z2, exec, &mut a);
    bilinear_into(inst.tensor(), z2, z1, exec, &mut b);
    Ok(a.iter().zip(&b).map(|(p, q)| -inst.alpha() * (p + q)).collect())
}

/// Sum of the exact Newton step taken from a point with sum `sum_x`:
/// `(1 - alpha - alpha sum_x²) / (1 - 2 alpha sum_x)`.
pub fn predicted_sum(alpha: f64, sum_x: f64) -> Result<f64> {
    let denom = 1.0 - 2.0 * alpha * sum_x;
    if denom.abs() <= f64::EPSILON * (1.0 + (2.0 * alpha * sum_x).abs()) {
        return Err(Error::SingularDenominator { alpha, sum: sum_x });
    }
    Ok((1.0 - alpha - alpha * sum_x * sum_x) / denom)
}
