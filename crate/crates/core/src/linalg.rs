//! Dense LU factorization with partial pivoting, built once and reused for
//! many solves, plus column-dominance M-matrix diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::residual::DerivativeMatrix;
use crate::tensor::check_len;

/// Relative pivot threshold: a pivot below `PIVOT_TOL * ‖A‖₁` is singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Off-diagonal entries up to this value still count as nonpositive.
pub const Z_PATTERN_TOL: f64 = 1e-14;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        sums
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            sums.iter_mut().zip(row).for_each(|(s, v)| *s += v.abs());
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data.chunks(self.cols).map(|row| exec::dot(row, x)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }
}

/// `P A = L U` with unit lower `L` and upper `U` packed in one matrix.
#[derive(Clone, Debug)]
pub struct Factorization {
    lu: DenseMatrix,
    /// `perm[i]` is the row of the original matrix stored at row `i`.
    perm: Vec<usize>,
    base_point_tag: Option<u64>,
}

impl Factorization {
    pub fn factorize(a: &DenseMatrix) -> Result<Self> {
        Self::factorize_with(a, Execution::default())
    }

    pub fn factorize_with(a: &DenseMatrix, exec: Execution) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Shape(format!("cannot factorize a {}×{} matrix", a.rows, a.cols)));
        }
        let n = a.rows;
        let threshold = PIVOT_TOL * a.norm1();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (pivot_row, pivot) =
                (k..n).map(|i| (i, lu[i * n + k])).fold((k, 0.0f64), |best, (i, v)| if v.abs() > best.1.abs() { (i, v) } else { best });
            if pivot.is_nan() || pivot.abs() <= threshold {
                return Err(Error::SingularMatrix { step: k, pivot, threshold });
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_tail = &head[k * n + k..(k + 1) * n];
            exec::for_each_row_mut(exec, tail, n, |_, row| {
                let factor = row[k] / pivot_tail[0];
                row[k] = factor;
                if factor != 0.0 {
                    for (r, p) in row[k + 1..].iter_mut().zip(&pivot_tail[1..]) {
                        *r -= factor * p;
                    }
                }
            });
        }
        Ok(Factorization { lu: DenseMatrix::from_row_major(n, n, lu), perm, base_point_tag: None })
    }

    pub fn n(&self) -> usize {
        self.lu.rows
    }

    pub fn base_point_tag(&self) -> Option<u64> {
        self.base_point_tag
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DenseMatrix {
        let n = self.n();
        let mut l = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                l.set(i, j, self.lu.get(i, j));
            }
        }
        l
    }

    pub fn upper(&self) -> DenseMatrix {
        let n = self.n();
        let mut u = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                u.set(i, j, self.lu.get(i, j));
            }
        }
        u
    }

    /// `Pᵀ L U`, i.e. the factored matrix rebuilt from its factors.
    pub fn reconstruct(&self) -> DenseMatrix {
        let lu = self.lower().matmul(&self.upper());
        let n = self.n();
        let mut out = DenseMatrix::zeros(n, n);
        for (i, &orig) in self.perm.iter().enumerate() {
            out.data[orig * n..(orig + 1) * n].copy_from_slice(lu.row(i));
        }
        out
    }

    /// `‖Pᵀ L U - A‖₁ / ‖A‖₁`.
    pub fn roundtrip_error(&self, a: &DenseMatrix) -> f64 {
        let rebuilt = self.reconstruct();
        let diff = DenseMatrix::from_row_major(a.rows, a.cols, rebuilt.data.iter().zip(&a.data).map(|(x, y)| x - y).collect());
        let scale = a.norm1();
        if scale == 0.0 {
            diff.norm1()
        } else {
            diff.norm1() / scale
        }
    }

    /// Solves `A z = b` with the stored factors.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(n, b)?;
        let mut z: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s = exec::dot(&row[..i], &z[..i]);
            z[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s = exec::dot(&row[i + 1..], &z[i + 1..]);
            z[i] = (z[i] - s) / row[i];
        }
        Ok(z)
    }

    /// `A⁻¹` assembled from `n` solves against unit vectors.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e).expect("length matches");
            e[j] = 0.0;
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv
    }
}

pub fn lu_factorize(j: &DerivativeMatrix) -> Result<Factorization> {
    lu_factorize_with(j, Execution::default())
}

pub fn lu_factorize_with(j: &DerivativeMatrix, exec: Execution) -> Result<Factorization> {
    let mut f = Factorization::factorize_with(&j.matrix, exec)?;
    f.base_point_tag = Some(j.base_point_tag);
    Ok(f)
}

pub fn solve_factored(f: &Factorization, b: &[f64]) -> Result<Vec<f64>> {
    f.solve(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Z-matrix with strictly positive column-dominance margin.
    NonsingularM,
    /// Z-matrix whose columns all have zero margin, so `eᵀA = 0`.
    Singular,
    /// The column-dominance certificate does not decide.
    Indefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MmatrixDiagnosis {
    pub is_z_matrix: bool,
    /// Minimum over columns of `a_jj - Σ_{i≠j} |a_ij|`.
    pub column_dominance_margin: f64,
    pub verdict: Verdict,
}

pub fn diagnose_mmatrix(j: &DerivativeMatrix) -> MmatrixDiagnosis {
    diagnose_matrix(&j.matrix)
}

pub fn diagnose_matrix(a: &DenseMatrix) -> MmatrixDiagnosis {
    let n = a.rows.min(a.cols);
    let mut is_z = true;
    let mut margins = vec![0.0; a.cols];
    for i in 0..a.rows {
        for (j, &v) in a.row(i).iter().enumerate() {
            if i == j {
                margins[j] += v;
            } else {
                if v > Z_PATTERN_TOL {
                    is_z = false;
                }
                margins[j] -= v.abs();
            }
        }
    }
    let margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = Z_PATTERN_TOL * a.norm1().max(1.0);
    let verdict = if n == 0 || !is_z {
        Verdict::Indefinite
    } else if margin > tol {
        Verdict::NonsingularM
    } else if margins.iter().all(|m| m.abs() <= tol) {
        Verdict::Singular
    } else {
        Verdict::Indefinite
    };
    MmatrixDiagnosis { is_z_matrix: is_z, column_dominance_margin: margin, verdict }
}
