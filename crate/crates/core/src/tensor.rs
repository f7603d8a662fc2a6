//! Third-order stochastic tensors stored through their first-index
//! flattening, and the bilinear contraction `R (x ⊗ y)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Absolute slack allowed on every column sum of a flattening.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// The `n × n²` flattening `R` of a third-order stochastic tensor `P`.
///
/// Column `c = k * n + j` (zero-based) holds the fiber `P[·][j][k]`, i.e.
/// `k` varies slowest. Storage is row-major: row `i` is the contiguous slice
/// `R[i][0..n²]`, which lets the kernels split work by output row.
#[derive(Clone, Debug, PartialEq)]
pub struct FlattenedTensor {
    n: usize,
    data: Vec<f64>,
}

impl FlattenedTensor {
    /// Builds a flattening from row-major entries, checking shape,
    /// nonnegativity and column sums.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        let tensor = Self::from_row_major_unchecked(n, data)?;
        tensor.validate()?;
        Ok(tensor)
    }

    fn from_row_major_unchecked(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        let expected = n.checked_mul(n).and_then(|m| m.checked_mul(n)).ok_or_else(|| Error::Shape(format!("n = {n} overflows")))?;
        if data.len() != expected {
            return Err(Error::Shape(format!("expected {expected} entries for n = {n}, got {}", data.len())));
        }
        Ok(FlattenedTensor { n, data })
    }

    fn validate(&self) -> Result<()> {
        let nn = self.n * self.n;
        for (idx, &value) in self.data.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::NegativeEntry { row: idx / nn, column: idx % nn, value });
            }
        }
        for (column, sum) in self.column_sums().into_iter().enumerate() {
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::Stochasticity { column, sum, tolerance: STOCHASTIC_TOL });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns, `n²`.
    pub fn cols(&self) -> usize {
        self.n * self.n
    }

    /// Row-major entries, `n³` values.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nn = self.cols();
        &self.data[i * nn..(i + 1) * nn]
    }

    /// `R[i][c]`.
    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.data[i * self.cols() + c]
    }

    /// `P[i][j][k]`, read through the flattening.
    pub fn entry(&self, i: usize, j: usize, k: usize) -> f64 {
        self.get(i, k * self.n + j)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols()];
        for row in self.data.chunks(self.cols()) {
            for (s, r) in sums.iter_mut().zip(row) {
                *s += r;
            }
        }
        sums
    }
}

/// Flattens `P[i][j][k]` along its first index.
pub fn flatten_tensor(p: &[Vec<Vec<f64>>]) -> Result<FlattenedTensor> {
    let n = p.len();
    if n == 0 {
        return Err(Error::Shape("empty tensor".into()));
    }
    for (i, slab) in p.iter().enumerate() {
        if slab.len() != n || slab.iter().any(|fiber| fiber.len() != n) {
            return Err(Error::Shape(format!("slab {i} is not {n}×{n}")));
        }
    }
    let nn = n * n;
    let mut data = vec![0.0; n * nn];
    for (i, slab) in p.iter().enumerate() {
        for (j, row) in slab.iter().enumerate() {
            for (k, &value) in row.iter().enumerate() {
                data[i * nn + k * n + j] = value;
            }
        }
    }
    FlattenedTensor::from_row_major(n, data)
}

/// `R (x ⊗ y)` where `(x ⊗ y)[k * n + j] = x[k] * y[j]`.
///
/// `result[i] = Σ_{j,k} P[i][j][k] x[k] y[j]`, so `apply_bilinear(r, x, x)`
/// is the tensor-vector product `P x²`.
pub fn apply_bilinear(r: &FlattenedTensor, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    apply_bilinear_with(r, x, y, Execution::default())
}

pub fn apply_bilinear_with(r: &FlattenedTensor, x: &[f64], y: &[f64], exec: Execution) -> Result<Vec<f64>> {
    check_len(r.n, x)?;
    check_len(r.n, y)?;
    let mut out = vec![0.0; r.n];
    bilinear_into(r, x, y, exec, &mut out);
    Ok(out)
}

pub(crate) fn bilinear_into(r: &FlattenedTensor, x: &[f64], y: &[f64], exec: Execution, out: &mut [f64]) {
    let kron: Vec<f64> = x.iter().flat_map(|&xk| y.iter().map(move |&yj| xk * yj)).collect();
    exec::map_rows(exec, out, |i| exec::dot(r.row(i), &kron));
}

pub(crate) fn check_len(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    Ok(())
}

/// One multilinear PageRank problem `(R, alpha, v)`.
///
/// The tensor is shared behind an [`Arc`] so that sweeps over `alpha` do not
/// copy the `n³` entries.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    tensor: Arc<FlattenedTensor>,
    alpha: f64,
    v: Vec<f64>,
}

impl ProblemInstance {
    pub fn new(tensor: impl Into<Arc<FlattenedTensor>>, alpha: f64, v: Vec<f64>) -> Result<Self> {
        let tensor = tensor.into();
        check_alpha(alpha)?;
        check_teleportation(tensor.n(), &v)?;
        Ok(ProblemInstance { tensor, alpha, v })
    }

    pub fn tensor(&self) -> &FlattenedTensor {
        &self.tensor
    }

    pub fn shared_tensor(&self) -> Arc<FlattenedTensor> {
        Arc::clone(&self.tensor)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.tensor.n()
    }

    /// Same tensor and teleportation vector with a different `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(ProblemInstance { tensor: Arc::clone(&self.tensor), alpha, v: self.v.clone() })
    }
}

pub(crate) fn check_teleportation(n: usize, v: &[f64]) -> Result<()> {
    check_len(n, v)?;
    if let Some((i, &value)) = v.iter().enumerate().find(|(_, &x)| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidTeleportation(format!("entry {i} is {value}")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidTeleportation(format!("entries sum to {sum}")));
    }
    Ok(())
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}
