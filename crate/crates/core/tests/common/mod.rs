#![allow(dead_code)]

use mlpr::{flatten_tensor, generate_random_problem, residual, PrngState, ProblemInstance};

/// Two-state example with flattening `[[1, 0, 0.5, 0], [0, 1, 0.5, 1]]`
/// and `v = (0.5, 0.5)`.
pub fn e2(alpha: f64) -> ProblemInstance {
    // p[i][j][k]
    let p = vec![vec![vec![1.0, 0.5], vec![0.0, 0.0]], vec![vec![0.0, 0.5], vec![1.0, 1.0]]];
    ProblemInstance::new(flatten_tensor(&p).unwrap(), alpha, vec![0.5, 0.5]).unwrap()
}

/// Root of `0.2 a² - 0.8 a + 0.3 = 0` with `b = 1 - a`: the stochastic
/// solution of the two-state example at alpha = 0.4.
pub fn e2_root() -> [f64; 2] {
    let s = 10f64.sqrt() / 2.0;
    [2.0 - s, s - 1.0]
}

pub fn l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn uniform_vec(rng: &mut PrngState, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| lo + (hi - lo) * rng.next_f64()).collect()
}

/// A point with `x >= 0`, `eᵀx <= 1` and `F(x) <= 0` up to rounding.
///
/// Even draws scale `(1 - alpha) v` entrywise by uniforms, which keeps
/// `F(x) <= x - (1 - alpha) v <= 0`. Odd draws take a fixed-point iterate
/// from zero, which is monotone with `F(x_k) = x_k - x_{k+1} <= 0`.
pub fn valid_point(inst: &ProblemInstance, rng: &mut PrngState, draw: usize) -> Vec<f64> {
    let n = inst.n();
    let a = inst.alpha();
    let x = if draw.is_multiple_of(2) {
        let u = uniform_vec(rng, n, 0.0, 1.0);
        inst.v().iter().zip(&u).map(|(v, u)| (1.0 - a) * v * u).collect()
    } else {
        let steps = 1 + (rng.next_f64() * 40.0) as usize;
        let mut x = vec![0.0; n];
        for _ in 0..steps {
            let q = mlpr::apply_bilinear(inst.tensor(), &x, &x).unwrap();
            x = q.iter().zip(inst.v()).map(|(q, v)| a * q + (1.0 - a) * v).collect();
        }
        x
    };
    assert!(residual(inst, &x).unwrap().max_entry() <= 1e-13);
    x
}

pub fn random_instance(n: usize, seed: u64, alpha: f64) -> ProblemInstance {
    generate_random_problem(n, seed, alpha).unwrap()
}
