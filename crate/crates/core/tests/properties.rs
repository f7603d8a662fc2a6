#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;

use common::{l1, l1_dist, uniform_vec, valid_point};
use mlpr::io::{parse_problem_str, write_problem};
use mlpr::linalg::{diagnose_mmatrix, Factorization, Verdict};
use mlpr::solvers::{solve, Method, SolverConfig};
use mlpr::tensor::apply_bilinear_with;
use mlpr::{
    apply_bilinear, derivative_matrix, flatten_tensor, generate_random_problem, lu_factorize, predicted_sum, residual, solve_factored,
    Execution, PrngState,
};

fn random_stochastic_cube(n: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut rng = PrngState::from_seed(seed);
    let mut p = vec![vec![vec![0.0; n]; n]; n];
    for j in 0..n {
        for k in 0..n {
            let fiber = uniform_vec(&mut rng, n, 0.0, 1.0);
            let s: f64 = fiber.iter().sum();
            for i in 0..n {
                p[i][j][k] = fiber[i] / s;
            }
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flattening_roundtrip(seed in any::<u64>()) {
        let p = random_stochastic_cube(4, seed);
        let r = flatten_tensor(&p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    prop_assert_eq!(r.get(i, k * 4 + j), p[i][j][k]);
                }
            }
        }
    }

    #[test]
    fn column_sum_identity(n in 1usize..12, seed in any::<u64>(), xs in prop::collection::vec(-2.0f64..2.0, 24)) {
        let inst = generate_random_problem(n, seed, 0.3).unwrap();
        let (x, y) = (&xs[..n], &xs[12..12 + n]);
        let out = apply_bilinear(inst.tensor(), x, y).unwrap();
        let lhs: f64 = out.iter().sum();
        let rhs = x.iter().sum::<f64>() * y.iter().sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * n as f64);
    }

    #[test]
    fn bilinearity(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0, xs in prop::collection::vec(0.0f64..1.0, 18)) {
        let n = 6;
        let inst = generate_random_problem(n, seed, 0.3).unwrap();
        let (x1, x2, y) = (&xs[..6], &xs[6..12], &xs[12..]);
        let combo: Vec<f64> = x1.iter().zip(x2).map(|(p, q)| a * p + b * q).collect();
        let lhs = apply_bilinear(inst.tensor(), &combo, y).unwrap();
        let r1 = apply_bilinear(inst.tensor(), x1, y).unwrap();
        let r2 = apply_bilinear(inst.tensor(), x2, y).unwrap();
        let rhs: Vec<f64> = r1.iter().zip(&r2).map(|(p, q)| a * p + b * q).collect();
        let scale = l1(&rhs).max(1.0);
        prop_assert!(l1_dist(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn generator_determinism(n in 1usize..10, seed in any::<u64>()) {
        let a = generate_random_problem(n, seed, 0.1).unwrap();
        let b = generate_random_problem(n, seed, 0.1).unwrap();
        prop_assert!(a.tensor().as_slice().iter().zip(b.tensor().as_slice()).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn derivative_is_z_matrix_with_column_law(n in 1usize..10, seed in any::<u64>(), alpha in 0.0f64..0.99, xs in prop::collection::vec(0.0f64..1.0, 10)) {
        let inst = generate_random_problem(n, seed, alpha).unwrap();
        let x = &xs[..n];
        let j = derivative_matrix(&inst, x).unwrap();
        let expected = 1.0 - 2.0 * alpha * x.iter().sum::<f64>();
        for (col, s) in j.matrix.column_sums().into_iter().enumerate() {
            prop_assert!((s - expected).abs() <= 1e-12, "column {} sums to {} not {}", col, s, expected);
        }
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    prop_assert!(j.matrix.get(r, c) <= 0.0);
                }
            }
        }
    }

    #[test]
    fn nres_nonnegative_and_zero_only_at_roots(n in 1usize..8, seed in any::<u64>(), xs in prop::collection::vec(0.0f64..1.0, 8)) {
        let inst = generate_random_problem(n, seed, 0.4).unwrap();
        let x = &xs[..n];
        let value = mlpr::nres(&inst, x).unwrap();
        let f = residual(&inst, x).unwrap();
        prop_assert!(value >= 0.0);
        prop_assert_eq!(value == 0.0, f.l1_norm() == 0.0);
        prop_assert!((f.sum - f.vector.iter().sum::<f64>()).abs() <= 1e-13 * n as f64);
    }

    #[test]
    fn sum_identity_on_valid_points(n in 2usize..15, seed in any::<u64>(), alpha in 0.0f64..0.499, draw in 0usize..2) {
        let inst = generate_random_problem(n, seed, alpha).unwrap();
        let mut rng = PrngState::from_seed(seed ^ 0xABCD);
        let x = valid_point(&inst, &mut rng, draw);
        let f = residual(&inst, &x).unwrap();
        let lu = lu_factorize(&derivative_matrix(&inst, &x).unwrap()).unwrap();
        let d = solve_factored(&lu, &f.vector.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        let sum_y: f64 = x.iter().zip(&d).map(|(a, b)| a + b).sum();
        prop_assert!((sum_y - predicted_sum(alpha, x.iter().sum()).unwrap()).abs() <= 1e-11);
        // the step itself stays on the monotone side
        prop_assert!(d.iter().all(|&v| v >= -1e-13));
        prop_assert!(sum_y <= 1.0 + 1e-13);
    }

    #[test]
    fn nonsingular_m_inverse_is_nonnegative(n in 1usize..12, seed in any::<u64>(), alpha in 0.0f64..0.5, scale in 0.0f64..1.0) {
        let inst = generate_random_problem(n, seed, alpha).unwrap();
        let mut rng = PrngState::from_seed(seed);
        let w = uniform_vec(&mut rng, n, 0.0, 1.0);
        let total = scale / w.iter().sum::<f64>();
        let x: Vec<f64> = w.iter().map(|v| v * total).collect();
        let j = derivative_matrix(&inst, &x).unwrap();
        let d = diagnose_mmatrix(&j);
        prop_assert!(d.is_z_matrix);
        if d.verdict == Verdict::NonsingularM {
            prop_assert!(d.column_dominance_margin > 0.0);
            let inv = lu_factorize(&j).unwrap().inverse();
            prop_assert!(inv.as_slice().iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn factor_solve_consistency(n in 1usize..20, seed in any::<u64>(), ws in prop::collection::vec(-1.0f64..1.0, 20)) {
        let inst = generate_random_problem(n, seed, 0.45).unwrap();
        let x: Vec<f64> = inst.v().iter().map(|v| 0.5 * v).collect();
        let j = derivative_matrix(&inst, &x).unwrap();
        let w = &ws[..n];
        let lu = lu_factorize(&j).unwrap();
        prop_assert!(lu.roundtrip_error(&j.matrix) <= 1e-12);
        let z = solve_factored(&lu, &j.matrix.mul_vec(w)).unwrap();
        prop_assert!(l1_dist(&z, w) <= 1e-10 * l1(w).max(1e-300));
    }

    #[test]
    fn sequential_and_parallel_kernels_agree(seed in any::<u64>()) {
        let inst = generate_random_problem(40, seed, 0.45).unwrap();
        let x: Vec<f64> = inst.v().iter().map(|v| 0.7 * v).collect();
        let a = apply_bilinear_with(inst.tensor(), &x, &x, Execution::Sequential).unwrap();
        let b = apply_bilinear_with(inst.tensor(), &x, &x, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
        let ja = mlpr::residual::derivative_matrix_with(&inst, &x, Execution::Sequential).unwrap();
        let jb = mlpr::residual::derivative_matrix_with(&inst, &x, Execution::Parallel).unwrap();
        prop_assert_eq!(ja.matrix, jb.matrix);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn problem_file_roundtrip(idx in 0usize..4, seed in any::<u64>(), alpha in 0.0f64..1.0) {
        let n = [1, 2, 10, 50][idx];
        let inst = generate_random_problem(n, seed, alpha).unwrap();
        let mut buf = Vec::new();
        write_problem(&inst, &mut buf).unwrap();
        let back = parse_problem_str(std::str::from_utf8(&buf).unwrap()).unwrap().into_instance(None).unwrap();
        prop_assert_eq!(back.alpha().to_bits(), inst.alpha().to_bits());
        prop_assert!(back.v().iter().zip(inst.v()).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert!(back.tensor().as_slice().iter().zip(inst.tensor().as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn finite_difference_derivative() {
    let mut rng = PrngState::from_seed(17);
    for n in [3, 5, 10] {
        for seed in 0..5 {
            let inst = generate_random_problem(n, seed, 0.45).unwrap();
            let x = uniform_vec(&mut rng, n, 0.0, 1.0);
            let h = uniform_vec(&mut rng, n, -1.0, 1.0);
            let eps = 1e-7;
            let jh = derivative_matrix(&inst, &x).unwrap().matrix.mul_vec(&h);
            let xe: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a + eps * b).collect();
            let f0 = residual(&inst, &x).unwrap().vector;
            let f1 = residual(&inst, &xe).unwrap().vector;
            let fd: Vec<f64> = f1.iter().zip(&f0).map(|(a, b)| (a - b) / eps).collect();
            assert!(l1_dist(&fd, &jh) / l1(&jh) <= 1e-6);
        }
    }
}

#[test]
fn lemma2_comparison() {
    let mut rng = PrngState::from_seed(2);
    for alpha in [0.3, 0.45, 0.49] {
        for seed in 0..5 {
            let n = 8;
            let inst = generate_random_problem(n, seed, alpha).unwrap();
            let w = uniform_vec(&mut rng, n, 0.0, 1.0);
            let total = rng.next_f64() / w.iter().sum::<f64>();
            let x: Vec<f64> = w.iter().map(|v| v * total).collect();
            let z: Vec<f64> = x.iter().map(|v| v * rng.next_f64()).collect();
            let ix = Factorization::factorize(&derivative_matrix(&inst, &x).unwrap().matrix).unwrap().inverse();
            let iz = Factorization::factorize(&derivative_matrix(&inst, &z).unwrap().matrix).unwrap().inverse();
            assert!(iz.as_slice().iter().zip(ix.as_slice()).all(|(a, b)| *a <= b + 1e-10));
            assert!(iz.as_slice().iter().all(|&v| v >= -1e-12));
        }
    }
}

#[test]
fn all_methods_agree_on_grid() {
    for alpha in [0.3, 0.45, 0.49, 0.499] {
        for n in [2, 5, 20] {
            for seed in [0, 1, 2] {
                let inst = generate_random_problem(n, seed, alpha).unwrap();
                let reference = solve(&inst, &SolverConfig::new(Method::Newton)).unwrap().solution;
                for method in Method::ALL {
                    for inner in [1, 2, 4, 8] {
                        let cfg = SolverConfig { inner_steps: inner, max_total_steps: 50_000, ..SolverConfig::new(method) };
                        let report = solve(&inst, &cfg).unwrap();
                        assert!(report.monotone_violations == 0, "{method} alpha={alpha} n={n}");
                        assert!(l1_dist(&report.solution, &reference) <= 1e-9, "{method} alpha={alpha} n={n} seed={seed} inner={inner}");
                        if matches!(method, Method::Newton | Method::FixedPoint | Method::Chord) {
                            break;
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn factorization_economy_n100() {
    let base = generate_random_problem(100, 0, 0.49).unwrap();
    for alpha in [0.49, 0.495, 0.499] {
        let inst = base.with_alpha(alpha).unwrap();
        let newton = solve(&inst, &SolverConfig::new(Method::Newton)).unwrap();
        let modified = solve(&inst, &SolverConfig::new(Method::ModifiedNewton)).unwrap();
        assert!(modified.factorizations < newton.factorizations, "alpha={alpha}: {} vs {}", modified.factorizations, newton.factorizations);
    }
}

#[test]
fn generated_n300_is_strictly_positive() {
    let inst = generate_random_problem(300, 0, 0.499).unwrap();
    assert!(inst.tensor().as_slice().iter().all(|&v| v > 0.0));
}
