use std::f64::consts::PI;

use genfinder::matkernel::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Taylor series with many terms, summed after scaling so the terms decay fast.
fn exp_series(m: &ComplexMatrix) -> ComplexMatrix {
    let s = 8;
    let a = m.scale_real(0.5f64.powi(s));
    let mut term = ComplexMatrix::identity(m.dim());
    let mut sum = term.clone();
    for k in 1..40 {
        term = term.matmul(&a).scale_real(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}

#[test]
fn exp_of_zero_is_identity_exactly() {
    let e = mat_exp(&ComplexMatrix::zeros(3)).unwrap();
    assert_eq!(e, ComplexMatrix::identity(3));
}

#[test]
fn exp_of_diagonal() {
    let m = ComplexMatrix::from_diagonal(&[c(2f64.ln(), 0.0), c(0.0, 0.0)]);
    let e = mat_exp(&m).unwrap();
    assert!((e[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
    assert!((e[(1, 1)] - c(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(e[(0, 1)], c(0.0, 0.0));
}

#[test]
fn exp_of_full_rotation_is_identity() {
    let m = ComplexMatrix::from_real(2, &[0.0, 2.0 * PI, -2.0 * PI, 0.0]).unwrap();
    let e = mat_exp(&m).unwrap();
    let oracle = exp_series(&m);
    assert!(e.dist(&ComplexMatrix::identity(2)) < 1e-12);
    assert!(e.dist(&oracle) < 1e-12);
}

#[test]
fn exp_matches_series_on_random_inputs() {
    for seed in 0..20 {
        let m = random_matrix(6, seed).scale_real(3.0);
        let e = mat_exp(&m).unwrap();
        let o = exp_series(&m);
        assert!(e.dist(&o) <= 1e-11 * o.norm_fro(), "seed {seed}");
    }
}

#[test]
fn exp_overflow_cap() {
    let m = ComplexMatrix::from_diagonal(&[c(1e4, 0.0), c(0.0, 0.0)]);
    assert!(matches!(mat_exp(&m), Err(MatError::Overflow { .. })));
}

#[test]
fn eig_identity_is_degenerate() {
    let r = eig_decompose(&ComplexMatrix::identity(2), DEFAULT_DEGENERACY_TOL);
    assert!(matches!(r, Err(MatError::DegenerateSpectrum { .. })));
}

#[test]
fn eig_of_diagonal() {
    let m = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(0.0, 3.0)]);
    let es = eig_decompose(&m, DEFAULT_DEGENERACY_TOL).unwrap();
    assert_eq!(es.eigenvalues, vec![c(2.0, 0.0), c(0.0, 3.0)]);
    assert!(es.right_eigenvectors.dist(&ComplexMatrix::identity(2)) < 1e-15);
    assert!(es.left_eigenvectors.dist(&ComplexMatrix::identity(2)) < 1e-15);
}

fn reconstruct(es: &EigenSystem) -> ComplexMatrix {
    let n = es.eigenvalues.len();
    let mut r = es.right_eigenvectors.clone();
    for i in 0..n {
        for k in 0..n {
            r[(i, k)] *= es.eigenvalues[k];
        }
    }
    r.matmul(&es.left_eigenvectors)
}

#[test]
fn eig_random_reconstructs() {
    for seed in 0..30 {
        let m = random_matrix(4, seed);
        let es = eig_decompose(&m, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(reconstruct(&es).dist(&m) <= 1e-10, "seed {seed}");
        assert!(es.biorthogonality_residual <= 1e-10);
    }
}

#[test]
fn eig_biorthogonality_at_size_400() {
    let m = random_matrix(20, 99);
    let es = eig_decompose(&m, DEFAULT_DEGENERACY_TOL).unwrap();
    assert!(es.biorthogonality_residual <= 1e-10);
    let m = random_matrix(400, 7);
    let es = eig_decompose(&m, DEFAULT_DEGENERACY_TOL).unwrap();
    assert!(es.biorthogonality_residual <= 1e-10, "{}", es.biorthogonality_residual);
}

#[test]
fn eig_cyclic_permutation_converges() {
    let n = 6;
    let mut p = ComplexMatrix::zeros(n);
    for i in 0..n {
        p[((i + 1) % n, i)] = c(1.0, 0.0);
    }
    let mut vals = eigenvalues(&p).unwrap();
    vals.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
    for (k, v) in vals.iter().enumerate() {
        assert!((v.norm() - 1.0).abs() < 1e-12, "{v} {k}");
    }
    let es = eig_decompose(&p, DEFAULT_DEGENERACY_TOL).unwrap();
    assert!(reconstruct(&es).dist(&p) < 1e-12);
}

#[test]
fn log_near_identity_diagonal() {
    let m = ComplexMatrix::from_diagonal(&[c(1.1, 0.0), c(0.9, 0.0)]);
    let l = mat_log_principal(&m, 1e-12).unwrap();
    assert!((l[(0, 0)] - c(1.1f64.ln(), 0.0)).norm() < 1e-15);
    assert!((l[(1, 1)] - c(0.9f64.ln(), 0.0)).norm() < 1e-15);
}

#[test]
fn log_rejects_negative_eigenvalue() {
    let m = ComplexMatrix::from_diagonal(&[c(0.5, 0.0), c(-0.8, 0.0)]);
    assert!(matches!(mat_log_principal(&m, 1e-12), Err(MatError::LogUndefined { .. })));
    let m = ComplexMatrix::from_real(2, &[0.5, 0.1, 0.2, -0.8]).unwrap();
    assert!(matches!(mat_log_principal(&m, 1e-12), Err(MatError::LogUndefined { .. })));
}

#[test]
fn log_round_trip_on_stochastic_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    while done < 20 {
        let mut a = [0.0; 9];
        for j in 0..3 {
            let col: Vec<f64> = (0..3).map(|i| if i == j { 3.0 } else { rng.random::<f64>() }).collect();
            let s: f64 = col.iter().sum();
            for i in 0..3 {
                a[i * 3 + j] = col[i] / s;
            }
        }
        let m = ComplexMatrix::from_real(3, &a).unwrap();
        let vals = eigenvalues(&m).unwrap();
        if vals.iter().any(|z| z.re <= 0.0) {
            continue;
        }
        let l = mat_log_principal(&m, 1e-12).unwrap();
        assert!(mat_exp(&l).unwrap().dist(&m) < 1e-9);
        done += 1;
    }
}

#[test]
fn log_paths_agree() {
    for seed in 0..20 {
        let g = random_matrix(5, seed + 100);
        let m = mat_exp(&g).unwrap();
        let a = mat_log_principal(&m, 1e-12).unwrap();
        let b = mat_log_eigen(&m, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(a.dist(&b) < 1e-10, "seed {seed}: {}", a.dist(&b));
        for z in eigenvalues(&a).unwrap() {
            assert!(z.im > -PI && z.im <= PI);
        }
    }
}

#[test]
fn log_handles_repeated_and_jordan_eigenvalues() {
    let m = ComplexMatrix::identity(3);
    assert!(mat_log_principal(&m, 1e-12).unwrap().max_abs() < 1e-15);
    let j = ComplexMatrix::from_real(2, &[2.0, 1.0, 0.0, 2.0]).unwrap();
    let l = mat_log_principal(&j, 1e-12).unwrap();
    assert!(mat_exp(&l).unwrap().dist(&j) < 1e-13);
    assert!((l[(0, 1)] - c(0.5, 0.0)).norm() < 1e-13);
}

#[test]
fn gamma_on_basis_element() {
    let d = 2;
    let mut m = ComplexMatrix::zeros(4);
    // |0,0⟩⟨1,1|
    m[(0, d + 1)] = c(1.0, 0.0);
    let g = gamma_reshuffle(&m).unwrap();
    let mut expected = ComplexMatrix::zeros(4);
    // |0,1⟩⟨0,1|
    expected[(1, 1)] = c(1.0, 0.0);
    assert_eq!(g, expected);
}

#[test]
fn gamma_of_identity_channel_is_scaled_projector() {
    for d in 2..5 {
        let g = gamma_reshuffle(&ComplexMatrix::identity(d * d)).unwrap();
        let w = omega(d);
        let proj = ComplexMatrix::from_fn(d * d, |i, j| w[i] * w[j].conj() * d as f64);
        assert!(g.dist(&proj) < 1e-14);
        assert!(psd_check(&g, 1e-12).unwrap().is_positive());
    }
}

#[test]
fn not_square_of_square() {
    assert!(matches!(gamma_reshuffle(&ComplexMatrix::zeros(3)), Err(MatError::NotSquareOfSquare { dim: 3 })));
    assert!(matches!(flip_op(&ComplexMatrix::zeros(5)), Err(MatError::NotSquareOfSquare { dim: 5 })));
}

#[test]
fn flip_of_real_diagonal_permutes() {
    let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
    let f = flip_op(&m).unwrap();
    assert_eq!(f.diagonal(), vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
}

#[test]
fn psd_examples() {
    let m = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(0.0, 0.0)]);
    assert_eq!(psd_check(&m, 1e-12).unwrap(), PsdVerdict::Positive(0.0));
    let m = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(-1.0, 0.0)]);
    assert_eq!(psd_check(&m, 1e-12).unwrap(), PsdVerdict::NotPositive(-1.0));
    let w = omega(3);
    let p = ComplexMatrix::from_fn(9, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) } - w[i] * w[j]);
    let v = psd_check(&p, 1e-12).unwrap();
    assert!(v.is_positive() && v.margin().abs() < 1e-14);
    let nh = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!(matches!(psd_check(&nh, 1e-8), Err(MatError::NotHermitian { .. })));
}

#[test]
fn compression_matches_dense_projection() {
    let d = 3;
    let h = random_matrix(9, 5).hermitian_part();
    let w = omega(d);
    let p = ComplexMatrix::from_fn(9, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) } - w[i] * w[j]);
    let dense = p.matmul(&h).matmul(&p);
    let mut fast = h.clone();
    compress_off_omega(&mut fast).unwrap();
    assert!(fast.dist(&dense) < 1e-14);
}

#[test]
fn block_structure_is_respected() {
    // A 2×2 rotation block and a lone scalar, interleaved.
    let mut m = ComplexMatrix::zeros(3);
    m[(0, 2)] = c(1.0, 0.0);
    m[(2, 0)] = c(-1.0, 0.0);
    m[(1, 1)] = c(0.5, 0.0);
    assert_eq!(blocks::components(&m), vec![vec![0, 2], vec![1]]);
    let e = mat_exp(&m).unwrap();
    assert!(e.dist(&exp_series(&m)) < 1e-13);
}

fn arb_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| ComplexMatrix::from_row_major(n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_and_flip_are_involutions(m in arb_matrix(9)) {
        prop_assert_eq!(gamma_reshuffle(&gamma_reshuffle(&m).unwrap()).unwrap(), m.clone());
        prop_assert_eq!(flip_op(&flip_op(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn gamma_is_linear(x in arb_matrix(4), y in arb_matrix(4), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut lhs = x.scale_real(a);
        lhs.axpy(c(b, 0.0), &y);
        let lhs = gamma_reshuffle(&lhs).unwrap();
        let mut rhs = gamma_reshuffle(&x).unwrap().scale_real(a);
        rhs.axpy(c(b, 0.0), &gamma_reshuffle(&y).unwrap());
        prop_assert!(lhs.dist(&rhs) < 1e-14);
    }

    #[test]
    fn exp_log_round_trip(m in arb_matrix(4)) {
        let e = mat_exp(&m).unwrap();
        if eigenvalues(&e).unwrap().iter().all(|z| !near_nonpositive_axis(*z, 1e-6)) {
            let l = mat_log_principal(&e, 1e-12).unwrap();
            let back = mat_exp(&l).unwrap();
            prop_assert!(back.dist(&e) <= 1e-8 * e.norm_fro());
        }
    }
}
