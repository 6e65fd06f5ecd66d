use genfinder::branch::*;
use genfinder::channel::{Snapshot, SnapshotSeries, StochasticMatrix, TransferMatrix};
use genfinder::matkernel::*;
use genfinder::report::{Cause, Verdict};
use proptest::prelude::*;

fn channel(l: &ComplexMatrix) -> TransferMatrix {
    TransferMatrix::new(mat_exp(l).unwrap()).unwrap()
}

fn omega_row_norm(a: &ComplexMatrix) -> f64 {
    let d = sqrt_dim(a.dim()).unwrap();
    a.vec_mul(&omega(d)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn zero_generator_is_valid() {
    let c = check_conditions(&ComplexMatrix::zeros(4)).unwrap();
    assert_eq!(c.hermiticity_residual, 0.0);
    assert_eq!(c.normalization_residual, 0.0);
    assert_eq!(c.ccp_margin, 0.0);
    assert!(c.verdict(1e-12));
}

#[test]
fn sampled_generators_satisfy_conditions() {
    for d in 2..5 {
        for seed in 0..10 {
            let c = check_conditions(&sample_lindblad(d, seed)).unwrap();
            assert!(c.hermiticity_residual <= 1e-10 && c.normalization_residual <= 1e-10, "{c:?}");
            assert!(c.ccp_margin >= -1e-10, "{c:?}");
        }
    }
}

#[test]
fn purely_hamiltonian_generator_has_zero_margin() {
    let h = sample_lindblad_parts(3, 11).h;
    let l = lindblad_from_parts(&h, &ComplexMatrix::zeros(8), &traceless_basis(3));
    let c = check_conditions(&l).unwrap();
    assert!(c.ccp_margin.abs() < 1e-14, "{c:?}");
}

#[test]
fn ccp_violating_perturbation_is_detected() {
    let l = sample_lindblad(2, 4);
    // Perturb along a traceless direction |x⟩⟨x| in the Choi space, x ⊥ ω.
    let x: Vec<C64> = traceless_basis(2)[0].as_slice().to_vec();
    let p = ComplexMatrix::from_fn(4, |i, j| x[i] * x[j].conj()).scale_real(-0.1 - 10.0);
    let l2 = &l + &gamma_reshuffle(&p).unwrap();
    assert!(check_conditions(&l2).unwrap().ccp_margin < 0.0);
}

#[test]
fn traceless_basis_is_orthonormal() {
    for d in 1..5 {
        let b = traceless_basis(d);
        assert_eq!(b.len(), d * d - 1);
        for (i, x) in b.iter().enumerate() {
            assert!(x.trace().norm() < 1e-15);
            assert!(x.hermiticity_residual() < 1e-15);
            for (j, y) in b.iter().enumerate() {
                let ip: C64 = x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a.conj() * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(target, 0.0)).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn sampler_is_deterministic() {
    let a = sample_lindblad(2, 42);
    let b = sample_lindblad(2, 42);
    let bits = |m: &ComplexMatrix| m.as_slice().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_ne!(bits(&a), bits(&sample_lindblad(2, 43)));
}

#[test]
fn flip_fixes_hermiticity_preserving_channels() {
    for seed in 0..10 {
        let e = mat_exp(&sample_lindblad(3, seed)).unwrap();
        assert!(flip_op(&e).unwrap().dist(&e) < 1e-12);
    }
}

#[test]
fn family_of_positive_diagonal_channel_has_no_shifts() {
    let e = ComplexMatrix::from_diagonal(&[1.0, 0.9, 0.8, 1.0].map(|x| C64::new(x, 0.0)));
    let f = build_branch_family(&e, DEFAULT_DEGENERACY_TOL).unwrap();
    assert!(f.shifts.is_empty());
    assert!(mat_exp(&f.l0).unwrap().dist(&e) < 1e-14);
}

#[test]
fn family_of_qubit_channel() {
    for seed in 0..20 {
        let e = mat_exp(&sample_lindblad(2, seed)).unwrap();
        let f = build_branch_family(&e, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(f.pairs(), 1, "seed {seed}");
        let a = &f.shifts[0];
        assert!(mat_exp(&(&f.l0 + a)).unwrap().dist(&e) < 1e-8);
        let mut ev = eigenvalues(a).unwrap();
        ev.sort_by(|x, y| x.im.total_cmp(&y.im));
        let expect = [-2.0 * std::f64::consts::PI, 0.0, 0.0, 2.0 * std::f64::consts::PI];
        for (z, t) in ev.iter().zip(expect) {
            assert!((z - C64::new(0.0, t)).norm() < 1e-8, "{ev:?}");
        }
    }
}

#[test]
fn family_rejects_negative_eigenvalue() {
    let t = StochasticMatrix::from_rows(&[vec![0.1, 0.9], vec![0.9, 0.1]]).unwrap();
    let e = TransferMatrix::lift_classical(&t, 0.05);
    match build_branch_family(e.matrix(), DEFAULT_DEGENERACY_TOL) {
        Err(err) => assert!(matches!(err.into_cause(), Cause::LogUndefined { .. })),
        Ok(_) => panic!("expected LogUndefined"),
    }
}

#[test]
fn family_invariants_on_random_channels() {
    for d in 2..5 {
        for seed in 0..6 {
            let e = mat_exp(&sample_lindblad(d, 100 + seed)).unwrap();
            let f = build_branch_family(&e, DEFAULT_DEGENERACY_TOL).unwrap();
            for a in &f.shifts {
                assert!(omega_row_norm(a) <= 1e-9);
            }
            let bx = BranchBox::symmetric(f.pairs().min(3), 1);
            for k in 0..bx.size() as u64 {
                let mut m = bx.nth(k);
                m.resize(f.pairs(), 0);
                let l = f.branch(&m);
                assert!(mat_exp(&l).unwrap().dist(&e) <= 1e-7 * e.norm_fro(), "d={d} seed={seed} m={m:?}");
                assert!(gamma_reshuffle(&l).unwrap().hermiticity_residual() <= 1e-9);
            }
        }
    }
}

#[test]
fn decide_identity() {
    let r = decide_markovian(&TransferMatrix::identity(2), 1e-8, 2).unwrap();
    assert_eq!(r.verdict, Verdict::Markovian);
    assert!(r.witness_l.unwrap().max_abs() < 1e-15);
    assert_eq!(r.witness_m, Some(vec![]));
}

#[test]
fn decide_lifted_negative_channel() {
    let t = StochasticMatrix::from_rows(&[vec![0.1, 0.9], vec![0.9, 0.1]]).unwrap();
    let r = decide_markovian(&TransferMatrix::lift_classical(&t, 0.05), 1e-8, 2).unwrap();
    assert_eq!(r.verdict, Verdict::NonMarkovian);
    assert!(matches!(r.cause, Some(Cause::LogUndefined { .. })));
}

#[test]
fn decide_rejects_invalid_snapshot() {
    let t = TransferMatrix::new(ComplexMatrix::identity(4).scale_real(2.0)).unwrap();
    assert!(matches!(decide_markovian(&t, 1e-8, 2), Err(DecideError::InvalidSnapshot { .. })));
}

#[test]
fn decide_round_trip_qubit() {
    for seed in 0..40 {
        let e = channel(&sample_lindblad(2, seed));
        let r = decide_markovian(&e, 1e-8, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Markovian, "seed {seed}: {r}");
        let w = r.witness_l.unwrap();
        assert!(mat_exp(&w).unwrap().dist(e.matrix()) <= 1e-7);
        assert!(check_conditions(&w).unwrap().verdict(1e-8));
    }
}

#[test]
fn decide_finds_non_principal_branch() {
    // Qutrit frequencies 2, 2.5, 4.5: the principal log folds 4.5 below π and breaks additivity.
    let parts = sample_lindblad_parts(3, 5);
    let h = ComplexMatrix::from_diagonal(&[0.0, 2.0, 4.5].map(|x| C64::new(x, 0.0)));
    let l = lindblad_from_parts(&h, &parts.g.scale_real(0.05), &traceless_basis(3));
    let e = channel(&l);
    let r = decide_markovian(&e, 1e-8, 3).unwrap();
    assert_eq!(r.verdict, Verdict::Markovian, "{r}");
    let w = r.witness_l.as_ref().unwrap();
    assert!(check_conditions(w).unwrap().verdict(1e-8));
    assert!(mat_exp(w).unwrap().dist(e.matrix()) < 1e-8);
    assert!(r.witness_m.unwrap().iter().any(|&m| m != 0));
    let f = build_branch_family(e.matrix(), DEFAULT_DEGENERACY_TOL).unwrap();
    assert!(!check_conditions(&f.branch(&vec![0; f.pairs()])).unwrap().verdict(1e-8));
    let bx = BranchBox::symmetric(f.pairs(), 1);
    assert!((0..bx.size() as u64).any(|k| f.branch(&bx.nth(k)).dist(&l) < 1e-7));
}

#[test]
fn decide_non_markovian_channel() {
    // exp of a flip-invariant, trace-annihilating generator violating ccp strongly.
    let l = sample_lindblad(2, 8).scale_real(-0.3);
    let mut e = mat_exp(&l).unwrap();
    // Mix with the identity channel to make it CPT.
    let id = ComplexMatrix::identity(4);
    e = &e.scale_real(0.5) + &id.scale_real(0.5);
    let t = TransferMatrix::new(e).unwrap();
    if genfinder::channel::validate_cpt(&t, 1e-8).valid {
        let r = decide_markovian(&t, 1e-8, 2).unwrap();
        assert_ne!(r.verdict, Verdict::Markovian);
    }
}

#[test]
fn lexicographic_search_is_deterministic_and_pruning_is_exact() {
    for seed in 0..5 {
        let e = channel(&sample_lindblad(3, 300 + seed));
        let mut opts = SearchOptions::new(1e-8);
        let a = decide_markovian_with(&e, &opts, 1).unwrap();
        opts.prune = false;
        let b = decide_markovian_with(&e, &opts, 1).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.witness_m, b.witness_m);
    }
}

#[test]
fn decompose_zero() {
    let dec = decompose_lindblad(&ComplexMatrix::zeros(9), 1e-10).unwrap();
    assert!(dec.h.max_abs() < 1e-15 && dec.g.max_abs() < 1e-15);
}

#[test]
fn decompose_sampled() {
    for seed in 0..10 {
        let l = sample_lindblad(2, seed);
        let dec = decompose_lindblad(&l, 1e-10).unwrap();
        assert!(dec.reassembly_residual <= 1e-8);
        assert!(psd_check(&dec.g, 1e-10).unwrap().is_positive());
        assert!(dec.h.hermiticity_residual() < 1e-14);
    }
}

#[test]
fn decompose_hamiltonian_only() {
    let h = sample_lindblad_parts(3, 2).h;
    let l = lindblad_from_parts(&h, &ComplexMatrix::zeros(8), &traceless_basis(3));
    let dec = decompose_lindblad(&l, 1e-10).unwrap();
    assert!(dec.g.norm_fro() <= 1e-8);
    // H is recovered up to its trace.
    let shift = (h.trace() / C64::new(3.0, 0.0)).re;
    assert!(dec.h.dist(&(&h - &ComplexMatrix::identity(3).scale_real(shift))) < 1e-12);
}

#[test]
fn decompose_rejects_non_lindblad() {
    let l = sample_lindblad(2, 1).scale_real(-1.0);
    assert!(decompose_lindblad(&l, 1e-10).is_err());
}

fn series(ls: &[(f64, &ComplexMatrix)]) -> SnapshotSeries {
    SnapshotSeries::new(
        ls.iter()
            .map(|(t, l)| (*t, Snapshot::Quantum(channel(&l.scale(C64::new(*t, 0.0))))))
            .collect(),
    )
    .unwrap()
}

#[test]
fn series_fit_recovers_generator() {
    for seed in 0..5 {
        let l = sample_lindblad(2, seed);
        let s = series(&[(1.0, &l), (2.0, &l), (3.0, &l)]);
        let r = fit_generator_series(&s, 1e-6, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Markovian);
        assert!(r.witness_l.unwrap().dist(&l) <= 1e-6);
        assert_eq!(r.series_residuals.len(), 3);
    }
}

#[test]
fn single_snapshot_series_matches_decide() {
    for seed in 0..5 {
        let l = sample_lindblad(2, seed);
        let r1 = fit_generator_series(&series(&[(1.0, &l)]), 1e-8, 2).unwrap();
        let r2 = decide_markovian(&channel(&l), 1e-8, 2).unwrap();
        assert_eq!(r1.verdict, r2.verdict);
        assert_eq!(r1.witness_m, r2.witness_m);
    }
}

#[test]
fn mixed_series_is_rejected() {
    let la = sample_lindblad(2, 1);
    let lb = sample_lindblad(2, 2);
    let s = SnapshotSeries::new(vec![
        (1.0, Snapshot::Quantum(channel(&la))),
        (2.0, Snapshot::Quantum(channel(&lb.scale_real(2.0)))),
    ])
    .unwrap();
    let r = fit_generator_series(&s, 1e-6, 2).unwrap();
    assert_ne!(r.verdict, Verdict::Markovian);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn soundness_of_markovian_verdicts(seed in 0u64..10_000, d in 2usize..4) {
        let e = channel(&sample_lindblad(d, seed));
        let r = decide_markovian(&e, 1e-8, 1).unwrap();
        prop_assert_ne!(r.verdict, Verdict::NonMarkovian);
        if r.verdict == Verdict::Markovian {
            let w = r.witness_l.unwrap();
            prop_assert!(check_conditions(&w).unwrap().verdict(1e-8));
            prop_assert!(mat_exp(&w).unwrap().dist(e.matrix()) <= 1e-8 * e.matrix().norm_fro().max(1.0));
        }
    }
}
