//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero on any failure.

use std::time::{Duration, Instant};

use genfinder::branch::{check_conditions, decide_markovian, fit_generator_series, sample_lindblad, traceless_basis};
use genfinder::channel::{Snapshot, SnapshotSeries, StochasticMatrix, TransferMatrix, DEFAULT_TOL};
use genfinder::embed::decide_embeddable;
use genfinder::matkernel::schur::Schur;
use genfinder::matkernel::{gamma_reshuffle, mat_exp, ComplexMatrix, C64};
use genfinder::reduction::{
    build_bundle, canonical_unsat, corpus, default_tolerance, default_tolerance_with, extract_encoding_inequalities,
    sat_brute_force, verify_classical_reduction, verify_reduction, Reduction, SatInstance, DEFAULT_KAPPA,
};
use genfinder::Verdict;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn channel(l: &ComplexMatrix) -> TransferMatrix {
    TransferMatrix::new(mat_exp(l).expect("exp of a sampled generator")).expect("square")
}

fn binary(v: usize) -> Vec<Vec<i64>> {
    (0u32..1 << v).map(|b| (0..v).map(|i| (b >> i & 1) as i64).collect()).collect()
}

/// The corpus of criterion 5: V ≤ 5, C ≤ 4 up to relabeling, plus the canonical UNSAT instance.
fn reduction_corpus() -> Vec<SatInstance> {
    let mut c = corpus(5, 4);
    c.push(canonical_unsat());
    c
}

fn generator_round_trip() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let d = 2 + (seed % 3) as usize;
        let l = sample_lindblad(d, seed);
        let e = channel(&l);
        match decide_markovian(&e, DEFAULT_TOL, 2) {
            Ok(r) if r.verdict == Verdict::Markovian => {
                let w = r.witness_l.as_ref().expect("witness");
                let dist = mat_exp(w).expect("exp").dist(e.matrix());
                worst = worst.max(dist);
                if dist > 1e-7 {
                    failures.push(format!("seed {seed} (d={d}): closure {dist:e}"));
                }
            }
            Ok(r) => failures.push(format!("seed {seed} (d={d}): {}", r.verdict)),
            Err(err) => failures.push(format!("seed {seed} (d={d}): {err}")),
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed <= Duration::from_secs(120);
    outcome(
        failures.is_empty() && fast,
        format!(
            "200 generators, {} failures, worst closure {worst:.2e}, {}{}",
            failures.len(),
            secs(elapsed),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

/// Minimum-eigenvalue direction of `L^Γ` restricted to the traceless (ω-orthogonal) subspace.
fn weakest_ccp_direction(l: &ComplexMatrix, d: usize) -> Vec<C64> {
    let g = gamma_reshuffle(l).expect("square");
    let fs = traceless_basis(d);
    let basis: Vec<&[C64]> = fs.iter().map(ComplexMatrix::as_slice).collect();
    let m = basis.len();
    let gf: Vec<Vec<C64>> = basis.iter().map(|f| g.mul_vec(f)).collect();
    let mut block = ComplexMatrix::from_fn(m, |a, b| basis[a].iter().zip(&gf[b]).map(|(x, y)| x.conj() * y).sum());
    block.make_hermitian();
    let s = Schur::new(&block).expect("Schur");
    let k = (0..m).min_by(|&i, &j| s.t[(i, i)].re.total_cmp(&s.t[(j, j)].re)).expect("nonempty");
    let mut x = vec![C64::new(0.0, 0.0); d * d];
    for (a, f) in basis.iter().enumerate() {
        let y = s.z[(a, k)];
        for (xi, fi) in x.iter_mut().zip(f.iter()) {
            *xi += y * fi;
        }
    }
    x
}

fn condition_equivalence() -> Outcome {
    let mut bad = Vec::new();
    let mut worst_residual: f64 = 0.0;
    let mut worst_flipped: f64 = f64::NEG_INFINITY;
    for seed in 0..100u64 {
        let d = 2 + (seed % 3) as usize;
        let l = sample_lindblad(d, 1000 + seed);
        let c = check_conditions(&l).expect("conditions");
        let res = c.hermiticity_residual.max(c.normalization_residual).max(-c.ccp_margin);
        worst_residual = worst_residual.max(res);
        if res > 1e-10 {
            bad.push(format!("seed {seed}: residual {res:e}"));
        }
        let x = weakest_ccp_direction(&l, d);
        let p = ComplexMatrix::from_fn(d * d, |i, j| x[i] * x[j].conj()).scale_real(-0.1);
        let perturbed = &l + &gamma_reshuffle(&p).expect("square");
        let c2 = check_conditions(&perturbed).expect("conditions");
        worst_flipped = worst_flipped.max(c2.ccp_margin);
        if !(c.verdict(DEFAULT_TOL) && c2.ccp_margin < -DEFAULT_TOL && !c2.verdict(DEFAULT_TOL)) {
            bad.push(format!("seed {seed}: margin {:e} -> {:e}", c.ccp_margin, c2.ccp_margin));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "100 trials, worst residual {worst_residual:.2e}, largest perturbed margin {worst_flipped:.3}, {} failures{}",
            bad.len(),
            bad.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn classical_oracle() -> Outcome {
    let tol = DEFAULT_TOL;
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let (mut n, mut disagreements, mut gray) = (0, Vec::new(), 0);
    while n < 1000 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        if a + b <= 1e-3 {
            continue;
        }
        n += 1;
        let t = StochasticMatrix::new(2, vec![1.0 - a, b, a, 1.0 - b]).expect("stochastic");
        let det = 1.0 - a - b;
        let verdict = match decide_embeddable(&t, tol, 2) {
            Ok(r) => r.verdict,
            Err(e) => {
                disagreements.push(format!("a={a}, b={b}: {e}"));
                continue;
            }
        };
        let ok = if det > tol {
            verdict == Verdict::Markovian
        } else if det < -tol {
            verdict == Verdict::NonMarkovian
        } else {
            gray += 1;
            true
        };
        if !ok {
            disagreements.push(format!("a={a}, b={b}, 1-a-b={det:e}: {verdict}"));
        }
    }
    outcome(
        disagreements.is_empty(),
        format!(
            "1000 matrices, {} disagreements, {gray} in the gray band{}",
            disagreements.len(),
            disagreements.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn constructive_constants() -> Outcome {
    let inst = SatInstance::new(3, vec![[1, 2, 3]]).expect("instance");
    let red = match Reduction::build(&inst) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let r = Rational64::new;
    let mut constants: Vec<Rational64> = extract_encoding_inequalities(&red).iter().map(|q| q.constant).collect();
    constants.sort();
    constants.dedup();
    let mut want = vec![r(-1, 2), r(-7, 6), r(1, 2), r(-3, 2)];
    want.sort();
    let enc = inst.num_clauses() + inst.num_vars;
    let diag_ok = (0..enc).all(|p| red.s.encoding_block[p * enc + p] == if p < inst.num_clauses() { r(1, 2) } else { r(5, 6) });
    let shown: Vec<String> = constants.iter().map(ToString::to_string).collect();
    outcome(constants == want && diag_ok, format!("constants {{{}}}, S diagonals exact: {diag_ok}", shown.join(", ")))
}

/// Runs the three-way check over the corpus at `κ`; returns (all agree, detail).
fn corpus_verification(kappa: f64) -> (bool, String, Duration) {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let instances = reduction_corpus();
    for inst in &instances {
        match verify_reduction(inst, default_tolerance_with(inst, kappa)) {
            Ok(r) if r.agree => {}
            Ok(r) => mismatches.push(format!("{inst}: {}", r.disagreements.join("; "))),
            Err(e) => mismatches.push(format!("{inst}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{} instances, {} mismatches, {}{}",
        instances.len(),
        mismatches.len(),
        secs(elapsed),
        mismatches.first().map(|f| format!("; first: {f}")).unwrap_or_default()
    );
    (mismatches.is_empty(), detail, elapsed)
}

fn quantum_reduction() -> Outcome {
    let (ok, detail, elapsed) = corpus_verification(DEFAULT_KAPPA);
    outcome(ok && elapsed <= Duration::from_secs(1800), detail)
}

fn classical_reduction() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let instances = reduction_corpus();
    for inst in &instances {
        match verify_classical_reduction(inst, default_tolerance(inst)) {
            Ok(v) if v.agree && v.feasible == sat_brute_force(inst).map(|s| s.is_sat()).unwrap_or(!v.feasible) => {}
            Ok(v) => bad.push(format!("{inst}: feasible={} sat={}", v.feasible, v.sat.is_sat())),
            Err(e) => bad.push(format!("{inst}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && elapsed <= Duration::from_secs(60),
        format!("{} instances, {} mismatches, {}", instances.len(), bad.len(), secs(elapsed)),
    )
}

fn branch_closure() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let instances = reduction_corpus();
    let mut checked = 0;
    for inst in &instances {
        let bundle = match build_bundle(inst, default_tolerance(inst)) {
            Ok(b) => b,
            Err(e) => {
                bad.push(format!("{inst}: {e}"));
                continue;
            }
        };
        for m in binary(inst.num_vars) {
            let dist = match mat_exp(&bundle.reduction.branch(&m)) {
                Ok(x) => x.dist(bundle.e.matrix()),
                Err(_) => f64::INFINITY,
            };
            checked += 1;
            worst = worst.max(dist);
            if dist > 1e-7 {
                bad.push(format!("{inst}, m={m:?}: {dist:e}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} bundles, {checked} branches, worst ‖exp(L_m) − E‖ {worst:.2e}{}",
            instances.len(),
            bad.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn series(l_of_t: impl Fn(f64) -> ComplexMatrix) -> SnapshotSeries {
    let entries = [0.5, 1.0, 2.0].iter().map(|&t| (t, Snapshot::Quantum(channel(&l_of_t(t))))).collect();
    SnapshotSeries::new(entries).expect("valid series")
}

fn multi_snapshot() -> Outcome {
    let tol = DEFAULT_TOL;
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let d = 2 + (seed % 2) as usize;
        let l = sample_lindblad(d, 5000 + seed);
        match fit_generator_series(&series(|t| l.scale(C64::new(t, 0.0))), tol, 2) {
            Ok(r) if r.verdict == Verdict::Markovian => {
                let dist = r.witness_l.as_ref().expect("witness").dist(&l);
                worst = worst.max(dist);
                if dist > 1e-6 {
                    bad.push(format!("seed {seed}: recovered at distance {dist:e}"));
                }
            }
            Ok(r) => bad.push(format!("seed {seed}: {}", r.verdict)),
            Err(e) => bad.push(format!("seed {seed}: {e}")),
        }
        let other = sample_lindblad(d, 9000 + seed);
        let mixed = series(|t| if t < 1.0 { l.scale(C64::new(t, 0.0)) } else { other.scale(C64::new(t, 0.0)) });
        match fit_generator_series(&mixed, tol, 2) {
            Ok(r) if r.verdict == Verdict::Markovian => bad.push(format!("seed {seed}: mixed series accepted")),
            Ok(_) => {}
            Err(e) => bad.push(format!("seed {seed}: mixed series error {e}")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "50 generators, worst ‖L̂ − L‖ {worst:.2e}, {} failures{}",
            bad.len(),
            bad.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn tolerance_scaling() -> Outcome {
    let mk = |v: usize, c: usize| SatInstance { num_vars: v, clauses: vec![[1, 2, 3]; c] };
    let mut worst_ratio: f64 = 0.0;
    for v1 in 1..=12 {
        for c1 in 0..=8 {
            for v2 in 1..=12 {
                for c2 in 0..=8 {
                    let ratio = default_tolerance(&mk(v1, c1)) / default_tolerance(&mk(v2, c2));
                    let want = (v2 as f64 / v1 as f64) * ((c2 + 2 * v2) as f64 / (c1 + 2 * v1) as f64).powi(3);
                    worst_ratio = worst_ratio.max((ratio / want - 1.0).abs());
                }
            }
        }
    }
    let ratios_ok = worst_ratio <= 8.0 * f64::EPSILON;
    let mut details = vec![format!("worst relative ratio error {worst_ratio:.1e}")];
    let mut ok = ratios_ok;
    for factor in [10f64.powf(-0.5), 10f64.powf(0.5)] {
        let kappa = DEFAULT_KAPPA * factor;
        let (agree, detail, _) = corpus_verification(kappa);
        ok &= agree;
        details.push(format!("κ = {kappa:.2e}: {detail}"));
    }
    outcome(ok, details.join("; "))
}

fn main() {
    // Let libtest-style filters (`cargo test -- name`) skip this target.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("generator round-trip", generator_round_trip),
        ("condition equivalence", condition_equivalence),
        ("classical 2x2 oracle", classical_oracle),
        ("constructive constants", constructive_constants),
        ("reduction equivalence (quantum)", quantum_reduction),
        ("reduction equivalence (classical)", classical_reduction),
        ("branch closure", branch_closure),
        ("multi-snapshot consistency", multi_snapshot),
        ("tolerance scaling", tolerance_scaling),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {} ({})",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            secs(start.elapsed())
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
