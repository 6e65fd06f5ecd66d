//! Encoding inequalities, the reduced ccp feasibility check, and the three-way
//! (SAT ⇔ reduced inequalities ⇔ Markovian snapshot) verification.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::branch::decide::{closes, search_branches, BranchSource};
use crate::branch::BranchBox;
use crate::embed::check_classical_generator;
use crate::matkernel::{min_eigenvalue_of_hermitian, ComplexMatrix, C64};
use crate::report::{GeneratorReport, Verdict};

use super::construct::{Rational, RealMatrix};
use super::sat::{sat_brute_force, SatInstance, SatResult};
use super::{build_bundle, Reduction, ReductionBundle, ReductionError};

/// Constant in front of the `V⁻¹(C+2V)⁻³` precision scale.
pub const DEFAULT_KAPPA: f64 = 1e-3;
pub const MAX_VERIFY_VARS: usize = 12;
pub const MAX_VERIFY_CLAUSES: usize = 8;
/// Memory budget for concurrently evaluated dense branches.
const BRANCH_MEMORY_BUDGET: usize = 2 << 30;

pub fn default_tolerance(inst: &SatInstance) -> f64 {
    default_tolerance_with(inst, DEFAULT_KAPPA)
}

/// `κ · V⁻¹ · (C + 2V)⁻³`.
pub fn default_tolerance_with(inst: &SatInstance, kappa: f64) -> f64 {
    let v = inst.num_vars as f64;
    let c = inst.num_clauses() as f64;
    kappa / (v * (c + 2.0 * v).powi(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "index", rename_all = "snake_case")]
pub enum InequalitySource {
    /// 1-based clause index.
    Clause(usize),
    /// 1-based variable index.
    Variable(usize),
}

/// `Σ_c coeffs[c]·m_c ≥ constant`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EncodingInequality {
    pub source: InequalitySource,
    #[serde(serialize_with = "ser_rationals")]
    pub coeffs: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub constant: Rational,
}

fn ser_rational<S: Serializer>(x: &Rational, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&x.to_string())
}

fn ser_rationals<S: Serializer>(xs: &[Rational], ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_seq(xs.iter().map(|x| x.to_string()))
}

impl EncodingInequality {
    pub fn satisfied_by(&self, m: &[i64]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(m).map(|(c, &x)| c * x).sum();
        lhs >= self.constant
    }
}

impl fmt::Display for EncodingInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let sep = if first { "" } else { " " };
            let space = if first || sign.is_empty() { "" } else { " " };
            if mag.is_one() {
                write!(f, "{sep}{sign}{space}m{}", i + 1)?;
            } else {
                write!(f, "{sep}{sign}{space}{mag}·m{}", i + 1)?;
            }
            first = false;
        }
        write!(f, " >= {}", self.constant)
    }
}

const K2: [[i64; 2]; 2] = [[1, -1], [-1, 1]];
const Y2: [[i64; 2]; 2] = [[0, 1], [-1, 0]];

/// Reads the reduced ccp entries `Q_ij + Σ_c m_c B^(c)_ij ≥ 0` on the black
/// squares (`b ≠ b'`) of the diagonal blocks of clause coordinates and of
/// variable coordinates whose variable occurs in a clause, in exact arithmetic.
/// Coefficients are normalized to unit maximum magnitude; duplicates are dropped.
pub fn extract_encoding_inequalities(red: &Reduction) -> Vec<EncodingInequality> {
    let v = red.instance.num_vars;
    let c = red.instance.num_clauses();
    let enc = c + v;
    let ind = &red.vectors.indicators;
    let used: Vec<bool> = (0..v).map(|x| red.instance.clauses.iter().any(|cl| cl.contains(&(x + 1)))).collect();
    let mut out: Vec<EncodingInequality> = Vec::new();
    for p in 0..enc {
        let source = if p < c { InequalitySource::Clause(p + 1) } else { InequalitySource::Variable(p - c + 1) };
        if p >= c && !used[p - c] {
            continue;
        }
        let s_pp = red.s.encoding_block[p * enc + p];
        for a in 0..2 {
            for a2 in 0..2 {
                for (b, b2) in [(0, 1), (1, 0)] {
                    let sgn = K2[a][a2] * Y2[b][b2];
                    // Q entry: S_pp + Σ_x ind_xp·K·(−Y/3); B^(x) entry: ind_xp·K·Y.
                    let mut q = s_pp;
                    let mut beta = vec![Rational::zero(); v];
                    for x in 0..v {
                        if ind[x][p] == 1 {
                            q -= Rational::new(sgn, 3);
                            beta[x] = Rational::from_integer(sgn);
                        }
                    }
                    let g = beta.iter().map(|b| b.abs()).max().unwrap_or_else(Rational::zero);
                    if g.is_zero() {
                        continue;
                    }
                    let ineq = EncodingInequality { source, coeffs: beta.iter().map(|b| b / g).collect(), constant: -q / g };
                    if !out.contains(&ineq) {
                        out.push(ineq);
                    }
                }
            }
        }
    }
    out
}

/// Result of the reduced ccp feasibility check over `m ∈ {0,1}^V`.
#[derive(Clone, Debug, Serialize)]
pub struct ReducedCheck {
    pub feasible: bool,
    /// First feasible `m` in lexicographic order.
    pub witness: Option<Vec<i64>>,
    /// Largest (over m) smallest off-diagonal entry of `Q + Σ m_c B^(c)`.
    pub best_entry_margin: f64,
    /// Smallest eigenvalue of `(I − wwᵀ)(diag Q + offdiag P)(I − wwᵀ)` on the complement of `w`.
    pub psd_margin: f64,
}

fn min_offdiag(m: &RealMatrix) -> f64 {
    let d = m.dim();
    let mut worst = f64::INFINITY;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                worst = worst.min(m.get(i, j));
            }
        }
    }
    if worst.is_finite() { worst } else { 0.0 }
}

fn psd_margin(red: &Reduction) -> f64 {
    let d = red.d;
    let h = ComplexMatrix::from_fn(d, |i, j| C64::new(if i == j { red.mats.q.get(i, i) } else { red.mats.p.get(i, j) }, 0.0));
    // Π H Π + c·wwᵀ with c above the spectrum of ΠHΠ isolates the complement of w.
    let w = 1.0 / (d as f64).sqrt();
    let hw: Vec<f64> = (0..d).map(|i| (0..d).map(|j| h[(i, j)].re * w).sum()).collect();
    let whw: f64 = hw.iter().map(|x| x * w).sum();
    let lift = h.norm_fro() + 1.0;
    let c = ComplexMatrix::from_fn(d, |i, j| C64::new(h[(i, j)].re - hw[i] * w - w * hw[j] + w * w * whw + lift * w * w, 0.0));
    min_eigenvalue_of_hermitian(&c).unwrap_or(f64::NEG_INFINITY)
}

fn binary_vectors(v: usize) -> impl Iterator<Item = Vec<i64>> {
    let bx = BranchBox::binary(v);
    (0..bx.size() as u64).map(move |k| bx.nth(k))
}

pub fn reduced_ccp_check(red: &Reduction, tol: f64) -> ReducedCheck {
    let psd = psd_margin(red);
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    for m in binary_vectors(red.instance.num_vars) {
        let margin = min_offdiag(&red.reduced_matrix(&m));
        best = best.max(margin);
        if margin >= -tol && psd >= -tol {
            witness = Some(m);
            break;
        }
    }
    ReducedCheck { feasible: witness.is_some(), witness, best_entry_margin: best, psd_margin: psd }
}

fn check_caps(inst: &SatInstance) -> Result<(), ReductionError> {
    if inst.num_vars > MAX_VERIFY_VARS || inst.num_clauses() > MAX_VERIFY_CLAUSES {
        return Err(ReductionError::TooLarge {
            vars: inst.num_vars,
            clauses: inst.num_clauses(),
            reason: format!("verification is capped at V ≤ {MAX_VERIFY_VARS}, C ≤ {MAX_VERIFY_CLAUSES}"),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub instance: SatInstance,
    pub tolerance: f64,
    pub hilbert_dim: usize,
    /// (a) brute force.
    pub sat: SatResult,
    /// (b) reduced ccp inequalities.
    pub reduced: ReducedCheck,
    /// (c) branch search on the snapshot over the constructed family, `m ∈ {0,1}^V`
    /// (the witness matrix is dropped).
    pub markov: GeneratorReport,
    /// Whether the snapshot passed the CPT check at `tolerance`.
    pub snapshot_cpt: bool,
    pub agree: bool,
    pub disagreements: Vec<String>,
}

/// Runs `f` on a thread pool small enough that concurrently evaluated dense
/// branches of `bytes_per_task` fit the memory budget.
fn with_bounded_pool<R: Send>(bytes_per_task: usize, f: impl FnOnce() -> R + Send) -> R {
    let fit = (BRANCH_MEMORY_BUDGET / bytes_per_task.max(1)).max(1);
    let threads = rayon::current_num_threads().min(fit);
    if threads == rayon::current_num_threads() {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Check (c): the constructed family `L0 + Σ m_c A^(c)`, `m ∈ {0,1}^V`, searched
/// without pruning, with the usual round-trip confirmation against `E`.
fn markov_check(bundle: &ReductionBundle, tol: f64) -> GeneratorReport {
    let red = &bundle.reduction;
    let e = bundle.e.matrix();
    let v = red.instance.num_vars;
    let mut report = GeneratorReport::empty("quantum", tol, 1);
    let bx = BranchBox::binary(v);
    let closure_tol = tol * e.norm_fro().max(1.0);
    let branch = |m: &[i64]| red.branch(m);
    let src = BranchSource { pairs: v, branch: &branch, rate_bound: None };
    // Per task: the branch, its reshuffle, the compressed Hermitian part and an exponential.
    let dense = e.dim() * e.dim() * std::mem::size_of::<C64>();
    with_bounded_pool(4 * dense, || search_branches(e, &src, &bx, tol, &mut report, |l| closes(l, e, closure_tol)));
    report.witness_l = None;
    report.note = format!("{} (constructed branch family, m ∈ {{0,1}}^{v})", report.note);
    report
}

/// Three-way cross-check: (a) brute-force SAT, (b) reduced ccp inequalities,
/// (c) Markovianity of the emitted snapshot over `m ∈ {0,1}^V`.
pub fn verify_reduction(inst: &SatInstance, tol: f64) -> Result<VerificationReport, ReductionError> {
    check_caps(inst)?;
    let sat = sat_brute_force(inst)?;
    let bundle = build_bundle(inst, tol)?;
    let reduced = reduced_ccp_check(&bundle.reduction, tol);
    let markov = markov_check(&bundle, tol);
    let mut disagreements = Vec::new();
    let is_sat = sat.is_sat();
    if reduced.feasible != is_sat {
        disagreements.push(format!(
            "reduced inequalities {} but instance is {}",
            if reduced.feasible { "feasible" } else { "infeasible" },
            if is_sat { "satisfiable" } else { "unsatisfiable" }
        ));
    }
    let expected = if is_sat { Verdict::Markovian } else { Verdict::NonMarkovian };
    if markov.verdict != expected {
        disagreements.push(format!("snapshot verdict {} but expected {expected}", markov.verdict));
    }
    for (name, w) in [("reduced", &reduced.witness), ("snapshot", &markov.witness_m)] {
        if let Some(m) = w {
            let assignment: Vec<bool> = m.iter().map(|&x| x == 1).collect();
            if !inst.satisfied_by(&assignment) {
                disagreements.push(format!("{name} witness {m:?} is not a satisfying assignment"));
            }
        }
    }
    Ok(VerificationReport {
        instance: inst.clone(),
        tolerance: tol,
        hilbert_dim: bundle.reduction.d,
        sat,
        reduced,
        markov,
        snapshot_cpt: bundle.cp_check.valid,
        agree: disagreements.is_empty(),
        disagreements,
    })
}

/// `Q` and `B^(c)` of the reduction, read as a classical rate matrix family.
pub fn classical_reduction(inst: &SatInstance) -> Result<(RealMatrix, Vec<RealMatrix>), ReductionError> {
    let red = Reduction::build(inst)?;
    Ok((red.mats.q, red.mats.b_c))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalVerification {
    pub instance: SatInstance,
    pub tolerance: f64,
    pub sat: SatResult,
    /// Some `m ∈ {0,1}^V` makes `Q + Σ m_c B^(c)` a classical generator.
    pub feasible: bool,
    pub witness: Option<Vec<i64>>,
    /// Smallest constraint violation over `m`.
    pub best_violation: f64,
    pub agree: bool,
}

pub fn verify_classical_reduction(inst: &SatInstance, tol: f64) -> Result<ClassicalVerification, ReductionError> {
    check_caps(inst)?;
    let sat = sat_brute_force(inst)?;
    let red = Reduction::build(inst)?;
    let mut best = f64::INFINITY;
    let mut witness = None;
    for m in binary_vectors(inst.num_vars) {
        let c = check_classical_generator(&red.reduced_matrix(&m).to_complex());
        best = best.min(c.violation());
        if c.verdict(tol) {
            witness = Some(m);
            break;
        }
    }
    let feasible = witness.is_some();
    let agree = feasible == sat.is_sat()
        && witness.as_ref().is_none_or(|m| inst.satisfied_by(&m.iter().map(|&x| x == 1).collect::<Vec<_>>()));
    Ok(ClassicalVerification { instance: inst.clone(), tolerance: tol, sat, feasible, witness, best_violation: best, agree })
}
