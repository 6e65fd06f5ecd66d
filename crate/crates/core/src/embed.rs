//! Classical embedding problem: is a stochastic matrix `T = exp(L)` for a rate
//! matrix `L` (nonnegative off-diagonals, zero column sums)?
//!
//! Real logarithms of `T` are `L0 + Σ_c m_c A^(c)` with `A^(c) = 2πi(Π_c − Π̄_c)`,
//! one per conjugate pair of eigenvalues (shifting the pair by `±2πi`); lone real
//! eigenvalues get no shift. A simple negative eigenvalue rules out every real
//! logarithm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::branch::decide::{closes, DecideError};
use crate::branch::family::{classify, pair, ZERO_REL};
use crate::branch::search::{search, BranchBox, Eval, Evaluated, MAX_BRANCHES};
use crate::channel::{validate_stochastic, StochasticMatrix};
use crate::matkernel::{mat_exp, mat_log_principal, BlockSchur, ComplexMatrix, MatError, C64, DEFAULT_DEGENERACY_TOL};
use crate::report::{band, Band, Cause, Conditions, GeneratorReport, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalGeneratorConditions {
    /// Smallest real part of an off-diagonal entry.
    pub offdiag_min: f64,
    /// Largest absolute column sum.
    pub column_sum_residual: f64,
    /// Largest absolute imaginary part.
    pub realness_residual: f64,
}

impl ClassicalGeneratorConditions {
    pub fn violation(&self) -> f64 {
        (-self.offdiag_min).max(self.column_sum_residual).max(self.realness_residual).max(0.0)
    }

    pub fn verdict(&self, tol: f64) -> bool {
        self.offdiag_min >= -tol && self.column_sum_residual <= tol && self.realness_residual <= tol
    }
}

/// Conditions on a (possibly complex) candidate generator.
pub fn check_classical_generator(l: &ComplexMatrix) -> ClassicalGeneratorConditions {
    let n = l.dim();
    let mut offdiag_min = f64::INFINITY;
    let mut realness: f64 = 0.0;
    let mut colsum: f64 = 0.0;
    for j in 0..n {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            let z = l[(i, j)];
            s += z;
            realness = realness.max(z.im.abs());
            if i != j {
                offdiag_min = offdiag_min.min(z.re);
            }
        }
        colsum = colsum.max(s.norm());
    }
    if n < 2 {
        offdiag_min = 0.0;
    }
    ClassicalGeneratorConditions { offdiag_min, column_sum_residual: colsum, realness_residual: realness }
}

/// Real-matrix convenience wrapper around [`check_classical_generator`].
pub fn check_classical_generator_real(dim: usize, data: &[f64]) -> Result<ClassicalGeneratorConditions, MatError> {
    Ok(check_classical_generator(&ComplexMatrix::from_real(dim, data)?))
}

/// Real-logarithm branch family of a real matrix.
pub struct RealBranchFamily {
    pub l0: ComplexMatrix,
    pub shifts: Vec<ComplexMatrix>,
}

pub fn build_real_branch_family(t: &ComplexMatrix, tol: f64) -> Result<RealBranchFamily, Cause> {
    let bs = BlockSchur::new(t).map_err(|e| Cause::Numerical { message: e.to_string() })?;
    let norm = t.norm_fro();
    let spec = classify(&bs, norm, tol)?;
    let l0 = mat_log_principal(t, ZERO_REL * norm).map_err(|e| match e {
        MatError::LogUndefined { eigenvalue } => Cause::LogUndefined { eigenvalue: pair(eigenvalue) },
        e => Cause::Numerical { message: e.to_string() },
    })?;
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let shifts = spec
        .pairs
        .iter()
        .map(|&(lo, _)| {
            let (right, left) = bs.eigenpair(spec.entries[lo]);
            ComplexMatrix::from_fn(t.dim(), |i, j| {
                let p = right[i] * left[j];
                two_pi_i * (p - p.conj())
            })
        })
        .collect();
    Ok(RealBranchFamily { l0, shifts })
}

/// Decides embeddability of `T` over `m ∈ [−bound, bound]^pairs`; `Markovian` means embeddable.
pub fn decide_embeddable(t: &StochasticMatrix, tol: f64, branch_bound: i64) -> Result<GeneratorReport, DecideError> {
    if branch_bound < 0 {
        return Err(DecideError::NegativeBound);
    }
    let validation = validate_stochastic(t, tol);
    if !validation.valid {
        return Err(DecideError::InvalidSnapshot { tol, report: validation });
    }
    let tm = t.to_complex();
    let family = match build_real_branch_family(&tm, DEFAULT_DEGENERACY_TOL) {
        Ok(f) => f,
        Err(cause) => return Ok(GeneratorReport::from_cause("classical", tol, branch_bound, cause)),
    };
    let mut report = GeneratorReport::empty("classical", tol, branch_bound);
    report.pairs = family.shifts.len();
    let bx = BranchBox::symmetric(family.shifts.len(), branch_bound);
    if bx.size() > MAX_BRANCHES {
        report.cause = Some(Cause::SearchSpaceTooLarge { size: bx.size() });
        report.note = "branch box exceeds the enumeration cap".into();
        return Ok(report);
    }
    let closure_tol = tol * tm.norm_fro().max(1.0);
    let outcome = search(
        &bx,
        tol,
        |m| {
            let mut l = family.l0.clone();
            for (&mc, a) in m.iter().zip(&family.shifts) {
                l.axpy(C64::new(mc as f64, 0.0), a);
            }
            let c = check_classical_generator(&l);
            Eval::Full(Evaluated { m: m.to_vec(), conditions: Conditions::Classical(c), witness: l })
        },
        |ev| closes(&real_part(&ev.witness), &tm, closure_tol),
    );
    report.branches_total = outcome.total;
    report.branches_evaluated = outcome.evaluated;
    if let Some(ev) = outcome.feasible {
        let w = real_part(&ev.witness);
        report.verdict = Verdict::Markovian;
        report.witness_m = Some(ev.m);
        report.conditions = Some(ev.conditions);
        report.closure_residual = mat_exp(&w).ok().map(|x| x.dist(&tm));
        report.witness_l = Some(w);
        report.note = "embeddable".into();
        return Ok(report);
    }
    report.verdict = Verdict::NonMarkovian;
    report.note = "not embeddable within the searched branch box".into();
    if let Some(b) = outcome.best {
        if band(b.conditions.violation(), tol) != Band::Infeasible {
            report.verdict = Verdict::Indeterminate;
            report.note = "best branch lies in the weak-membership gray band".into();
        }
        report.conditions = Some(b.conditions);
    }
    Ok(report)
}

fn real_part(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.dim(), |i, j| C64::new(m[(i, j)].re, 0.0))
}
