use crate::channel::{validate_cpt, TransferMatrix};
use crate::matkernel::{mat_exp, ComplexMatrix, DEFAULT_DEGENERACY_TOL};
use crate::report::{band, Band, Cause, Conditions, GeneratorReport, Verdict, GRAY_FACTOR};

use super::conditions::check_conditions;
use super::family::{build_branch_family, BranchFamily};
use super::search::{search, BranchBox, Eval, Evaluated, MAX_BRANCHES};

pub const DEFAULT_BRANCH_BOUND: i64 = 2;

#[derive(Debug, thiserror::Error)]
pub enum DecideError {
    #[error("snapshot is not a valid CPT map at tol {tol:e}:\n{report}")]
    InvalidSnapshot { tol: f64, report: crate::channel::ValidationReport },
    #[error("branch bound must be non-negative")]
    NegativeBound,
}

/// Search options shared by the quantum entry points.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub tol: f64,
    /// Relative eigenvalue separation for the branch family.
    pub degeneracy_tol: f64,
    /// Skip full evaluation of branches whose population rates already violate
    /// condition (iii) beyond the gray band. Exact: never changes the verdict.
    pub prune: bool,
}

impl SearchOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, degeneracy_tol: DEFAULT_DEGENERACY_TOL, prune: true }
    }
}

/// Lower bound on the violation of `L`: the ccp margin never exceeds the smallest
/// real part of a population transfer rate `L_{(i,i),(j,j)}`, `i ≠ j`, because
/// `|i,j⟩` is orthogonal to `ω`.
pub(crate) struct RateBound {
    idx: Vec<(usize, usize)>,
    base: Vec<f64>,
    per_shift: Vec<Vec<f64>>,
}

impl RateBound {
    pub fn new(f: &BranchFamily) -> Self {
        let d = f.d;
        let idx: Vec<(usize, usize)> =
            (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i * d + i, j * d + j))).collect();
        let base = idx.iter().map(|&p| f.l0[p].re).collect();
        let per_shift = f.shifts.iter().map(|a| idx.iter().map(|&p| a[p].re).collect()).collect();
        Self { idx, base, per_shift }
    }

    /// Bound for the rescaled family `s · L_m`, `s > 0`.
    pub fn scaled(mut self, s: f64) -> Self {
        self.base.iter_mut().chain(self.per_shift.iter_mut().flatten()).for_each(|x| *x *= s);
        self
    }

    pub fn lower_bound(&self, m: &[i64]) -> f64 {
        let mut worst = f64::INFINITY;
        for k in 0..self.idx.len() {
            let mut v = self.base[k];
            for (c, &mc) in m.iter().enumerate() {
                v += mc as f64 * self.per_shift[c][k];
            }
            worst = worst.min(v);
        }
        (-worst).max(0.0)
    }
}

/// A parametrized set of candidate generators `m ↦ L_m`.
pub(crate) struct BranchSource<'a> {
    pub pairs: usize,
    pub branch: &'a (dyn Fn(&[i64]) -> ComplexMatrix + Sync),
    /// Exact pruning bound; `None` disables pruning.
    pub rate_bound: Option<RateBound>,
}

/// Runs the branch search over `bx`. Candidates are rebuilt on demand, so at
/// most one dense generator per worker is alive at a time.
pub(crate) fn search_branches(
    e: &ComplexMatrix,
    src: &BranchSource<'_>,
    bx: &BranchBox,
    tol: f64,
    report: &mut GeneratorReport,
    mut accept: impl FnMut(&ComplexMatrix) -> bool,
) {
    report.pairs = src.pairs;
    if bx.size() > MAX_BRANCHES {
        report.verdict = Verdict::Indeterminate;
        report.cause = Some(Cause::SearchSpaceTooLarge { size: bx.size() });
        report.note = "branch box exceeds the enumeration cap".into();
        return;
    }
    let mut confirmed: Option<ComplexMatrix> = None;
    let outcome = search(
        bx,
        tol,
        |m| {
            if let Some(bound) = &src.rate_bound {
                let lb = bound.lower_bound(m);
                if lb > GRAY_FACTOR * tol {
                    return Eval::Pruned { lower_bound: lb };
                }
            }
            match check_conditions(&(src.branch)(m)) {
                Ok(c) => Eval::Full(Evaluated { m: m.to_vec(), conditions: Conditions::Lindblad(c), witness: () }),
                Err(_) => Eval::Pruned { lower_bound: f64::INFINITY },
            }
        },
        |ev| {
            let l = (src.branch)(&ev.m);
            let ok = accept(&l);
            if ok {
                confirmed = Some(l);
            }
            ok
        },
    );
    report.branches_total = outcome.total;
    report.branches_evaluated = outcome.evaluated;
    report.branches_pruned = outcome.pruned;
    if let (Some(ev), Some(l)) = (outcome.feasible, confirmed) {
        report.verdict = Verdict::Markovian;
        report.witness_m = Some(ev.m);
        report.conditions = Some(ev.conditions);
        report.closure_residual = mat_exp(&l).ok().map(|x| x.dist(e));
        report.witness_l = Some(l);
        return;
    }
    let best = outcome.best.or_else(|| {
        if outcome.evaluated != 0 {
            return None;
        }
        let m = vec![0; src.pairs];
        check_conditions(&(src.branch)(&m)).ok().map(|c| Evaluated { m, conditions: Conditions::Lindblad(c), witness: () })
    });
    report.verdict = Verdict::NonMarkovian;
    report.note = if outcome.rejected > 0 {
        format!("non-Markovian within the searched branch box ({} condition-feasible branches failed the round-trip check)", outcome.rejected)
    } else {
        "non-Markovian within the searched branch box".into()
    };
    if let Some(b) = best {
        if band(b.conditions.violation(), tol) != Band::Infeasible {
            report.verdict = Verdict::Indeterminate;
            report.note = "best branch lies in the weak-membership gray band".into();
        }
        report.conditions = Some(b.conditions);
    }
}

/// Decides whether `E = exp(L)` for a Lindblad generator `L` among the branches
/// `m ∈ [−bound, bound]^pairs`. The first feasible branch in lexicographic order is
/// returned after confirming `‖exp(L_m) − E‖_F ≤ tol · max(1, ‖E‖_F)`.
pub fn decide_markovian(e: &TransferMatrix, tol: f64, branch_bound: i64) -> Result<GeneratorReport, DecideError> {
    decide_markovian_with(e, &SearchOptions::new(tol), branch_bound)
}

pub fn decide_markovian_with(e: &TransferMatrix, opts: &SearchOptions, branch_bound: i64) -> Result<GeneratorReport, DecideError> {
    if branch_bound < 0 {
        return Err(DecideError::NegativeBound);
    }
    let tol = opts.tol;
    let validation = validate_cpt(e, tol);
    if !validation.valid {
        return Err(DecideError::InvalidSnapshot { tol, report: validation });
    }
    let em = e.matrix();
    let family = match build_branch_family(em, opts.degeneracy_tol) {
        Ok(f) => f,
        Err(err) => return Ok(GeneratorReport::from_cause("quantum", tol, branch_bound, err.into_cause())),
    };
    let mut report = GeneratorReport::empty("quantum", tol, branch_bound);
    let bx = BranchBox::symmetric(family.pairs(), branch_bound);
    let closure_tol = tol * em.norm_fro().max(1.0);
    let src = BranchSource {
        pairs: family.pairs(),
        branch: &|m: &[i64]| family.branch(m),
        rate_bound: opts.prune.then(|| RateBound::new(&family)),
    };
    search_branches(em, &src, &bx, tol, &mut report, |l| closes(l, em, closure_tol));
    Ok(report)
}

pub(crate) fn closes(l: &ComplexMatrix, e: &ComplexMatrix, tol: f64) -> bool {
    mat_exp(l).map(|x| x.dist(e) <= tol).unwrap_or(false)
}
