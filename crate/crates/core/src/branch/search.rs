//! Exhaustive, deterministic enumeration of branch integers.
//!
//! The box `[lo_1, hi_1] × … × [lo_p, hi_p]` is enumerated in lexicographic
//! order (first coordinate slowest, most negative values first). Candidates are
//! evaluated in parallel chunks; within a chunk the feasible candidate with the
//! smallest index wins, so the outcome equals that of a sequential scan.

use rayon::prelude::*;

use crate::report::{band, Band, Conditions};

/// Hard cap on the number of branches in one box.
pub const MAX_BRANCHES: f64 = 5e7;

const CHUNK: u64 = 512;

#[derive(Clone, Debug)]
pub struct BranchBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl BranchBox {
    pub fn symmetric(pairs: usize, bound: i64) -> Self {
        Self { lo: vec![-bound; pairs], hi: vec![bound; pairs] }
    }

    pub fn binary(pairs: usize) -> Self {
        Self { lo: vec![0; pairs], hi: vec![1; pairs] }
    }

    /// Number of branches as a float (may exceed `u64`).
    pub fn size(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as f64).product()
    }

    /// The `k`-th vector in lexicographic order.
    pub fn nth(&self, mut k: u64) -> Vec<i64> {
        let p = self.lo.len();
        let mut m = vec![0; p];
        for c in (0..p).rev() {
            let w = (self.hi[c] - self.lo[c] + 1) as u64;
            m[c] = self.lo[c] + (k % w) as i64;
            k /= w;
        }
        m
    }
}

/// One evaluated candidate.
#[derive(Clone, Debug)]
pub struct Evaluated<W> {
    pub m: Vec<i64>,
    pub conditions: Conditions,
    pub witness: W,
}

pub enum Eval<W> {
    /// A cheap necessary condition already proves a violation above the gray band.
    Pruned { lower_bound: f64 },
    Full(Evaluated<W>),
}

#[derive(Debug)]
pub struct SearchOutcome<W> {
    /// Lexicographically smallest feasible (and confirmed) candidate.
    pub feasible: Option<Evaluated<W>>,
    /// Candidate with the smallest violation among those fully evaluated.
    pub best: Option<Evaluated<W>>,
    pub evaluated: u64,
    pub pruned: u64,
    /// Feasible candidates rejected by the confirmation step.
    pub rejected: u64,
    pub total: u64,
}

/// Scans the box. `eval` returns the candidate's conditions (or a pruning bound);
/// `confirm` is run on feasible candidates in order and may reject them (e.g. a
/// failed round trip), in which case the scan continues.
pub fn search<W: Send>(
    bx: &BranchBox,
    tol: f64,
    eval: impl Fn(&[i64]) -> Eval<W> + Sync,
    mut confirm: impl FnMut(&Evaluated<W>) -> bool,
) -> SearchOutcome<W> {
    let total = bx.size() as u64;
    let mut out = SearchOutcome { feasible: None, best: None, evaluated: 0, pruned: 0, rejected: 0, total };
    let mut start = 0u64;
    while start < total {
        let end = (start + CHUNK).min(total);
        let results: Vec<Eval<W>> = (start..end).into_par_iter().map(|k| eval(&bx.nth(k))).collect();
        for r in results {
            match r {
                Eval::Pruned { .. } => out.pruned += 1,
                Eval::Full(ev) => {
                    out.evaluated += 1;
                    let v = ev.conditions.violation();
                    let feasible = band(v, tol) == Band::Feasible;
                    if feasible && out.feasible.is_none() {
                        if confirm(&ev) {
                            out.feasible = Some(ev);
                        } else {
                            out.rejected += 1;
                        }
                        continue;
                    }
                    if out.feasible.is_none() && out.best.as_ref().is_none_or(|b| v < b.conditions.violation()) {
                        out.best = Some(ev);
                    }
                }
            }
        }
        if out.feasible.is_some() {
            break;
        }
        start = end;
    }
    out
}
