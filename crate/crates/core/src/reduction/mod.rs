//! Encoding of monotone 1-in-3SAT instances into quantum snapshots (and
//! classical generators) whose Markovianity is equivalent to satisfiability,
//! plus a brute-force oracle and an end-to-end verification harness.
//!
//! Each variable `c` gets a shift `A^(c)`; the branch `m ∈ {0,1}^V` of
//! `L0 + Σ_c m_c A^(c)` is a Lindblad generator exactly when `m` is a
//! satisfying assignment.

pub mod construct;
pub mod export;
pub mod sat;
pub mod verify;

use std::path::PathBuf;

use serde::Serialize;

use crate::channel::{validate_cpt, ChannelError, Snapshot, SnapshotSeries, TransferMatrix, ValidationReport};
use crate::matkernel::{mat_exp, ComplexMatrix, MatError};

pub use construct::{assemble_qpb, build_clause_vectors, build_s, detuning, Assembled, ClauseVectors, RealMatrix, SMatrix};
pub use export::export_bundle;
pub use sat::{canonical_unsat, corpus, parse_sat, sat_brute_force, SatInstance, SatResult, MAX_BRUTE_FORCE_VARS};
pub use verify::{
    classical_reduction, default_tolerance, default_tolerance_with, extract_encoding_inequalities, reduced_ccp_check,
    verify_classical_reduction, verify_reduction, ClassicalVerification, EncodingInequality, ReducedCheck, VerificationReport,
    DEFAULT_KAPPA, MAX_VERIFY_CLAUSES, MAX_VERIFY_VARS,
};

/// Largest Hilbert dimension `d` for which dense d²×d² snapshots are built.
pub const MAX_HILBERT_DIM: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid clause {clause}: {message}")]
    InvalidClause { clause: usize, message: String },
    #[error("instance too large (V={vars}, C={clauses}): {reason}")]
    TooLarge { vars: usize, clauses: usize, reason: String },
    #[error("column-sum balancing did not converge after {rounds} rounds")]
    BalancingFailed { rounds: u32 },
    #[error("construction invariant violated: {0}")]
    Construction(String),
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// All small artifacts of the reduction; the d²×d² Liouvillians are built on demand.
#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub instance: SatInstance,
    pub vectors: ClauseVectors,
    pub s: SMatrix,
    pub mats: Assembled,
    /// Time scale `τ = 1/(2N)`: makes the spectrum of every `A^(c)` equal `{0, ±2πi}`.
    pub tau: f64,
    /// Hilbert dimension `d = 4(C + 2V + 1)`.
    pub d: usize,
}

impl Reduction {
    /// Builds and checks the construction invariants: orthogonal equal-norm clause
    /// vectors, zero column sums of `Q`, and nonnegative worst-case values of
    /// every non-encoding entry.
    pub fn build(inst: &SatInstance) -> Result<Self, ReductionError> {
        let vectors = build_clause_vectors(inst);
        if vectors.gram_residual > 1e-9 {
            return Err(ReductionError::Construction(format!("Gram residual {:e}", vectors.gram_residual)));
        }
        let s = build_s(inst, &vectors)?;
        let mats = assemble_qpb(inst, &vectors, &s);
        let d = mats.q.dim();
        let red = Self { instance: inst.clone(), tau: 0.5 / vectors.norm_sq as f64, vectors, s, mats, d };
        let colres = red.column_sum_residual();
        if colres > 1e-10 {
            return Err(ReductionError::Construction(format!("column sums of Q are not zero (residual {colres:e})")));
        }
        let fm = red.filtering_margin();
        if fm < 0.0 {
            return Err(ReductionError::Construction(format!("filtering margin {fm:e} is negative")));
        }
        Ok(red)
    }

    /// `max_j |Σ_i Q_ij|`, i.e. `‖wᵀQ‖_∞·√d`.
    pub fn column_sum_residual(&self) -> f64 {
        let q = &self.mats.q;
        (0..self.d).map(|j| (0..self.d).map(|i| q.get(i, j)).sum::<f64>().abs()).fold(0.0, f64::max)
    }

    /// Whether `(i, j)` is a black square of a clause or variable coordinate.
    pub fn is_encoding_position(&self, i: usize, j: usize) -> bool {
        let enc = self.instance.num_clauses() + self.instance.num_vars;
        i / 4 == j / 4 && i / 4 < enc && i % 2 != j % 2
    }

    /// Worst case over `m ∈ {0,1}^V` of `Q_ij + Σ_c m_c B^(c)_ij`, minimized over
    /// the off-diagonal non-encoding positions.
    pub fn filtering_margin(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..self.d {
            for j in 0..self.d {
                if i == j || self.is_encoding_position(i, j) {
                    continue;
                }
                let v = self.mats.q.get(i, j) + self.mats.b_c.iter().map(|b| b.get(i, j).min(0.0)).sum::<f64>();
                worst = worst.min(v);
            }
        }
        worst
    }

    /// `Q + Σ_c m_c B^(c)`.
    pub fn reduced_matrix(&self, m: &[i64]) -> RealMatrix {
        let q = &self.mats.q;
        RealMatrix::from_fn(self.d, |i, j| {
            q.get(i, j) + m.iter().zip(&self.mats.b_c).map(|(&mc, b)| mc as f64 * b.get(i, j)).sum::<f64>()
        })
    }

    pub fn l0(&self) -> ComplexMatrix {
        construct::lift(&self.mats.q, Some(&self.mats.p), self.tau)
    }

    /// `A^(c)` for 0-based variable `c`.
    pub fn shift(&self, c: usize) -> ComplexMatrix {
        construct::lift(&self.mats.b_c[c], None, self.tau)
    }

    /// `L0 + Σ_c m_c A^(c)`.
    pub fn branch(&self, m: &[i64]) -> ComplexMatrix {
        construct::lift(&self.reduced_matrix(m), Some(&self.mats.p), self.tau)
    }

    fn check_dense_size(&self) -> Result<(), ReductionError> {
        if self.d > MAX_HILBERT_DIM {
            return Err(ReductionError::TooLarge {
                vars: self.instance.num_vars,
                clauses: self.instance.num_clauses(),
                reason: format!("Hilbert dimension {} exceeds the dense-snapshot cap {MAX_HILBERT_DIM}", self.d),
            });
        }
        Ok(())
    }
}

/// `E = exp(L0)`.
pub fn emit_snapshot(red: &Reduction) -> Result<TransferMatrix, ReductionError> {
    red.check_dense_size()?;
    Ok(TransferMatrix::new(mat_exp(&red.l0())?)?)
}

/// `{(t, exp(t·L0))}`.
pub fn emit_series(red: &Reduction, times: &[f64]) -> Result<SnapshotSeries, ReductionError> {
    red.check_dense_size()?;
    let l0 = red.l0();
    let entries = times
        .iter()
        .map(|&t| Ok((t, Snapshot::Quantum(TransferMatrix::new(mat_exp(&l0.scale_real(t))?)?))))
        .collect::<Result<Vec<_>, ReductionError>>()?;
    Ok(SnapshotSeries::new(entries)?)
}

/// A reduction together with its snapshot and the snapshot's CPT check.
pub struct ReductionBundle {
    pub reduction: Reduction,
    pub e: TransferMatrix,
    pub cp_check: ValidationReport,
}

pub fn build_bundle(inst: &SatInstance, tol: f64) -> Result<ReductionBundle, ReductionError> {
    let reduction = Reduction::build(inst)?;
    let e = emit_snapshot(&reduction)?;
    let cp_check = validate_cpt(&e, tol);
    Ok(ReductionBundle { reduction, e, cp_check })
}
