//! Branches of the logarithm of a snapshot.
//!
//! For a Hermiticity-preserving `E` with simple nonreal spectrum, every
//! logarithm that is again Hermiticity-preserving has the form
//! `L_m = L0 + Σ_c m_c A^(c)`, where `L0` is the principal logarithm and
//! `A^(c) = 2πi (Π_c − F(Π_c))` with `Π_c = |l_c⟩⟨r_c|` the spectral projector
//! of the member of the c-th conjugate pair lying in the lower half-plane.
//! Adding `A^(c)` moves that eigenvalue's logarithm up by `2πi` and its
//! conjugate partner's down by `2πi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::matkernel::{
    flip_op, mat_log_principal, sqrt_dim, BlockSchur, ComplexMatrix, MatError, SpectralEntry, C64, DEFAULT_DEGENERACY_TOL,
};
use crate::report::Cause;

/// Eigenvalues with `|λ| ≤ ZERO_REL · ‖E‖_F` are treated as exact zeros.
pub const ZERO_REL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairInfo {
    /// Position of the lower-half-plane member in the spectrum listing.
    pub lower: usize,
    /// Position of its conjugate partner.
    pub upper: usize,
    pub eigenvalue: [f64; 2],
}

#[derive(Clone, Debug)]
pub struct BranchFamily {
    pub d: usize,
    pub l0: ComplexMatrix,
    pub shifts: Vec<ComplexMatrix>,
    pub pair_info: Vec<PairInfo>,
}

impl BranchFamily {
    /// `L0 + Σ_c m_c A^(c)`.
    pub fn branch(&self, m: &[i64]) -> ComplexMatrix {
        assert_eq!(m.len(), self.shifts.len());
        let mut l = self.l0.clone();
        for (&mc, a) in m.iter().zip(&self.shifts) {
            if mc != 0 {
                l.axpy(C64::new(mc as f64, 0.0), a);
            }
        }
        l
    }

    pub fn pairs(&self) -> usize {
        self.shifts.len()
    }
}

/// Failure to build a family; converted into a structured [`Cause`].
#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("{0}")]
    Cause(Cause),
    #[error(transparent)]
    Matrix(#[from] MatError),
}

impl FamilyError {
    pub fn into_cause(self) -> Cause {
        match self {
            FamilyError::Cause(c) => c,
            FamilyError::Matrix(MatError::LogUndefined { eigenvalue }) => Cause::LogUndefined { eigenvalue: pair(eigenvalue) },
            FamilyError::Matrix(MatError::DegenerateSpectrum { a, b }) => Cause::DegenerateSpectrum { a: pair(a), b: pair(b) },
            FamilyError::Matrix(e) => Cause::Numerical { message: e.to_string() },
        }
    }
}

pub(crate) fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Kind {
    Zero,
    PositiveReal,
    NegativeReal,
    Lower,
    Upper,
}

pub(crate) struct Spectrum {
    pub entries: Vec<SpectralEntry>,
    pub pairs: Vec<(usize, usize)>,
}

/// Classifies the spectrum of a snapshot and pairs its nonreal eigenvalues.
///
/// `deg_tol` is relative: `λ` counts as real when `|Im λ| ≤ deg_tol·|λ|`, and two
/// eigenvalues coincide when `|λ_a − λ_b| ≤ deg_tol·max(|λ_a|, |λ_b|)`.
pub(crate) fn classify(bs: &BlockSchur, norm: f64, deg_tol: f64) -> Result<Spectrum, Cause> {
    let entries = bs.spectrum();
    let zero = ZERO_REL * norm.max(1e-300);
    let kinds: Vec<Kind> = entries
        .iter()
        .map(|e| {
            let z = e.value;
            if z.norm() <= zero {
                Kind::Zero
            } else if z.im.abs() <= deg_tol * z.norm() {
                if z.re > 0.0 {
                    Kind::PositiveReal
                } else {
                    Kind::NegativeReal
                }
            } else if z.im < 0.0 {
                Kind::Lower
            } else {
                Kind::Upper
            }
        })
        .collect();
    let close = |a: C64, b: C64| (a - b).norm() <= deg_tol * a.norm().max(b.norm());
    if let Some(i) = kinds.iter().position(|k| *k == Kind::Zero) {
        return Err(Cause::Singular { eigenvalue: pair(entries[i].value) });
    }
    for (i, k) in kinds.iter().enumerate() {
        if *k == Kind::NegativeReal {
            let z = entries[i].value;
            let repeated = (0..entries.len()).any(|j| j != i && kinds[j] == Kind::NegativeReal && close(z, entries[j].value));
            return Err(if repeated {
                Cause::RepeatedNegativeEigenvalue { eigenvalue: pair(z) }
            } else {
                Cause::LogUndefined { eigenvalue: pair(z) }
            });
        }
    }
    for i in 0..entries.len() {
        if !matches!(kinds[i], Kind::Lower | Kind::Upper) {
            continue;
        }
        for j in i + 1..entries.len() {
            if close(entries[i].value, entries[j].value) {
                return Err(Cause::DegenerateSpectrum { a: pair(entries[i].value), b: pair(entries[j].value) });
            }
        }
    }
    let mut pairs = Vec::new();
    let mut used = vec![false; entries.len()];
    for i in 0..entries.len() {
        if kinds[i] != Kind::Lower {
            continue;
        }
        let target = entries[i].value.conj();
        let partner = (0..entries.len())
            .filter(|&j| kinds[j] == Kind::Upper && !used[j])
            .min_by(|&a, &b| (entries[a].value - target).norm().total_cmp(&(entries[b].value - target).norm()));
        match partner {
            Some(j) if (entries[j].value - target).norm() <= 1e-6 * target.norm().max(1.0) => {
                used[j] = true;
                pairs.push((i, j));
            }
            _ => return Err(Cause::UnpairedEigenvalue { eigenvalue: pair(entries[i].value) }),
        }
    }
    if let Some(j) = (0..entries.len()).find(|&j| kinds[j] == Kind::Upper && !used[j]) {
        return Err(Cause::UnpairedEigenvalue { eigenvalue: pair(entries[j].value) });
    }
    Ok(Spectrum { entries, pairs })
}

/// Builds `L0` and one shift generator per conjugate pair of nonreal eigenvalues.
/// `tol` is the relative eigenvalue separation used for degeneracy and realness decisions.
pub fn build_branch_family(e: &ComplexMatrix, tol: f64) -> Result<BranchFamily, FamilyError> {
    let d = sqrt_dim(e.dim())?;
    let bs = BlockSchur::new(e)?;
    let norm = e.norm_fro();
    let spec = classify(&bs, norm, tol).map_err(FamilyError::Cause)?;
    let l0 = mat_log_principal(e, ZERO_REL * norm)?;
    let mut shifts = Vec::with_capacity(spec.pairs.len());
    let mut pair_info = Vec::with_capacity(spec.pairs.len());
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    for &(lo, up) in &spec.pairs {
        let (right, left) = bs.eigenpair(spec.entries[lo]);
        let n = e.dim();
        let proj = ComplexMatrix::from_fn(n, |i, j| right[i] * left[j]);
        let mut a = flip_op(&proj)?;
        a.axpy(C64::new(-1.0, 0.0), &proj);
        shifts.push(a.scale(-two_pi_i));
        pair_info.push(PairInfo { lower: lo, upper: up, eigenvalue: pair(spec.entries[lo].value) });
    }
    Ok(BranchFamily { d, l0, shifts, pair_info })
}

/// [`build_branch_family`] at the default separation tolerance.
pub fn build_branch_family_default(e: &ComplexMatrix) -> Result<BranchFamily, FamilyError> {
    build_branch_family(e, DEFAULT_DEGENERACY_TOL)
}
