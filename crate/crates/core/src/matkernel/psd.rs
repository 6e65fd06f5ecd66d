use serde::{Deserialize, Serialize};

use super::blocks::components;
use super::matrix::ComplexMatrix;
use super::schur::Schur;
use super::MatError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsdVerdict {
    Positive(f64),
    NotPositive(f64),
}

impl PsdVerdict {
    pub fn margin(&self) -> f64 {
        match *self {
            PsdVerdict::Positive(m) | PsdVerdict::NotPositive(m) => m,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, PsdVerdict::Positive(_))
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`, computed block by block.
pub fn min_hermitian_eigenvalue(m: &ComplexMatrix) -> Result<f64, MatError> {
    min_eigenvalue_of_hermitian(&m.hermitian_part())
}

/// Smallest eigenvalue of a matrix already known to be Hermitian (no copy of the full matrix).
pub fn min_eigenvalue_of_hermitian(h: &ComplexMatrix) -> Result<f64, MatError> {
    let mut best = f64::INFINITY;
    for idx in components(h) {
        let lam = if idx.len() == 1 {
            h[(idx[0], idx[0])].re
        } else {
            Schur::new(&h.submatrix(&idx))?.eigenvalues().iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
        };
        best = best.min(lam);
    }
    Ok(if h.dim() == 0 { 0.0 } else { best })
}

/// Positive iff the smallest eigenvalue of the Hermitian part is `≥ −tol`.
pub fn psd_check(m: &ComplexMatrix, tol: f64) -> Result<PsdVerdict, MatError> {
    let residual = m.hermiticity_residual();
    if residual > tol {
        return Err(MatError::NotHermitian { residual });
    }
    let margin = min_hermitian_eigenvalue(m)?;
    Ok(if margin >= -tol { PsdVerdict::Positive(margin) } else { PsdVerdict::NotPositive(margin) })
}
