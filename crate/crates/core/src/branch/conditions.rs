use serde::{Deserialize, Serialize};

use crate::matkernel::{compress_off_omega, gamma_reshuffle, min_eigenvalue_of_hermitian, omega, sqrt_dim, ComplexMatrix, MatError};
use crate::report::{band, Band};

/// Residuals of the three conditions for a Liouvillian `L` (transfer matrix):
/// (i) `L^Γ` Hermitian, (ii) `⟨ω|L = 0`, (iii) `(I−ω) L^Γ (I−ω) ⪰ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladConditions {
    pub hermiticity_residual: f64,
    pub normalization_residual: f64,
    /// Smallest eigenvalue of the compressed Hermitian part; never positive because
    /// the `ω` direction itself contributes an exact zero.
    pub ccp_margin: f64,
}

impl LindbladConditions {
    /// `max(hermiticity, normalization, −ccp_margin)`.
    pub fn violation(&self) -> f64 {
        self.hermiticity_residual.max(self.normalization_residual).max(-self.ccp_margin)
    }

    pub fn verdict(&self, tol: f64) -> bool {
        self.hermiticity_residual <= tol && self.normalization_residual <= tol && self.ccp_margin >= -tol
    }

    pub fn band(&self, tol: f64) -> Band {
        band(self.violation(), tol)
    }
}

/// `‖⟨ω|L‖₂`.
pub fn normalization_residual(l: &ComplexMatrix) -> Result<f64, MatError> {
    let d = sqrt_dim(l.dim())?;
    let row = l.vec_mul(&omega(d));
    Ok(row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

/// Evaluates conditions (i)–(iii). Norms are Frobenius for matrices and 2-norms for vectors.
/// Besides `L` itself, one further d⁴ buffer is allocated.
pub fn check_conditions(l: &ComplexMatrix) -> Result<LindbladConditions, MatError> {
    let normalization_residual = normalization_residual(l)?;
    let mut g = gamma_reshuffle(l)?;
    let hermiticity_residual = g.hermiticity_residual();
    g.make_hermitian();
    compress_off_omega(&mut g)?;
    let ccp_margin = min_eigenvalue_of_hermitian(&g)?;
    Ok(LindbladConditions { hermiticity_residual, normalization_residual, ccp_margin })
}
