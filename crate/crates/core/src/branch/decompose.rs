//! Recovery of `(H, G)` from a valid generator.
//!
//! Writing `L(ρ) = Σ_{α,β=0}^{d²−1} c_{αβ} F_α ρ F_β†` with `F_0 = I/√d` and
//! `F_{α≥1}` the traceless basis, the coefficient matrix is
//! `c = 𝔽† L^Γ 𝔽`, where the columns of `𝔽` are the row-major vectorized `F_α`.
//! Then `G = c_{α,β≥1}`, and with `K = c_00/(2d)·I + (1/√d) Σ_{α≥1} c_{α0} F_α`
//! the Hamiltonian is `H = (i/2)(K − K†)`. The result is accepted only if
//! reassembling reproduces `L`.

use serde::{Deserialize, Serialize};

use crate::matkernel::{gamma_reshuffle, psd_check, sqrt_dim, ComplexMatrix, MatError, C64};

use super::conditions::check_conditions;
use super::sampler::{lindblad_from_parts, traceless_basis};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LindbladDecomposition {
    pub h: ComplexMatrix,
    pub g: ComplexMatrix,
    pub f_ops: Vec<ComplexMatrix>,
    /// `‖L − reassembled‖_F`.
    pub reassembly_residual: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum DecomposeError {
    #[error("not a Lindblad generator at tol {tol:e}: {detail}")]
    NotLindblad { tol: f64, detail: String },
    #[error(transparent)]
    Matrix(#[from] MatError),
}

pub fn decompose_lindblad(l: &ComplexMatrix, tol: f64) -> Result<LindbladDecomposition, DecomposeError> {
    let d = sqrt_dim(l.dim())?;
    let cond = check_conditions(l)?;
    if !cond.verdict(tol) {
        return Err(DecomposeError::NotLindblad { tol, detail: format!("{cond:?}") });
    }
    let basis = traceless_basis(d);
    let n = d * d;
    let mut full = vec![ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())];
    full.extend(basis.iter().cloned());
    let fmat = ComplexMatrix::from_fn(n, |r, a| full[a].as_slice()[r]);
    let mut choi = gamma_reshuffle(l)?;
    choi.make_hermitian();
    let c = fmat.adjoint().matmul(&choi).matmul(&fmat);
    let m = n - 1;
    let mut g = ComplexMatrix::from_fn(m, |a, b| c[(a + 1, b + 1)]);
    g.make_hermitian();
    let sd = (d as f64).sqrt();
    let mut k = ComplexMatrix::identity(d).scale_real(c[(0, 0)].re / (2.0 * d as f64));
    for (a, f) in basis.iter().enumerate() {
        k.axpy(c[(a + 1, 0)] / sd, f);
    }
    let mut h = &k - &k.adjoint();
    h = h.scale(C64::new(0.0, 0.5));
    h.make_hermitian();
    if let Ok(v) = psd_check(&g, tol) {
        if !v.is_positive() {
            return Err(DecomposeError::NotLindblad { tol, detail: format!("recovered G has eigenvalue {:e}", v.margin()) });
        }
    }
    let back = lindblad_from_parts(&h, &g, &basis);
    let reassembly_residual = back.dist(l);
    if reassembly_residual > 10.0 * tol * l.norm_fro().max(1.0) {
        return Err(DecomposeError::NotLindblad { tol, detail: format!("reassembly residual {reassembly_residual:e}") });
    }
    Ok(LindbladDecomposition { h, g, f_ops: basis, reassembly_residual })
}
