//! Principal matrix logarithm.
//!
//! Primary path: inverse scaling and squaring on the complex Schur form. The
//! triangular factor is square-rooted (Björck–Hammarling recurrence) until
//! `‖T − I‖₁ ≤ 0.25`, then `log(I + X)` is evaluated with the 8-point
//! Gauss–Legendre quadrature rule (the [8/8] Padé approximant), and the result
//! is rescaled by `2^s`. This path tolerates repeated eigenvalues and
//! non-trivial Jordan structure.
//!
//! Secondary path, [`mat_log_eigen`]: `Σ log λ_c |l_c⟩⟨r_c|` for diagonalizable
//! inputs; used to cross-validate the primary path in tests.

use super::blocks::map_blocks;
use super::eigen::eig_decompose;
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::schur::Schur;
use super::MatError;

const SQRT_THRESHOLD: f64 = 0.25;
const MAX_SQRTS: usize = 64;

/// True if `z` lies within `tol` of the closed negative real axis (including zero).
pub fn near_nonpositive_axis(z: C64, tol: f64) -> bool {
    if z.norm() <= tol {
        return true;
    }
    z.re < 0.0 && z.im.abs() <= tol
}

fn sqrt_upper(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let mut r = ComplexMatrix::zeros(n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = ZERO;
            for k in i + 1..j {
                s += r[(i, k)] * r[(k, j)];
            }
            let den = r[(i, i)] + r[(j, j)];
            r[(i, j)] = if den == ZERO { ZERO } else { (t[(i, j)] - s) / den };
        }
    }
    r
}

fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    // Nodes/weights on [0, 1] via Newton iteration on P_m.
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

fn log_block(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, MatError> {
    let n = m.dim();
    if n == 1 {
        let z = m[(0, 0)];
        if near_nonpositive_axis(z, tol) {
            return Err(MatError::LogUndefined { eigenvalue: z });
        }
        return Ok(ComplexMatrix::from_diagonal(&[z.ln()]));
    }
    let schur = Schur::new(m)?;
    if let Some(&z) = schur.eigenvalues().iter().find(|z| near_nonpositive_axis(**z, tol)) {
        return Err(MatError::LogUndefined { eigenvalue: z });
    }
    let id = ComplexMatrix::identity(n);
    let mut t = schur.t.clone();
    let mut s = 0;
    while (&t - &id).norm_one() > SQRT_THRESHOLD {
        if s == MAX_SQRTS {
            return Err(MatError::NoConvergence);
        }
        t = sqrt_upper(&t);
        s += 1;
    }
    let x = &t - &id;
    let mut acc = ComplexMatrix::zeros(n);
    for (node, weight) in gauss_legendre(8) {
        let mut den = id.clone();
        den.axpy(C64::new(node, 0.0), &x);
        acc.axpy(C64::new(weight, 0.0), &den.solve(&x)?);
    }
    let acc = acc.scale_real(2f64.powi(s as i32));
    Ok(schur.z.matmul(&acc).matmul(&schur.z.adjoint()))
}

/// Principal logarithm; fails with [`MatError::LogUndefined`] when an eigenvalue is
/// within `tol` of the closed negative real axis.
pub fn mat_log_principal(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, MatError> {
    if !m.is_finite() {
        return Err(MatError::NonFinite);
    }
    map_blocks(m, |b| log_block(b, tol))
}

/// Eigendecomposition-based principal logarithm (diagonalizable inputs with simple spectrum).
pub fn mat_log_eigen(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, MatError> {
    let es = eig_decompose(m, tol)?;
    let n = m.dim();
    let mut out = ComplexMatrix::zeros(n);
    for (c, &lam) in es.eigenvalues.iter().enumerate() {
        if near_nonpositive_axis(lam, tol) {
            return Err(MatError::LogUndefined { eigenvalue: lam });
        }
        let l = lam.ln();
        for i in 0..n {
            let a = es.right_eigenvectors[(i, c)] * l;
            if a == ZERO {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += a * es.left_eigenvectors[(c, j)];
            }
        }
    }
    Ok(out)
}
