//! Index permutations on transfer matrices of maps on d×d matrices.
//!
//! Rows and columns of a `d² × d²` matrix are labelled by pairs `(i, j) ↦ i·d + j`.

use super::matrix::{ComplexMatrix, C64};
use super::MatError;

/// Returns `d` if `n = d²`.
pub fn sqrt_dim(n: usize) -> Result<usize, MatError> {
    let d = (n as f64).sqrt().round() as usize;
    if d * d == n && d > 0 {
        Ok(d)
    } else {
        Err(MatError::NotSquareOfSquare { dim: n })
    }
}

/// `(M^Γ)_{(i,k),(j,l)} = M_{(i,j),(k,l)}`. Maps a transfer matrix to its Choi matrix.
pub fn gamma_reshuffle(m: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    let d = sqrt_dim(m.dim())?;
    let mut out = ComplexMatrix::zeros(m.dim());
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    let n = d * d;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    dst[(i * d + k) * n + j * d + l] = src[(i * d + j) * n + k * d + l];
                }
            }
        }
    }
    Ok(out)
}

/// `F(|i,j⟩⟨k,l|) = |j,i⟩⟨l,k|` with complex conjugated coefficients.
/// A map preserves Hermiticity iff its transfer matrix is a fixed point of `F`.
pub fn flip_op(m: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    let d = sqrt_dim(m.dim())?;
    let mut out = ComplexMatrix::zeros(m.dim());
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    let n = d * d;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    dst[(j * d + i) * n + l * d + k] = src[(i * d + j) * n + k * d + l].conj();
                }
            }
        }
    }
    Ok(out)
}

/// The maximally entangled unit vector `|ω⟩ = Σ_i |i,i⟩ / √d` (real entries).
pub fn omega(d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = C64::new(a, 0.0);
    }
    v
}

/// Hermitian `H ↦ (I − |ω⟩⟨ω|) H (I − |ω⟩⟨ω|)`, computed with rank-one updates in O(d⁴).
pub fn compress_off_omega(h: &mut ComplexMatrix) -> Result<(), MatError> {
    let d = sqrt_dim(h.dim())?;
    let n = h.dim();
    let w = omega(d);
    let diag: Vec<usize> = (0..d).map(|i| i * d + i).collect();
    let a = w[0].re;
    // u = H w, s = w† H w
    let mut u = vec![C64::new(0.0, 0.0); n];
    for (r, ur) in u.iter_mut().enumerate() {
        *ur = diag.iter().map(|&c| h[(r, c)]).sum::<C64>() * a;
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (c, vc) in v.iter_mut().enumerate() {
        *vc = diag.iter().map(|&r| h[(r, c)]).sum::<C64>() * a;
    }
    let s: C64 = diag.iter().map(|&r| u[r]).sum::<C64>() * a;
    // P H P = H − w vᵀ − u w† + s w w†
    let data = h.as_mut_slice();
    for &r in &diag {
        for c in 0..n {
            data[r * n + c] -= v[c] * a;
        }
    }
    for r in 0..n {
        for &c in &diag {
            data[r * n + c] -= u[r] * a;
        }
    }
    for &r in &diag {
        for &c in &diag {
            data[r * n + c] += s * a * a;
        }
    }
    Ok(())
}
