//! Complex Schur decomposition `M = Z T Z†`.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift QR
//! iteration with Givens rotations. Shifts are Wilkinson shifts from the
//! trailing 2×2 window, with an ad-hoc exceptional shift every tenth iteration
//! to break cycles (e.g. permutation matrices, where the Wilkinson shift stalls).

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::MatError;

#[derive(Clone, Debug)]
pub struct Schur {
    /// Unitary factor.
    pub z: ComplexMatrix,
    /// Upper triangular factor; its diagonal holds the eigenvalues.
    pub t: ComplexMatrix,
}

const MAX_ITER_PER_EIGENVALUE: usize = 60;

impl Schur {
    pub fn new(m: &ComplexMatrix) -> Result<Self, MatError> {
        let n = m.dim();
        let mut h = m.clone();
        let mut z = ComplexMatrix::identity(n);
        hessenberg(&mut h, &mut z);
        qr_iterate(&mut h, &mut z)?;
        // Clean the strictly lower part (exact zeros by construction up to deflation).
        for i in 0..n {
            for j in 0..i {
                h[(i, j)] = ZERO;
            }
        }
        Ok(Self { z, t: h })
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.t.diagonal()
    }

    /// Right eigenvector for the eigenvalue at diagonal position `k`, by back substitution.
    /// Requires `T_jj ≠ T_kk` for `j < k`; near-equal entries are perturbed to avoid division by zero.
    pub fn right_vector(&self, k: usize) -> Vec<C64> {
        let n = self.t.dim();
        let t = &self.t;
        let lam = t[(k, k)];
        let small = f64::EPSILON * t.max_abs().max(f64::MIN_POSITIVE);
        let mut y = vec![ZERO; n];
        y[k] = ONE;
        for i in (0..k).rev() {
            let mut s = t[(i, k)];
            for j in i + 1..k {
                s += t[(i, j)] * y[j];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            y[i] = -s / den;
        }
        self.z.mul_vec(&y)
    }

    /// Left eigenvector (row) for the eigenvalue at diagonal position `k`: `r T = λ r`, returned for `M`.
    pub fn left_vector(&self, k: usize) -> Vec<C64> {
        let n = self.t.dim();
        let t = &self.t;
        let lam = t[(k, k)];
        let small = f64::EPSILON * t.max_abs().max(f64::MIN_POSITIVE);
        let mut y = vec![ZERO; n];
        y[k] = ONE;
        for j in k + 1..n {
            let mut s = ZERO;
            for i in k..j {
                s += y[i] * t[(i, j)];
            }
            let mut den = lam - t[(j, j)];
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            y[j] = s / den;
        }
        // r = y Z†  ⇒  r_i = Σ_j y_j conj(Z_ij)
        (0..n).map(|i| (0..n).map(|j| y[j] * self.z[(i, j)].conj()).sum()).collect()
    }
}

fn hessenberg(h: &mut ComplexMatrix, z: &mut ComplexMatrix) {
    let n = h.dim();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { ONE } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // H ← (I − 2vv†) H on rows k+1..n
        for j in 0..n {
            let mut s = ZERO;
            for (a, i) in (k + 1..n).enumerate() {
                s += v[a].conj() * h[(i, j)];
            }
            s *= 2.0;
            for (a, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= v[a] * s;
            }
        }
        // H ← H (I − 2vv†), Z ← Z (I − 2vv†) on columns k+1..n
        for mat in [&mut *h, &mut *z] {
            for i in 0..n {
                let mut s = ZERO;
                for (a, j) in (k + 1..n).enumerate() {
                    s += mat[(i, j)] * v[a];
                }
                s *= 2.0;
                for (a, j) in (k + 1..n).enumerate() {
                    mat[(i, j)] -= s * v[a].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr2 = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let l1 = tr2 + disc;
    let l2 = tr2 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_iterate(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<(), MatError> {
    let n = h.dim();
    if n <= 1 {
        return Ok(());
    }
    let hnorm = h.max_abs().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rots: Vec<(C64, C64)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_ITER_PER_EIGENVALUE || total > MAX_ITER_PER_EIGENVALUE * n {
            return Err(MatError::NoConvergence);
        }
        let mu = if iter % 10 == 0 {
            let sub = h[(hi, hi - 1)].norm();
            h[(hi, hi)] + C64::new(0.75 * sub, 0.3 * sub)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        rots.clear();
        for k in l..hi {
            let a = h[(k, k)];
            let b = h[(k + 1, k)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (g, s) = if r == 0.0 { (ONE, ZERO) } else { (a.conj() / r, b.conj() / r) };
            rots.push((g, s));
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = g * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + g.conj() * y;
            }
        }
        for (off, &(g, s)) in rots.iter().enumerate() {
            let k = l + off;
            let top = (k + 1).min(hi);
            for i in 0..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * g.conj() + y * s.conj();
                h[(i, k + 1)] = -x * s + y * g;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * g.conj() + y * s.conj();
                z[(i, k + 1)] = -x * s + y * g;
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}
