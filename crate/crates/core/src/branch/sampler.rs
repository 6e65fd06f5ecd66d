//! Lindblad-form generators `L(ρ) = i[ρ, H] + Σ_{αβ} G_{αβ} (F_α ρ F_β† − ½{F_β†F_α, ρ})`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matkernel::{ComplexMatrix, C64};

/// Orthonormal (Hilbert–Schmidt) Hermitian basis of the traceless d×d matrices:
/// symmetric and antisymmetric off-diagonal generalized Gell-Mann matrices for
/// each pair `j < k`, followed by the `d − 1` diagonal ones.
pub fn traceless_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in j + 1..d {
            let mut s = ComplexMatrix::zeros(d);
            s[(j, k)] = C64::new(r, 0.0);
            s[(k, j)] = C64::new(r, 0.0);
            out.push(s);
            let mut a = ComplexMatrix::zeros(d);
            a[(j, k)] = C64::new(0.0, -r);
            a[(k, j)] = C64::new(0.0, r);
            out.push(a);
        }
    }
    for l in 1..d {
        let mut m = ComplexMatrix::zeros(d);
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        for j in 0..l {
            m[(j, j)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        out.push(m);
    }
    out
}

/// Transfer matrix of `X ↦ A X B` (row-major vectorization): `A ⊗ Bᵀ`.
pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim();
    ComplexMatrix::from_fn(d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        let (k, l) = (c / d, c % d);
        a[(i, k)] * b[(l, j)]
    })
}

/// Assembles the Lindblad-form transfer matrix from `H`, `G` and the operator basis `F`.
pub fn lindblad_from_parts(h: &ComplexMatrix, g: &ComplexMatrix, basis: &[ComplexMatrix]) -> ComplexMatrix {
    let d = h.dim();
    let id = ComplexMatrix::identity(d);
    let i = C64::new(0.0, 1.0);
    // i[ρ, H] = i ρH − i Hρ
    let mut l = sandwich(&id, h).scale(i);
    l.axpy(-i, &sandwich(h, &id));
    let mut anti = ComplexMatrix::zeros(d);
    for (a, fa) in basis.iter().enumerate() {
        for (b, fb) in basis.iter().enumerate() {
            let gab = g[(a, b)];
            if gab == C64::new(0.0, 0.0) {
                continue;
            }
            l.axpy(gab, &sandwich(fa, &fb.adjoint()));
            anti.axpy(gab, &fb.adjoint().matmul(fa));
        }
    }
    l.axpy(C64::new(-0.5, 0.0), &sandwich(&anti, &id));
    l.axpy(C64::new(-0.5, 0.0), &sandwich(&id, &anti));
    l
}

/// Random Hamiltonian and dissipator drawn by [`sample_lindblad`].
#[derive(Clone, Debug)]
pub struct SampledGenerator {
    pub h: ComplexMatrix,
    pub g: ComplexMatrix,
    pub l: ComplexMatrix,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws `H` (Hermitian, entries of size ~0.3) and `G = W W†` with `W` of shape
/// `(d²−1) × (d²−2)` (so `G` is PSD with a nontrivial kernel; for `d = 1` both vanish),
/// scaled so the dissipation rates are of order one. Deterministic per seed.
pub fn sample_lindblad_parts(d: usize, seed: u64) -> SampledGenerator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = ComplexMatrix::zeros(d);
    for j in 0..d {
        h[(j, j)] = C64::new(0.3 * gaussian(&mut rng), 0.0);
        for k in j + 1..d {
            let z = C64::new(gaussian(&mut rng), gaussian(&mut rng)) * (0.3 * std::f64::consts::FRAC_1_SQRT_2);
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
        }
    }
    let m = d * d - 1;
    let rank = m.saturating_sub(1).max(if m > 0 { 1 } else { 0 });
    let scale = 0.5 / (m.max(1) as f64).sqrt();
    let mut w = vec![C64::new(0.0, 0.0); m * rank];
    for z in w.iter_mut() {
        *z = C64::new(gaussian(&mut rng), gaussian(&mut rng)) * scale;
    }
    let g = ComplexMatrix::from_fn(m, |a, b| (0..rank).map(|k| w[a * rank + k] * w[b * rank + k].conj()).sum());
    let l = lindblad_from_parts(&h, &g, &traceless_basis(d));
    SampledGenerator { h, g, l }
}

/// Transfer matrix of a random Lindblad generator on d×d matrices.
pub fn sample_lindblad(d: usize, seed: u64) -> ComplexMatrix {
    sample_lindblad_parts(d, seed).l
}
