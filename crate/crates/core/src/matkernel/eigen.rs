use serde::{Deserialize, Serialize};

use super::blocks::components;
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::schur::Schur;
use super::MatError;

/// Default relative eigenvalue separation below which a spectrum counts as degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

/// Full eigendecomposition `M = Σ_c λ_c |l_c⟩⟨r_c|` with `⟨r_a|l_b⟩ = δ_ab`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenSystem {
    pub eigenvalues: Vec<C64>,
    /// Column `c` is the right eigenvector `|l_c⟩`.
    pub right_eigenvectors: ComplexMatrix,
    /// Row `c` is the left eigenvector `⟨r_c|`.
    pub left_eigenvectors: ComplexMatrix,
    pub biorthogonality_residual: f64,
}

/// One eigenvalue located inside a block Schur decomposition.
#[derive(Clone, Copy, Debug)]
pub struct SpectralEntry {
    pub value: C64,
    pub block: usize,
    pub pos: usize,
}

/// Schur decompositions of every exact-zero block of a matrix.
pub struct BlockSchur {
    dim: usize,
    comps: Vec<Vec<usize>>,
    schurs: Vec<Schur>,
}

impl BlockSchur {
    pub fn new(m: &ComplexMatrix) -> Result<Self, MatError> {
        if !m.is_finite() {
            return Err(MatError::NonFinite);
        }
        let comps = components(m);
        let schurs = comps.iter().map(|idx| Schur::new(&m.submatrix(idx))).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { dim: m.dim(), comps, schurs })
    }

    /// All eigenvalues, block by block in order of the blocks' smallest index.
    pub fn spectrum(&self) -> Vec<SpectralEntry> {
        let mut out = Vec::with_capacity(self.dim);
        for (b, s) in self.schurs.iter().enumerate() {
            for (pos, value) in s.eigenvalues().into_iter().enumerate() {
                out.push(SpectralEntry { value, block: b, pos });
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.spectrum().into_iter().map(|e| e.value).collect()
    }

    /// Right and left eigenvectors of a simple eigenvalue, normalized so `⟨r|l⟩ = 1`
    /// (`⟨r|` returned as a plain row, no conjugation) and `‖l‖ = 1`.
    pub fn eigenpair(&self, e: SpectralEntry) -> (Vec<C64>, Vec<C64>) {
        let s = &self.schurs[e.block];
        let idx = &self.comps[e.block];
        let mut rb = s.right_vector(e.pos);
        let mut lb = s.left_vector(e.pos);
        let rn = rb.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in rb.iter_mut() {
            *z /= rn;
        }
        let ip: C64 = lb.iter().zip(&rb).map(|(a, b)| a * b).sum();
        for z in lb.iter_mut() {
            *z /= ip;
        }
        let mut right = vec![ZERO; self.dim];
        let mut left = vec![ZERO; self.dim];
        for (k, &i) in idx.iter().enumerate() {
            right[i] = rb[k];
            left[i] = lb[k];
        }
        (right, left)
    }
}

fn separation_ok(a: C64, b: C64, tol: f64) -> bool {
    let scale = a.norm().max(b.norm());
    (a - b).norm() > tol * scale
}

/// First index pair of eigenvalues closer than `tol` relative to their magnitude.
pub fn degenerate_pairs(values: &[C64], tol: f64) -> Option<(usize, usize)> {
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            if !separation_ok(values[i], values[j], tol) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Eigendecomposition of a matrix with a simple spectrum.
///
/// Eigenvalues come from the block Schur form; right vectors by back
/// substitution, left vectors by forward substitution on the triangular
/// factor. Two eigenvalues count as degenerate when
/// `|λ_a − λ_b| ≤ tol · max(|λ_a|, |λ_b|)`.
pub fn eig_decompose(m: &ComplexMatrix, tol: f64) -> Result<EigenSystem, MatError> {
    let n = m.dim();
    let bs = BlockSchur::new(m)?;
    let spec = bs.spectrum();
    let values: Vec<C64> = spec.iter().map(|e| e.value).collect();
    if let Some((i, j)) = degenerate_pairs(&values, tol) {
        return Err(MatError::DegenerateSpectrum { a: values[i], b: values[j] });
    }
    let mut right = ComplexMatrix::zeros(n);
    let mut left = ComplexMatrix::zeros(n);
    for (c, e) in spec.iter().enumerate() {
        let (r, l) = bs.eigenpair(*e);
        for i in 0..n {
            right[(i, c)] = r[i];
            left[(c, i)] = l[i];
        }
    }
    let gram = left.matmul(&right);
    let biorth = gram.dist(&ComplexMatrix::identity(n));
    let mut recon = right.clone();
    for i in 0..n {
        for c in 0..n {
            recon[(i, c)] *= values[c];
        }
    }
    let recon = recon.matmul(&left);
    let resid = recon.dist(m);
    let bound = tol * m.norm_fro().max(f64::MIN_POSITIVE);
    if !biorth.is_finite() || resid > bound || biorth > tol.sqrt() {
        return Err(MatError::NonDiagonalizable { residual: resid.max(biorth) });
    }
    Ok(EigenSystem { eigenvalues: values, right_eigenvectors: right, left_eigenvectors: left, biorthogonality_residual: biorth })
}

/// Eigenvalues only (no degeneracy requirement).
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>, MatError> {
    Ok(BlockSchur::new(m)?.eigenvalues())
}
