//! Exact-zero block detection.
//!
//! A matrix whose nonzero pattern splits into several connected components is,
//! after a symmetric permutation, block diagonal. Analytic functions (exp, log)
//! and spectra act block by block, so every routine in this kernel works on the
//! components independently. This keeps the structured Liouvillians produced by
//! the reduction (one d×d block plus many 1×1 coherence blocks) cheap to handle
//! while remaining a plain dense representation.

use super::matrix::{ComplexMatrix, ZERO};

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the undirected graph `i ~ j ⇔ M_ij ≠ 0 ∨ M_ji ≠ 0`.
/// Components are returned with sorted indices, ordered by their smallest index.
pub fn components(m: &ComplexMatrix) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    let data = m.as_slice();
    for i in 0..n {
        for j in 0..n {
            if i != j && data[i * n + j] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[label[r]].push(i);
    }
    comps
}

/// Applies `f` to every diagonal block and assembles the block-diagonal result.
pub fn map_blocks<E>(
    m: &ComplexMatrix,
    mut f: impl FnMut(&ComplexMatrix) -> Result<ComplexMatrix, E>,
) -> Result<ComplexMatrix, E> {
    let comps = components(m);
    let mut out = ComplexMatrix::zeros(m.dim());
    for idx in &comps {
        let block = m.submatrix(idx);
        out.scatter(idx, &f(&block)?);
    }
    Ok(out)
}
