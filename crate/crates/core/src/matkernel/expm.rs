//! Matrix exponential: scaling and squaring with the degree-13 diagonal Padé
//! approximant (Higham 2005), applied independently to each exact-zero block.

use super::blocks::map_blocks;
use super::matrix::{ComplexMatrix, C64};
use super::MatError;

/// Largest 1-norm accepted by [`mat_exp`]; beyond it the result may overflow.
pub const EXP_NORM_CAP: f64 = 700.0;

const THETA_13: f64 = 5.371920351148152;

const B13: [f64; 14] = [
    64764752532480000.,
    32382376266240000.,
    7771770303897600.,
    1187353796428800.,
    129060195264000.,
    10559470521600.,
    670442572800.,
    33522128640.,
    1323241920.,
    40840800.,
    960960.,
    16380.,
    182.,
    1.,
];

fn lin(terms: &[(f64, &ComplexMatrix)], n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n);
    for (c, m) in terms {
        out.axpy(C64::new(*c, 0.0), m);
    }
    out
}

fn exp_block(a: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    let n = a.dim();
    if n == 1 {
        return Ok(ComplexMatrix::from_diagonal(&[a[(0, 0)].exp()]));
    }
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a.scale_real(0.5f64.powi(s));
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let inner_u = lin(&[(B13[13], &a6), (B13[11], &a4), (B13[9], &a2)], n);
    let mut tu = a6.matmul(&inner_u);
    tu.axpy(C64::new(B13[7], 0.0), &a6);
    tu.axpy(C64::new(B13[5], 0.0), &a4);
    tu.axpy(C64::new(B13[3], 0.0), &a2);
    tu.axpy(C64::new(B13[1], 0.0), &id);
    let u = a.matmul(&tu);
    let inner_v = lin(&[(B13[12], &a6), (B13[10], &a4), (B13[8], &a2)], n);
    let mut v = a6.matmul(&inner_v);
    v.axpy(C64::new(B13[6], 0.0), &a6);
    v.axpy(C64::new(B13[4], 0.0), &a4);
    v.axpy(C64::new(B13[2], 0.0), &a2);
    v.axpy(C64::new(B13[0], 0.0), &id);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.solve(&p)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// `e^M`. Errors with [`MatError::Overflow`] if any block has 1-norm above [`EXP_NORM_CAP`].
pub fn mat_exp(m: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    if !m.is_finite() {
        return Err(MatError::NonFinite);
    }
    map_blocks(m, |b| {
        let norm = b.norm_one();
        if norm > EXP_NORM_CAP {
            return Err(MatError::Overflow { norm, cap: EXP_NORM_CAP });
        }
        exp_block(b)
    })
}
