//! Clause vectors, the coefficient matrix `S`, and the assembly of `Q`, `P`,
//! `B^(c)` and the Liouvillians `L0`, `A^(c)`.
//!
//! Coordinate layout of `S` (size `m = C + 2V + 1`): clause indicators, variable
//! indicators, `V` extension coordinates, one balancing coordinate. `Q` and
//! `B^(c)` live on `d = 4m` indices `i = 4p + 2a + b`, with `a` the `K` factor and
//! `b` the `Y` factor:
//!
//! ```text
//! Q      = S ⊗ J ⊗ J + Σ_c v_c v_cᵀ ⊗ K ⊗ (Y' + ε_c I),   diagonal then set to k
//! B^(c)  = v_c v_cᵀ ⊗ K ⊗ Y
//! J = [[1,1],[1,1]],  K = [[1,−1],[−1,1]],  Y = [[0,1],[−1,0]],  Y' = −Y/3,  ε_c = c/(8V)
//! ```

use std::f64::consts::PI;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::matkernel::schur::Schur;
use crate::matkernel::{ComplexMatrix, C64};

use super::sat::SatInstance;
use super::ReductionError;

pub type Rational = Rational64;

/// Filler entries of `S` are rounded up to this grid.
const GRID: i64 = 24;
/// Slack added on top of every filler requirement.
const MU: (i64, i64) = (1, 12);
/// Increment of the common column sum when balancing fails.
const T_STEP: (i64, i64) = (1, 4);
const MAX_BALANCING_ROUNDS: u32 = 10_000;

/// Dense real square matrix, row-major; serializes as an array of rows.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |i, j| C64::new(self.get(i, j), 0.0))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }
}

impl Serialize for RealMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(ser)
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn rat_f64(x: Rational) -> f64 {
    x.to_f64().expect("small rational")
}

fn ceil_grid(x: Rational) -> Rational {
    (x * GRID).ceil() / GRID
}

/// Smallest grid point `≥ x − 1e-9` (absorbs rounding noise in `x`).
fn ceil_grid_f64(x: f64) -> Rational {
    rat(((x * GRID as f64) - 1e-9).ceil() as i64, GRID)
}

fn floor_grid_f64(x: f64) -> Rational {
    rat(((x * GRID as f64) - 1e-9).floor().max(0.0) as i64, GRID)
}

/// `ε_c` for 0-based variable `c`: gives each clause vector's conjugate eigenvalue
/// pair of `L0` its own real part, so pairs shifted by different `A^(c)` never coincide.
pub fn detuning(c: usize, num_vars: usize) -> Rational {
    rat(c as i64 + 1, 8 * num_vars as i64)
}

/// Eigen-decomposition of a real symmetric matrix through the complex Schur form.
fn symmetric_eigen(n: usize, a: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = ComplexMatrix::from_fn(n, |i, j| C64::new(a[i * n + j], 0.0));
    let s = Schur::new(&m).expect("Schur form of a small symmetric matrix");
    let vals = (0..n).map(|k| s.t[(k, k)].re).collect();
    // Columns of Z are eigenvectors (T is diagonal for a normal matrix); make them real.
    let vecs = (0..n)
        .map(|k| {
            let col: Vec<C64> = (0..n).map(|i| s.z[(i, k)]).collect();
            let pivot = col.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or(C64::new(1.0, 0.0));
            let phase = pivot.conj() / pivot.norm();
            col.iter().map(|z| (z * phase).re).collect()
        })
        .collect();
    (vals, vecs)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClauseVectors {
    /// One vector per variable, length `n = C + 2V`.
    pub v_c: Vec<Vec<f64>>,
    /// Orthogonal basis of the complement, each of norm `√N`.
    pub v_cprime: Vec<Vec<f64>>,
    pub n: usize,
    /// Common squared norm `N`.
    pub norm_sq: u64,
    /// `max |⟨v_c, v_c'⟩ − N δ|`.
    pub gram_residual: f64,
    /// 0/1 clause and variable indicators (the first `C + V` coordinates).
    pub indicators: Vec<Vec<u8>>,
}

/// Clause-membership and per-variable indicators, extended to an orthogonal
/// family of equal norms via the symmetric square root of `N·I − Gram`.
pub fn build_clause_vectors(inst: &SatInstance) -> ClauseVectors {
    let v = inst.num_vars;
    let c = inst.num_clauses();
    let enc = c + v;
    let mut ind = vec![vec![0u8; enc]; v];
    for (k, cl) in inst.clauses.iter().enumerate() {
        for &x in cl {
            ind[x - 1][k] = 1;
        }
    }
    for (x, row) in ind.iter_mut().enumerate() {
        row[c + x] = 1;
    }
    let gram: Vec<f64> = (0..v * v)
        .map(|k| (0..enc).map(|p| (ind[k / v][p] * ind[k % v][p]) as f64).sum())
        .collect();
    let (gvals, _) = symmetric_eigen(v, &gram);
    let lmax = gvals.iter().copied().fold(0.0, f64::max);
    let norm_sq = (lmax - 1e-9).ceil() as u64 + 1;
    let resid: Vec<f64> = (0..v * v).map(|k| if k / v == k % v { norm_sq as f64 } else { 0.0 } - gram[k]).collect();
    let (w, u) = symmetric_eigen(v, &resid);
    let x = |i: usize, j: usize| -> f64 { (0..v).map(|k| u[k][i] * w[k].max(0.0).sqrt() * u[k][j]).sum() };
    let n = c + 2 * v;
    let v_c: Vec<Vec<f64>> = (0..v)
        .map(|r| {
            let mut vec: Vec<f64> = ind[r].iter().map(|&b| b as f64).collect();
            vec.extend((0..v).map(|j| x(r, j)));
            vec
        })
        .collect();
    let mut gram_residual: f64 = 0.0;
    for a in 0..v {
        for b in 0..v {
            let ip: f64 = v_c[a].iter().zip(&v_c[b]).map(|(p, q)| p * q).sum();
            let target = if a == b { norm_sq as f64 } else { 0.0 };
            gram_residual = gram_residual.max((ip - target).abs());
        }
    }
    let v_cprime = complement_basis(&v_c, n, norm_sq as f64);
    ClauseVectors { v_c, v_cprime, n, norm_sq, gram_residual, indicators: ind }
}

/// Modified Gram–Schmidt over the unit vectors, after the (normalized) `v_c`.
fn complement_basis(vs: &[Vec<f64>], n: usize, norm_sq: f64) -> Vec<Vec<f64>> {
    let scale = norm_sq.sqrt();
    let mut basis: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().map(|x| x / scale).collect()).collect();
    let start = basis.len();
    for p in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = vec![0.0; n];
        w[p] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let ip: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= ip * y);
            }
        }
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            basis.push(w.iter().map(|x| x / nrm).collect());
        }
    }
    basis.split_off(start).into_iter().map(|b| b.into_iter().map(|x| x * scale).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SMatrix {
    /// `(C + 2V + 1)`-dimensional symmetric matrix.
    pub s: RealMatrix,
    /// Exact entries on the clause and variable coordinates.
    #[serde(skip)]
    pub encoding_block: Vec<Rational>,
    /// Common adjusted column sum `T`; `σ = 4T`.
    #[serde(serialize_with = "ser_rational")]
    pub t: Rational,
    /// Largest filler entry before balancing.
    pub s_big: f64,
    /// Number of times `T` was raised before balancing succeeded.
    pub retries: u32,
}

fn ser_rational<S: Serializer>(x: &Rational, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&x.to_string())
}

/// Filler requirement for entry `(p, q)`: the worst case over `m ∈ {0,1}^V` of
/// the `B`-driven off-diagonal terms ("black", `b ≠ b'`) and the detuning terms
/// ("white", `b = b'`, `a ≠ a'`).
fn requirement_f64(a: &[f64], eps: &[f64]) -> f64 {
    let total: f64 = a.iter().sum();
    let pos: f64 = a.iter().filter(|x| **x > 0.0).sum();
    let neg: f64 = a.iter().filter(|x| **x < 0.0).sum();
    let black = (pos - total / 3.0).max(total / 3.0 - neg);
    let white = a.iter().zip(eps).map(|(x, e)| x * e).sum::<f64>().abs();
    black.max(white)
}

/// Builds `S`: fixed diagonals `1/2` (clauses) and `5/6` (variables), fillers on
/// every other entry, then a greedy balancing so that all columns of `S` sum to
/// the same `T`. Column `p` of `Q − kI` sums to `4·colsum_p(S)` (the clause
/// term has zero column sums), so `k = −4T` makes every column of `Q` vanish.
pub fn build_s(inst: &SatInstance, vecs: &ClauseVectors) -> Result<SMatrix, ReductionError> {
    let v = inst.num_vars;
    let c = inst.num_clauses();
    let enc = c + v;
    let n = vecs.n;
    let m = n + 1;
    let b = n;
    let mu = rat(MU.0, MU.1);
    let eps: Vec<Rational> = (0..v).map(|x| detuning(x, v)).collect();
    let eps_f: Vec<f64> = eps.iter().map(|&e| rat_f64(e)).collect();

    let mut s0 = vec![Rational::zero(); m * m];
    for p in 0..n {
        for q in p..n {
            let val = if p == q && p < enc {
                if p < c { rat(1, 2) } else { rat(5, 6) }
            } else if p < enc && q < enc {
                // 0/1 products: black = 2A/3, white = Σ ε_c a_c.
                let a: Vec<i64> = (0..v).map(|x| (vecs.indicators[x][p] * vecs.indicators[x][q]) as i64).collect();
                let total: i64 = a.iter().sum();
                let white: Rational = a.iter().zip(&eps).map(|(&ai, &e)| e * ai).sum();
                ceil_grid(rat(2 * total, 3).max(white)) + mu
            } else {
                let a: Vec<f64> = (0..v).map(|x| vecs.v_c[x][p] * vecs.v_c[x][q]).collect();
                ceil_grid_f64(requirement_f64(&a, &eps_f)) + mu
            };
            s0[p * m + q] = val;
            s0[q * m + p] = val;
        }
        s0[p * m + b] = mu;
        s0[b * m + p] = mu;
    }
    s0[b * m + b] = mu;
    let s_big = (0..m * m).filter(|&k| k / m != k % m).map(|k| rat_f64(s0[k])).fold(0.0, f64::max);

    let colsum = |s: &[Rational], p: usize| -> Rational { (0..m).map(|q| s[q * m + p]).sum() };
    let adj_ext = |s: &[Rational], p: usize| -> f64 { rat_f64(colsum(s, p)) };

    let exact_max = (0..enc).chain([b]).map(|p| colsum(&s0, p)).max().expect("balancing coordinate exists");
    let ext_max = (enc..n).map(|p| adj_ext(&s0, p)).fold(f64::NEG_INFINITY, f64::max);
    let mut t = if ext_max.is_finite() { exact_max.max(ceil_grid_f64(ext_max)) } else { exact_max };

    let mut retries = 0;
    let (s, rem_ext, rem_b) = loop {
        if retries > MAX_BALANCING_ROUNDS {
            return Err(ReductionError::BalancingFailed { rounds: retries });
        }
        let mut s = s0.clone();
        // Encoding and balancing remainders are exact; extension remainders carry a
        // grid-floored lower bound (used for routing) and the floating value.
        let mut rem: Vec<Rational> = (0..m)
            .map(|p| if p < enc || p == b { t - colsum(&s0, p) } else { floor_grid_f64(rat_f64(t) - adj_ext(&s0, p)) })
            .collect();
        let mut rem_f: Vec<f64> = (enc..n).map(|p| rat_f64(t) - adj_ext(&s0, p)).collect();
        let mut order: Vec<usize> = (0..enc).collect();
        order.sort_by(|&x, &y| rem[y].cmp(&rem[x]).then(x.cmp(&y)));
        let mut ok = true;
        for &p in &order {
            let mut partners: Vec<usize> = (0..enc).filter(|&q| q != p && rem[q].is_positive()).collect();
            partners.sort_by(|&x, &y| rem[y].cmp(&rem[x]).then(x.cmp(&y)));
            partners.extend(enc..m);
            for q in partners {
                if rem[p].is_zero() {
                    break;
                }
                let x = rem[p].min(rem[q]);
                if !x.is_positive() {
                    continue;
                }
                s[p * m + q] += x;
                s[q * m + p] += x;
                rem[p] -= x;
                rem[q] -= x;
                if (enc..n).contains(&q) {
                    rem_f[q - enc] -= rat_f64(x);
                }
            }
            if rem[p].is_positive() {
                ok = false;
                break;
            }
        }
        if ok {
            break (s, rem_f, rem[b]);
        }
        t += rat(T_STEP.0, T_STEP.1);
        retries += 1;
        log::info!("balancing S: raising common column sum to {t} (retry {retries})");
    };

    let mut s_f = RealMatrix::from_fn(m, |i, j| rat_f64(s[i * m + j]));
    for (k, r) in rem_ext.iter().enumerate() {
        let p = enc + k;
        s_f.data[p * m + p] += r.max(0.0);
    }
    s_f.data[b * m + b] = rat_f64(s[b * m + b] + rem_b);
    let encoding_block = (0..enc * enc).map(|k| s[(k / enc) * m + k % enc]).collect();
    Ok(SMatrix { s: s_f, encoding_block, t, s_big, retries })
}

/// The small (d×d) matrices of the reduction.
#[derive(Clone, Debug, Serialize)]
pub struct Assembled {
    pub q: RealMatrix,
    pub p: RealMatrix,
    pub b_c: Vec<RealMatrix>,
    pub k: f64,
    pub sigma: f64,
    pub alpha: f64,
}

const K2: [[f64; 2]; 2] = [[1.0, -1.0], [-1.0, 1.0]];
const Y2: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

/// Assembles `Q = kI + S⊗J⊗J + Σ_c v_c v_cᵀ⊗K⊗(ε_c I − Y/3)` (`k = −σ`, `σ = 4T`), `P = α(I − 𝟙𝟙ᵀ)` with `α = σ + 1`, and `B^(c)`.
pub fn assemble_qpb(inst: &SatInstance, vecs: &ClauseVectors, s: &SMatrix) -> Assembled {
    let v = inst.num_vars;
    let m = s.s.dim();
    let d = 4 * m;
    let sigma = 4.0 * rat_f64(s.t);
    let k = -sigma;
    let alpha = sigma + 1.0;
    let eps: Vec<f64> = (0..v).map(|x| rat_f64(detuning(x, v))).collect();
    let coord = |x: usize, p: usize| if p < vecs.n { vecs.v_c[x][p] } else { 0.0 };
    let split = |i: usize| (i / 4, (i / 2) % 2, i % 2);
    let q = RealMatrix::from_fn(d, |i, j| {
        let ((p, a, bb), (q, a2, b2)) = (split(i), split(j));
        let mut val = s.s.get(p, q) + if i == j { k } else { 0.0 };
        for x in 0..v {
            let w = coord(x, p) * coord(x, q);
            if w != 0.0 {
                let diag = if bb == b2 { eps[x] } else { 0.0 };
                val += w * K2[a][a2] * (-Y2[bb][b2] / 3.0 + diag);
            }
        }
        val
    });
    let p = RealMatrix::from_fn(d, |i, j| if i == j { 0.0 } else { -alpha });
    let b_c = (0..v)
        .map(|x| {
            RealMatrix::from_fn(d, |i, j| {
                let ((p, a, bb), (q, a2, b2)) = (split(i), split(j));
                coord(x, p) * coord(x, q) * K2[a][a2] * Y2[bb][b2]
            })
        })
        .collect();
    Assembled { q, p, b_c, k, sigma, alpha }
}

/// `2πτ [Σ_ij M_ij |i,i⟩⟨j,j| + Σ_{i≠j} P_ij |i,j⟩⟨i,j|]` as a d²×d² transfer matrix.
pub(crate) fn lift(m: &RealMatrix, p: Option<&RealMatrix>, tau: f64) -> ComplexMatrix {
    let d = m.dim();
    let f = 2.0 * PI * tau;
    let mut out = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let x = m.get(i, j);
            if x != 0.0 {
                out[(i * d + i, j * d + j)] = C64::new(f * x, 0.0);
            }
            if let (Some(p), true) = (p, i != j) {
                out[(i * d + j, i * d + j)] = C64::new(f * p.get(i, j), 0.0);
            }
        }
    }
    out
}
