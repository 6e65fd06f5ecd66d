//! Quantum snapshots (transfer matrices of CPT maps), classical snapshots
//! (column-stochastic matrices), their validation and their JSON format.
//!
//! A map `Φ` on d×d matrices is stored as the d²×d² transfer matrix
//! `T_{(a,b),(i,j)} = Φ(|i⟩⟨j|)_{ab}` acting on row-major vectorized inputs
//! (convention tag `transfer-rowmajor-v1`). Files written with the pairing
//! `E_{(i,j),(k,l)} = tr[Φ(|i⟩⟨j|)·|k⟩⟨l|]` (tag `paper-ijkl-v1`) are re-indexed
//! on load via `T_{(a,b),(i,j)} = E_{(i,j),(b,a)}`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::matkernel::{flip_op, gamma_reshuffle, min_hermitian_eigenvalue, omega, sqrt_dim, ComplexMatrix, MatError, C64};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const TRANSFER_CONVENTION: &str = "transfer-rowmajor-v1";
pub const PAPER_CONVENTION: &str = "paper-ijkl-v1";

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("matrix dimension {found} does not match d² = {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown index convention {0:?}")]
    UnknownConvention(String),
    #[error("expected a {expected} snapshot, found {found}")]
    KindMismatch { expected: &'static str, found: String },
    #[error("series times must be positive and strictly increasing")]
    BadTimes,
    #[error("series snapshots have mismatched dimensions")]
    InconsistentSeries,
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Convention {
    #[default]
    Transfer,
    Paper,
}

impl Convention {
    pub fn tag(self) -> &'static str {
        match self {
            Convention::Transfer => TRANSFER_CONVENTION,
            Convention::Paper => PAPER_CONVENTION,
        }
    }

    pub fn from_tag(s: &str) -> Result<Self, ChannelError> {
        match s {
            TRANSFER_CONVENTION | "transfer" | "transfer-index" => Ok(Convention::Transfer),
            PAPER_CONVENTION | "paper" | "paper-index" => Ok(Convention::Paper),
            other => Err(ChannelError::UnknownConvention(other.to_string())),
        }
    }
}

/// Transfer matrix of a linear map on d×d matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    d: usize,
    matrix: ComplexMatrix,
}

impl TransferMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, ChannelError> {
        let d = sqrt_dim(matrix.dim())?;
        Ok(Self { d, matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self { d, matrix: ComplexMatrix::identity(d * d) }
    }

    /// Converts a matrix given in the `E_{(i,j),(k,l)}` pairing.
    pub fn from_paper_index(e: &ComplexMatrix) -> Result<Self, ChannelError> {
        let d = sqrt_dim(e.dim())?;
        let m = ComplexMatrix::from_fn(d * d, |r, c| {
            let (a, b) = (r / d, r % d);
            e[(c, b * d + a)]
        });
        Ok(Self { d, matrix: m })
    }

    /// Inverse of [`TransferMatrix::from_paper_index`].
    pub fn to_paper_index(&self) -> ComplexMatrix {
        let d = self.d;
        ComplexMatrix::from_fn(d * d, |r, c| {
            let (k, l) = (c / d, c % d);
            self.matrix[(l * d + k, r)]
        })
    }

    /// Diagonal lift of a column-stochastic matrix: populations evolve by `t`,
    /// every coherence `|i⟩⟨j|` (i ≠ j) is multiplied by `coherence`.
    pub fn lift_classical(t: &StochasticMatrix, coherence: f64) -> Self {
        let d = t.dim();
        let mut m = ComplexMatrix::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                m[(i * d + i, j * d + j)] = C64::new(t.get(i, j), 0.0);
                if i != j {
                    m[(i * d + j, i * d + j)] = C64::new(coherence, 0.0);
                }
            }
        }
        Self { d, matrix: m }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Column-stochastic matrix (real, row-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self, ChannelError> {
        if data.len() != dim * dim || dim == 0 {
            return Err(ChannelError::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(MatError::NonFinite.into());
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ChannelError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ChannelError::Parse("matrix is not square".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
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
        ComplexMatrix::from_real(self.dim, &self.data).expect("validated on construction")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Snapshot {
    Quantum(TransferMatrix),
    Classical(StochasticMatrix),
}

impl Snapshot {
    pub fn kind(&self) -> &'static str {
        match self {
            Snapshot::Quantum(_) => "quantum",
            Snapshot::Classical(_) => "classical",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Snapshot::Quantum(t) => t.hilbert_dim(),
            Snapshot::Classical(s) => s.dim(),
        }
    }
}

/// Snapshots at strictly increasing positive times, all of one kind and dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSeries {
    entries: Vec<(f64, Snapshot)>,
}

impl SnapshotSeries {
    pub fn new(entries: Vec<(f64, Snapshot)>) -> Result<Self, ChannelError> {
        if entries.is_empty() {
            return Err(ChannelError::Parse("series is empty".into()));
        }
        let mut prev = 0.0;
        for (t, _) in &entries {
            if !(t.is_finite() && *t > prev) {
                return Err(ChannelError::BadTimes);
            }
            prev = *t;
        }
        let (k0, d0) = (entries[0].1.kind(), entries[0].1.dim());
        if entries.iter().any(|(_, s)| s.kind() != k0 || s.dim() != d0) {
            return Err(ChannelError::InconsistentSeries);
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, Snapshot)] {
        &self.entries
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

/// Outcome of a validation: named margins and their conjunction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub tolerance: f64,
    pub margins: Vec<Margin>,
}

impl ValidationReport {
    fn from_margins(tolerance: f64, margins: Vec<Margin>) -> Self {
        Self { valid: margins.iter().all(|m| m.passed), tolerance, margins }
    }

    pub fn margin(&self, name: &str) -> Option<f64> {
        self.margins.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "valid: {} (tol {:e})", self.valid, self.tolerance)?;
        for m in &self.margins {
            writeln!(f, "  {:<28} {:>12.4e}  {}", m.name, m.value, if m.passed { "ok" } else { "FAIL" })?;
        }
        Ok(())
    }
}

pub const HERMITICITY: &str = "hermiticity_residual";
pub const TRACE: &str = "trace_residual";
pub const CHOI_MIN: &str = "choi_min_eigenvalue";
pub const COLUMN_SUM: &str = "column_sum_residual";
pub const MIN_ENTRY: &str = "min_entry";
pub const MAX_ENTRY_EXCESS: &str = "max_entry_excess";

/// `‖⟨ω|M − ⟨ω|‖₂`.
pub fn trace_residual(m: &ComplexMatrix, d: usize) -> f64 {
    let w = omega(d);
    let row = m.vec_mul(&w);
    row.iter().zip(&w).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// `‖Tr_out(T^Γ) − I‖_F`; equivalent restatement of trace preservation.
pub fn choi_partial_trace_residual(t: &TransferMatrix) -> Result<f64, ChannelError> {
    let d = t.d;
    let g = gamma_reshuffle(&t.matrix)?;
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let s: C64 = (0..d).map(|a| g[(a * d + i, a * d + j)]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            acc += (s - target).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// Hermiticity preservation, trace preservation and complete positivity margins.
pub fn validate_cpt(t: &TransferMatrix, tol: f64) -> ValidationReport {
    let herm = flip_op(&t.matrix).map(|f| f.dist(&t.matrix)).unwrap_or(f64::INFINITY);
    let tr = trace_residual(&t.matrix, t.d);
    let choi = gamma_reshuffle(&t.matrix)
        .map_err(ChannelError::from)
        .and_then(|g| Ok(min_hermitian_eigenvalue(&g)?))
        .unwrap_or(f64::NEG_INFINITY);
    ValidationReport::from_margins(
        tol,
        vec![
            Margin { name: HERMITICITY.into(), value: herm, passed: herm <= tol },
            Margin { name: TRACE.into(), value: tr, passed: tr <= tol },
            Margin { name: CHOI_MIN.into(), value: choi, passed: choi >= -tol },
        ],
    )
}

/// Column sums, entry range.
pub fn validate_stochastic(t: &StochasticMatrix, tol: f64) -> ValidationReport {
    let n = t.dim;
    let colsum = (0..n).map(|j| ((0..n).map(|i| t.get(i, j)).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    let min = t.data.iter().copied().fold(f64::INFINITY, f64::min);
    let excess = t.data.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0;
    ValidationReport::from_margins(
        tol,
        vec![
            Margin { name: COLUMN_SUM.into(), value: colsum, passed: colsum <= tol },
            Margin { name: MIN_ENTRY.into(), value: min, passed: min >= -tol },
            Margin { name: MAX_ENTRY_EXCESS.into(), value: excess, passed: excess <= tol },
        ],
    )
}

/// Applies the map to a d×d matrix. Logs a warning if `rho` is not a unit-trace Hermitian matrix.
pub fn apply_map(t: &TransferMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
    if rho.dim() != t.d {
        return Err(ChannelError::DimensionMismatch { expected: t.d, found: rho.dim() });
    }
    if rho.hermiticity_residual() > DEFAULT_TOL || (rho.trace() - C64::new(1.0, 0.0)).norm() > DEFAULT_TOL {
        log::warn!("apply_map: input is not a unit-trace Hermitian matrix");
    }
    let out = t.matrix.mul_vec(rho.as_slice());
    Ok(ComplexMatrix::from_row_major(t.d, out)?)
}

// ---------------------------------------------------------------------------
// JSON

fn complex_rows(m: &ComplexMatrix) -> Value {
    let n = m.dim();
    Value::Array((0..n).map(|i| Value::Array(m.row(i).iter().map(|z| json!([z.re, z.im])).collect())).collect())
}

fn parse_f64(v: &Value, ctx: &str) -> Result<f64, ChannelError> {
    v.as_f64().ok_or_else(|| ChannelError::Parse(format!("{ctx}: expected a number")))
}

fn parse_rows(v: &Value) -> Result<Vec<&Vec<Value>>, ChannelError> {
    let rows = v.as_array().ok_or_else(|| ChannelError::Parse("\"matrix\" must be an array of rows".into()))?;
    let rows: Vec<&Vec<Value>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.as_array().ok_or_else(|| ChannelError::Parse(format!("row {i} is not an array"))))
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(ChannelError::Parse(format!("row {i} has wrong length (matrix must be square)")));
    }
    Ok(rows)
}

pub fn parse_complex_matrix(v: &Value) -> Result<ComplexMatrix, ChannelError> {
    let rows = parse_rows(v)?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, r) in rows.iter().enumerate() {
        for (j, e) in r.iter().enumerate() {
            let ctx = format!("entry ({i},{j})");
            let pair = e.as_array().filter(|p| p.len() == 2);
            let z = match pair {
                Some(p) => C64::new(parse_f64(&p[0], &ctx)?, parse_f64(&p[1], &ctx)?),
                None => C64::new(parse_f64(e, &ctx)?, 0.0),
            };
            data.push(z);
        }
    }
    Ok(ComplexMatrix::from_row_major(n, data)?)
}

pub fn complex_matrix_json(m: &ComplexMatrix) -> Value {
    json!({ "dim": m.dim(), "matrix": complex_rows(m) })
}

/// Nonzero entries as `[row, col, re, im]` quadruples.
pub fn sparse_entries_json(m: &ComplexMatrix) -> Value {
    let n = m.dim();
    let entries: Vec<Value> = m
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
        .map(|(k, z)| json!([k / n, k % n, z.re, z.im]))
        .collect();
    Value::Array(entries)
}

/// Inverse of [`sparse_entries_json`] for an `n×n` matrix.
pub fn parse_sparse_entries(v: &Value, n: usize) -> Result<ComplexMatrix, ChannelError> {
    let items = v.as_array().ok_or_else(|| ChannelError::Parse("\"entries\" must be an array".into()))?;
    let mut m = ComplexMatrix::zeros(n);
    for (k, e) in items.iter().enumerate() {
        let q = e.as_array().filter(|q| q.len() == 4).ok_or_else(|| ChannelError::Parse(format!("entry {k}: expected [row, col, re, im]")))?;
        let idx = |x: &Value| x.as_u64().map(|i| i as usize).filter(|&i| i < n);
        let (Some(i), Some(j)) = (idx(&q[0]), idx(&q[1])) else {
            return Err(ChannelError::Parse(format!("entry {k}: index out of range")));
        };
        let ctx = format!("entry {k}");
        m[(i, j)] = C64::new(parse_f64(&q[2], &ctx)?, parse_f64(&q[3], &ctx)?);
    }
    if !m.is_finite() {
        return Err(ChannelError::Matrix(MatError::NonFinite));
    }
    Ok(m)
}

impl TransferMatrix {
    /// JSON in the canonical transfer convention.
    pub fn to_json(&self) -> Value {
        json!({
            "kind": "quantum",
            "dim": self.d,
            "convention": TRANSFER_CONVENTION,
            "matrix": complex_rows(&self.matrix),
        })
    }

    /// Same as [`to_json`](Self::to_json) but lists only nonzero entries (`"entries"` instead of `"matrix"`).
    pub fn to_json_sparse(&self) -> Value {
        json!({
            "kind": "quantum",
            "dim": self.d,
            "convention": TRANSFER_CONVENTION,
            "entries": sparse_entries_json(&self.matrix),
        })
    }
}

impl StochasticMatrix {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.dim).map(|i| json!(self.data[i * self.dim..(i + 1) * self.dim])).collect();
        json!({ "kind": "classical", "dim": self.dim, "convention": TRANSFER_CONVENTION, "matrix": rows })
    }
}

impl Snapshot {
    pub fn to_json(&self) -> Value {
        match self {
            Snapshot::Quantum(t) => t.to_json(),
            Snapshot::Classical(s) => s.to_json(),
        }
    }

    /// Parses a snapshot object. `override_convention` replaces the file's own tag.
    pub fn from_json(v: &Value, override_convention: Option<Convention>) -> Result<Self, ChannelError> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| ChannelError::Parse("missing \"kind\"".into()))?;
        let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| ChannelError::Parse("missing \"dim\"".into()))? as usize;
        let convention = match (override_convention, v.get("convention").and_then(Value::as_str)) {
            (Some(c), _) => c,
            (None, Some(tag)) => Convention::from_tag(tag)?,
            (None, None) => Convention::Transfer,
        };
        let matrix = v.get("matrix");
        let sparse = v.get("entries");
        if matrix.is_none() && !(kind == "quantum" && sparse.is_some()) {
            return Err(ChannelError::Parse("missing \"matrix\"".into()));
        }
        match kind {
            "quantum" => {
                let m = match (matrix, sparse) {
                    (Some(mv), _) => parse_complex_matrix(mv)?,
                    (None, Some(ev)) => parse_sparse_entries(ev, dim * dim)?,
                    (None, None) => unreachable!(),
                };
                if m.dim() != dim * dim {
                    return Err(ChannelError::DimensionMismatch { expected: dim * dim, found: m.dim() });
                }
                let t = match convention {
                    Convention::Transfer => TransferMatrix::new(m)?,
                    Convention::Paper => TransferMatrix::from_paper_index(&m)?,
                };
                Ok(Snapshot::Quantum(t))
            }
            "classical" => {
                let rows = parse_rows(matrix.expect("checked above"))?;
                let mut data = Vec::new();
                for (i, r) in rows.iter().enumerate() {
                    for (j, e) in r.iter().enumerate() {
                        data.push(parse_f64(e, &format!("entry ({i},{j})"))?);
                    }
                }
                if rows.len() != dim {
                    return Err(ChannelError::DimensionMismatch { expected: dim, found: rows.len() });
                }
                Ok(Snapshot::Classical(StochasticMatrix::new(dim, data)?))
            }
            other => Err(ChannelError::Parse(format!("unknown kind {other:?}"))),
        }
    }

    pub fn from_str(text: &str, convention: Option<Convention>) -> Result<Self, ChannelError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ChannelError::Parse(e.to_string()))?;
        Self::from_json(&v, convention)
    }

    pub fn load(path: &Path, convention: Option<Convention>) -> Result<Self, ChannelError> {
        Self::from_str(&std::fs::read_to_string(path)?, convention)
    }
}

impl SnapshotSeries {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": "series",
            "snapshots": self.entries.iter().map(|(t, s)| json!({ "t": t, "snapshot": s.to_json() })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, convention: Option<Convention>) -> Result<Self, ChannelError> {
        if v.get("kind").and_then(Value::as_str) != Some("series") {
            return Err(ChannelError::KindMismatch { expected: "series", found: format!("{}", v.get("kind").unwrap_or(&Value::Null)) });
        }
        let items = v
            .get("snapshots")
            .and_then(Value::as_array)
            .ok_or_else(|| ChannelError::Parse("missing \"snapshots\" array".into()))?;
        let mut entries = Vec::with_capacity(items.len());
        for (k, item) in items.iter().enumerate() {
            let t = item.get("t").and_then(Value::as_f64).ok_or_else(|| ChannelError::Parse(format!("snapshot {k}: missing \"t\"")))?;
            let s = item.get("snapshot").ok_or_else(|| ChannelError::Parse(format!("snapshot {k}: missing \"snapshot\"")))?;
            entries.push((t, Snapshot::from_json(s, convention)?));
        }
        Self::new(entries)
    }

    pub fn from_str(text: &str, convention: Option<Convention>) -> Result<Self, ChannelError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ChannelError::Parse(e.to_string()))?;
        Self::from_json(&v, convention)
    }

    pub fn load(path: &Path, convention: Option<Convention>) -> Result<Self, ChannelError> {
        Self::from_str(&std::fs::read_to_string(path)?, convention)
    }
}
