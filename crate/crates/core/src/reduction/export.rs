//! Bundle export: a directory of JSON artifacts plus `manifest.json`.
//!
//! Dense d×d matrices (`S`, `Q`, `P`, `B^(c)`) are written as arrays of rows; the
//! d²×d² Liouvillians and the snapshot are written as sparse
//! `[row, col, re, im]` entry lists.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::channel::sparse_entries_json;
use crate::report::Verdict;

use super::sat::sat_brute_force;
use super::verify::{extract_encoding_inequalities, VerificationReport};
use super::{ReductionBundle, ReductionError};

pub const BUNDLE_SCHEMA: &str = "reduction-bundle-v1";

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ReductionError> {
    let io = |source| ReductionError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<String, ReductionError> {
    let text = serde_json::to_string(v).expect("JSON value serializes");
    write_atomic(&dir.join(name), text.as_bytes())?;
    Ok(name.to_string())
}

fn sparse_json(m: &crate::matkernel::ComplexMatrix) -> Value {
    json!({ "dim": m.dim(), "entries": sparse_entries_json(m) })
}

/// Exports every artifact of `bundle` into `dir` (created if missing).
pub fn export_bundle(
    bundle: &ReductionBundle,
    dir: &Path,
    tol: f64,
    verification: Option<&VerificationReport>,
) -> Result<(), ReductionError> {
    std::fs::create_dir_all(dir).map_err(|source| ReductionError::Io { path: dir.to_path_buf(), source })?;
    let red = &bundle.reduction;
    let mut files = Vec::new();
    write_atomic(&dir.join("instance.sat"), red.instance.to_text().as_bytes())?;
    files.push("instance.sat".to_string());
    files.push(write_json(dir, "v_c.json", &json!(red.vectors.v_c))?);
    files.push(write_json(dir, "v_cprime.json", &json!(red.vectors.v_cprime))?);
    files.push(write_json(dir, "S.json", &json!(red.s.s))?);
    files.push(write_json(dir, "Q.json", &json!(red.mats.q))?);
    files.push(write_json(dir, "P.json", &json!(red.mats.p))?);
    files.push(write_json(dir, "B_c.json", &json!(red.mats.b_c))?);
    files.push(write_json(dir, "L0.json", &sparse_json(&red.l0()))?);
    for c in 0..red.instance.num_vars {
        files.push(write_json(dir, &format!("A_{}.json", c + 1), &sparse_json(&red.shift(c)))?);
    }
    files.push(write_json(dir, "E.json", &bundle.e.to_json_sparse())?);
    let ineqs = extract_encoding_inequalities(red);
    let expected = match sat_brute_force(&red.instance)? {
        r if r.is_sat() => Verdict::Markovian,
        _ => Verdict::NonMarkovian,
    };
    files.push(write_json(
        dir,
        "inequalities.json",
        &json!(ineqs.iter().map(|q| json!({ "inequality": q.to_string(), "data": q })).collect::<Vec<_>>()),
    )?);
    let manifest = json!({
        "schema": BUNDLE_SCHEMA,
        "instance": {
            "num_vars": red.instance.num_vars,
            "clauses": red.instance.clauses,
            "text": red.instance.to_text(),
        },
        "n": red.s.s.dim(),
        "d": red.d,
        "norm_sq": red.vectors.norm_sq,
        "tau": red.tau,
        "sigma": red.mats.sigma,
        "k": red.mats.k,
        "alpha": red.mats.alpha,
        "common_column_sum": red.s.t.to_string(),
        "s_big": red.s.s_big,
        "balancing_retries": red.s.retries,
        "tolerance": tol,
        "filtering_margin": red.filtering_margin(),
        "expected_verdict": expected,
        "cp_check": {
            "valid": bundle.cp_check.valid,
            "margins": bundle.cp_check.margins,
        },
        "verdicts": verification.map(|v| json!({
            "sat": v.sat,
            "reduced_feasible": v.reduced.feasible,
            "markov": v.markov.verdict,
            "agree": v.agree,
            "disagreements": v.disagreements,
        })),
        "files": files,
    });
    write_json(dir, "manifest.json", &manifest)?;
    Ok(())
}
