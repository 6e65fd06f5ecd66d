//! Monotone 1-in-3SAT instances: text format, brute-force oracle and the
//! small-instance corpus.
//!
//! Text format:
//!
//! ```text
//! c optional comment lines
//! p 1in3 <V> <C>
//! i j k 0        (C clause lines, 1-indexed variables)
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ReductionError;

/// Largest instance accepted by [`sat_brute_force`].
pub const MAX_BRUTE_FORCE_VARS: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SatInstance {
    pub num_vars: usize,
    /// Clauses as 1-indexed variable triples.
    pub clauses: Vec<[usize; 3]>,
}

impl SatInstance {
    /// Validates variable ranges and distinctness within each clause.
    pub fn new(num_vars: usize, clauses: Vec<[usize; 3]>) -> Result<Self, ReductionError> {
        if num_vars == 0 {
            return Err(ReductionError::Parse { line: 0, message: "number of variables must be positive".into() });
        }
        for (k, c) in clauses.iter().enumerate() {
            check_clause(c, num_vars).map_err(|message| ReductionError::InvalidClause { clause: k + 1, message })?;
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Bitmask of each clause over variables `0..V`.
    fn masks(&self) -> Vec<u64> {
        self.clauses.iter().map(|c| c.iter().fold(0u64, |m, &v| m | 1 << (v - 1))).collect()
    }

    /// Exactly one variable of every clause is true.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().filter(|&&v| assignment[v - 1]).count() == 1)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("p 1in3 {} {}\n", self.num_vars, self.clauses.len());
        for [a, b, c] in &self.clauses {
            s.push_str(&format!("{a} {b} {c} 0\n"));
        }
        s
    }
}

impl fmt::Display for SatInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V={} {{", self.num_vars)?;
        for (k, [a, b, c]) in self.clauses.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({a},{b},{c})")?;
        }
        f.write_str("}")
    }
}

fn check_clause(c: &[usize; 3], num_vars: usize) -> Result<(), String> {
    if let Some(v) = c.iter().find(|&&v| v == 0 || v > num_vars) {
        return Err(format!("variable {v} outside 1..={num_vars}"));
    }
    if c[0] == c[1] || c[0] == c[2] || c[1] == c[2] {
        return Err(format!("repeated variable in clause {} {} {}", c[0], c[1], c[2]));
    }
    Ok(())
}

pub fn parse_sat(text: &str) -> Result<SatInstance, ReductionError> {
    let perr = |line: usize, message: String| ReductionError::Parse { line, message };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "p" {
            if header.is_some() {
                return Err(perr(line_no, "duplicate header".into()));
            }
            if toks.len() != 4 || toks[1] != "1in3" {
                return Err(perr(line_no, "expected header \"p 1in3 V C\"".into()));
            }
            let v = toks[2].parse::<usize>().map_err(|_| perr(line_no, format!("bad variable count {:?}", toks[2])))?;
            let c = toks[3].parse::<usize>().map_err(|_| perr(line_no, format!("bad clause count {:?}", toks[3])))?;
            if v == 0 {
                return Err(perr(line_no, "number of variables must be positive".into()));
            }
            header = Some((v, c, line_no));
            continue;
        }
        let Some((v, _, _)) = header else {
            return Err(perr(line_no, "clause before header".into()));
        };
        if toks.len() != 4 || toks[3] != "0" {
            return Err(perr(line_no, "expected clause \"i j k 0\"".into()));
        }
        let mut c = [0usize; 3];
        for (slot, t) in c.iter_mut().zip(&toks[..3]) {
            let x: i64 = t.parse().map_err(|_| perr(line_no, format!("bad literal {t:?}")))?;
            if x < 0 {
                return Err(ReductionError::InvalidClause { clause: clauses.len() + 1, message: format!("negated literal {x} (instances are monotone)") });
            }
            *slot = x as usize;
        }
        check_clause(&c, v).map_err(|message| ReductionError::InvalidClause { clause: clauses.len() + 1, message: format!("line {line_no}: {message}") })?;
        clauses.push(c);
    }
    let Some((v, c, hline)) = header else {
        return Err(perr(0, "missing header \"p 1in3 V C\"".into()));
    };
    if clauses.len() != c {
        return Err(perr(hline, format!("header declares {c} clauses, found {}", clauses.len())));
    }
    Ok(SatInstance { num_vars: v, clauses })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SatResult {
    Satisfiable { assignment: Vec<bool> },
    Unsatisfiable,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Satisfiable { .. })
    }
}

/// Exhaustive search. Assignments are scanned as binary numbers `x_V … x_1`
/// (x_1 least significant), so the first hit is the smallest in that order.
pub fn sat_brute_force(inst: &SatInstance) -> Result<SatResult, ReductionError> {
    let v = inst.num_vars;
    if v > MAX_BRUTE_FORCE_VARS {
        return Err(ReductionError::TooLarge { vars: v, clauses: inst.num_clauses(), reason: format!("brute force is capped at {MAX_BRUTE_FORCE_VARS} variables") });
    }
    let masks = inst.masks();
    for bits in 0u64..(1u64 << v) {
        if masks.iter().all(|&m| (bits & m).count_ones() == 1) {
            return Ok(SatResult::Satisfiable { assignment: (0..v).map(|i| bits >> i & 1 == 1).collect() });
        }
    }
    Ok(SatResult::Unsatisfiable)
}

/// The canonical unsatisfiable instance {(1,2,3),(1,2,4),(3,4,5),(1,2,5)}.
pub fn canonical_unsat() -> SatInstance {
    SatInstance { num_vars: 5, clauses: vec![[1, 2, 3], [1, 2, 4], [3, 4, 5], [1, 2, 5]] }
}

/// All instances with `1 ≤ V ≤ max_vars`, `0 ≤ C ≤ max_clauses` distinct clauses,
/// one representative per variable-relabeling class (the lexicographically smallest
/// sorted clause list), ordered by `(V, C, clauses)`.
pub fn corpus(max_vars: usize, max_clauses: usize) -> Vec<SatInstance> {
    let mut out = Vec::new();
    for v in 1..=max_vars {
        let triples: Vec<[usize; 3]> = (1..=v)
            .flat_map(|a| (a + 1..=v).flat_map(move |b| (b + 1..=v).map(move |c| [a, b, c])))
            .collect();
        let perms = permutations(v);
        for c in 0..=max_clauses.min(triples.len()) {
            let mut seen: BTreeSet<Vec<[usize; 3]>> = BTreeSet::new();
            for combo in combinations(triples.len(), c) {
                let clauses: Vec<[usize; 3]> = combo.iter().map(|&i| triples[i]).collect();
                let key = perms.iter().map(|p| relabel(&clauses, p)).min().expect("at least one permutation");
                seen.insert(key);
            }
            out.extend(seen.into_iter().map(|clauses| SatInstance { num_vars: v, clauses }));
        }
    }
    out
}

fn relabel(clauses: &[[usize; 3]], perm: &[usize]) -> Vec<[usize; 3]> {
    let mut r: Vec<[usize; 3]> = clauses
        .iter()
        .map(|c| {
            let mut t = c.map(|x| perm[x - 1] + 1);
            t.sort_unstable();
            t
        })
        .collect();
    r.sort_unstable();
    r
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}
