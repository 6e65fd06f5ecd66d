//! Verdicts and the versioned JSON report shared by the quantum and classical engines.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::branch::LindbladConditions;
use crate::embed::ClassicalGeneratorConditions;
use crate::matkernel::ComplexMatrix;

pub const REPORT_SCHEMA: &str = "report-v1";

/// Weak-membership multiplier: violations in `(tol, GRAY_FACTOR·tol]` are indeterminate.
pub const GRAY_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Markovian,
    NonMarkovian,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Markovian => "Markovian",
            Verdict::NonMarkovian => "NonMarkovian",
            Verdict::Indeterminate => "Indeterminate",
        })
    }
}

/// Three-way classification of a single violation value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Feasible,
    Gray,
    Infeasible,
}

pub fn band(violation: f64, tol: f64) -> Band {
    if violation <= tol {
        Band::Feasible
    } else if violation <= GRAY_FACTOR * tol {
        Band::Gray
    } else {
        Band::Infeasible
    }
}

/// Why the branch search could not run (or could not be trusted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cause", rename_all = "snake_case")]
pub enum Cause {
    /// A simple eigenvalue on the negative real axis: no logarithm preserves Hermiticity (reality).
    LogUndefined { eigenvalue: [f64; 2] },
    /// The snapshot is singular; it has no logarithm at all.
    Singular { eigenvalue: [f64; 2] },
    /// A repeated negative eigenvalue; non-diagonal logarithms are not searched.
    RepeatedNegativeEigenvalue { eigenvalue: [f64; 2] },
    /// Two nonreal eigenvalues coincide; the branch parametrization is undefined.
    DegenerateSpectrum { a: [f64; 2], b: [f64; 2] },
    /// A nonreal eigenvalue without a conjugate partner.
    UnpairedEigenvalue { eigenvalue: [f64; 2] },
    /// The branch box is larger than the enumeration cap.
    SearchSpaceTooLarge { size: f64 },
    /// A numerical routine failed.
    Numerical { message: String },
}

impl Cause {
    /// Verdict attached to a search that stopped for this cause.
    pub fn verdict(&self) -> Verdict {
        match self {
            Cause::LogUndefined { .. } | Cause::Singular { .. } => Verdict::NonMarkovian,
            _ => Verdict::Indeterminate,
        }
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cause::LogUndefined { eigenvalue: [re, im] } => write!(f, "LogUndefined (eigenvalue {re}{im:+}i on the negative axis)"),
            Cause::Singular { eigenvalue: [re, im] } => write!(f, "Singular (eigenvalue {re:e}{im:+e}i)"),
            Cause::RepeatedNegativeEigenvalue { eigenvalue: [re, im] } => write!(f, "RepeatedNegativeEigenvalue ({re}{im:+}i)"),
            Cause::DegenerateSpectrum { a, b } => write!(f, "DegenerateSpectrum ({}{:+}i ~ {}{:+}i)", a[0], a[1], b[0], b[1]),
            Cause::UnpairedEigenvalue { eigenvalue: [re, im] } => write!(f, "UnpairedEigenvalue ({re}{im:+}i)"),
            Cause::SearchSpaceTooLarge { size } => write!(f, "SearchSpaceTooLarge ({size:e} branches)"),
            Cause::Numerical { message } => write!(f, "Numerical ({message})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Conditions {
    Lindblad(LindbladConditions),
    Classical(ClassicalGeneratorConditions),
}

impl Conditions {
    pub fn violation(&self) -> f64 {
        match self {
            Conditions::Lindblad(c) => c.violation(),
            Conditions::Classical(c) => c.violation(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesResidual {
    pub t: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub schema: String,
    /// `"quantum"` or `"classical"`.
    pub kind: String,
    pub verdict: Verdict,
    pub cause: Option<Cause>,
    pub witness_l: Option<ComplexMatrix>,
    pub witness_m: Option<Vec<i64>>,
    /// Conditions of the best branch evaluated (the witness when Markovian).
    pub conditions: Option<Conditions>,
    pub branch_bound_used: i64,
    pub tolerance_used: f64,
    /// Number of conjugate eigenvalue pairs (dimension of the branch box).
    pub pairs: usize,
    pub branches_total: u64,
    pub branches_evaluated: u64,
    pub branches_pruned: u64,
    /// `‖exp(witness) − snapshot‖_F`.
    pub closure_residual: Option<f64>,
    pub series_residuals: Vec<SeriesResidual>,
    pub note: String,
}

impl GeneratorReport {
    pub(crate) fn empty(kind: &str, tol: f64, bound: i64) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            kind: kind.to_string(),
            verdict: Verdict::Indeterminate,
            cause: None,
            witness_l: None,
            witness_m: None,
            conditions: None,
            branch_bound_used: bound,
            tolerance_used: tol,
            pairs: 0,
            branches_total: 0,
            branches_evaluated: 0,
            branches_pruned: 0,
            closure_residual: None,
            series_residuals: Vec::new(),
            note: String::new(),
        }
    }

    pub(crate) fn from_cause(kind: &str, tol: f64, bound: i64, cause: Cause) -> Self {
        let mut r = Self::empty(kind, tol, bound);
        r.verdict = cause.verdict();
        r.note = format!("branch search not run: {cause}");
        r.cause = Some(cause);
        r
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for GeneratorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        if let Some(c) = &self.cause {
            writeln!(f, "cause: {c}")?;
        }
        writeln!(f, "tolerance: {:e}, branch bound: {}, pairs: {}", self.tolerance_used, self.branch_bound_used, self.pairs)?;
        writeln!(
            f,
            "branches: {} total, {} evaluated, {} pruned",
            self.branches_total, self.branches_evaluated, self.branches_pruned
        )?;
        if let Some(m) = &self.witness_m {
            writeln!(f, "witness m: {m:?}")?;
        }
        match &self.conditions {
            Some(Conditions::Lindblad(c)) => writeln!(
                f,
                "conditions: hermiticity {:.3e}, normalization {:.3e}, ccp margin {:.3e}",
                c.hermiticity_residual, c.normalization_residual, c.ccp_margin
            )?,
            Some(Conditions::Classical(c)) => writeln!(
                f,
                "conditions: offdiag min {:.3e}, column sums {:.3e}, realness {:.3e}",
                c.offdiag_min, c.column_sum_residual, c.realness_residual
            )?,
            None => {}
        }
        if let Some(r) = self.closure_residual {
            writeln!(f, "closure residual: {r:.3e}")?;
        }
        for s in &self.series_residuals {
            writeln!(f, "  t = {}: residual {:.3e}", s.t, s.residual)?;
        }
        if !self.note.is_empty() {
            writeln!(f, "note: {}", self.note)?;
        }
        Ok(())
    }
}
