//! Command-line front end.
//!
//! Exit codes: 0 yes, 1 no, 2 indeterminate, 3 verification mismatch,
//! 64 usage, 65 invalid or oversized input, 66 unreadable input,
//! 70 internal failure, 73 output not writable.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::branch::{decide_markovian, decompose_lindblad, fit_generator_series, DecideError, SeriesError, DEFAULT_BRANCH_BOUND};
use crate::channel::{complex_matrix_json, ChannelError, Convention, Snapshot, SnapshotSeries, DEFAULT_TOL};
use crate::embed::decide_embeddable;
use crate::reduction::export::write_atomic;
use crate::reduction::{
    build_bundle, corpus, default_tolerance, default_tolerance_with, export_bundle, parse_sat, sat_brute_force,
    verify_reduction, ReductionError, SatInstance, VerificationReport,
};
use crate::report::{GeneratorReport, Verdict, REPORT_SCHEMA};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INDETERMINATE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;
pub const EXIT_CANT_CREATE: i32 = 73;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "GENFINDER_THREADS";

pub const GENERATOR_SCHEMA: &str = "generator-v1";
pub const VERIFY_SCHEMA: &str = "verify-reduction-v1";

#[derive(Parser, Debug)]
#[command(name = "genfinder", version, about = "Decide whether snapshots admit a time-independent master-equation generator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Decision tolerance (must be positive).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Branches m ∈ [−B, B]^pairs are searched.
    #[arg(long, default_value_t = DEFAULT_BRANCH_BOUND)]
    pub branch_bound: i64,
    /// Emit JSON instead of a text summary.
    #[arg(long)]
    pub json: bool,
    /// Output path (file, or directory for `reduce`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Index convention of quantum input files, overriding the file's own tag.
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ConventionArg {
    /// `T[(a,b),(i,j)] = Φ(|i⟩⟨j|)_{ab}`.
    Transfer,
    /// The `E_{ij,kl}` layout of the literature.
    Paper,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Transfer => Convention::Transfer,
            ConventionArg::Paper => Convention::Paper,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a quantum channel is Markovian.
    CheckMarkov {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether a stochastic matrix is embeddable.
    CheckEmbed {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write a generator of a snapshot (quantum or classical).
    Extract {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit one generator to a series of quantum snapshots.
    Fit {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Encode a 1-in-3SAT instance as a snapshot bundle (requires --out DIR).
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check SAT, the reduced inequalities and the snapshot verdict.
    VerifyReduction {
        /// Instance file; omit with --corpus.
        file: Option<PathBuf>,
        /// Sweep every instance with V ≤ 5, C ≤ 4 (up to relabeling).
        #[arg(long)]
        corpus: bool,
        /// Precision constant of the default tolerance (ignored with --tol).
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

/// A failure mapped to an exit code.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        let code = if matches!(e, ChannelError::Io(_)) { EXIT_NO_INPUT } else { EXIT_DATA };
        Self::new(code, e.to_string())
    }
}

impl From<DecideError> for CliError {
    fn from(e: DecideError) -> Self {
        Self::new(if matches!(e, DecideError::NegativeBound) { EXIT_USAGE } else { EXIT_DATA }, e.to_string())
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::Channel(c) => c.into(),
            SeriesError::Decide(d) => d.into(),
            SeriesError::NotQuantum => Self::new(EXIT_DATA, e.to_string()),
        }
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        let code = match &e {
            ReductionError::Parse { .. } | ReductionError::InvalidClause { .. } | ReductionError::TooLarge { .. } => EXIT_DATA,
            ReductionError::Io { .. } => EXIT_CANT_CREATE,
            _ => EXIT_INTERNAL,
        };
        Self::new(code, e.to_string())
    }
}

pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Markovian => EXIT_YES,
        Verdict::NonMarkovian => EXIT_NO,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    }
}

/// Parses `args` (including the program name) and runs the command; output goes
/// to stdout, diagnostics to stderr. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_YES };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

/// Applies [`THREADS_ENV`] to the global rayon pool (no-op if already built).
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::new(EXIT_USAGE, format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("global thread pool already initialized");
    }
    Ok(())
}

fn execute(cmd: &Command) -> Result<i32, CliError> {
    configure_threads()?;
    match cmd {
        Command::CheckMarkov { file, common } => check_markov(file, common),
        Command::CheckEmbed { file, common } => check_embed(file, common),
        Command::Extract { file, common } => extract(file, common),
        Command::Fit { file, common } => fit(file, common),
        Command::Reduce { file, common } => reduce(file, common),
        Command::VerifyReduction { file, corpus, kappa, common } => verify(file.as_deref(), *corpus, *kappa, common),
    }
}

fn tolerance(common: &Common, default: f64) -> Result<f64, CliError> {
    let tol = common.tol.unwrap_or(default);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::new(EXIT_USAGE, format!("--tol must be positive, got {tol}")));
    }
    if common.branch_bound < 0 {
        return Err(CliError::new(EXIT_USAGE, "--branch-bound must be non-negative"));
    }
    Ok(tol)
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new(EXIT_NO_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn load_snapshot(path: &Path, common: &Common) -> Result<Snapshot, CliError> {
    Ok(Snapshot::from_str(&read_input(path)?, common.convention.map(Into::into))?)
}

/// Writes `text` to `--out` atomically, or to stdout.
fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => write_atomic(path, text.as_bytes())
            .map_err(|e| CliError::new(EXIT_CANT_CREATE, e.to_string())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn render_report(report: &GeneratorReport, common: &Common) -> String {
    if common.json {
        report.to_json_string()
    } else {
        report.to_string()
    }
}

fn decide(snapshot: &Snapshot, tol: f64, bound: i64) -> Result<GeneratorReport, CliError> {
    Ok(match snapshot {
        Snapshot::Quantum(t) => decide_markovian(t, tol, bound)?,
        Snapshot::Classical(s) => decide_embeddable(s, tol, bound)?,
    })
}

fn expect_kind(s: &Snapshot, kind: &'static str) -> Result<(), CliError> {
    if s.kind() != kind {
        return Err(ChannelError::KindMismatch { expected: kind, found: s.kind().to_string() }.into());
    }
    Ok(())
}

fn check_markov(file: &Path, common: &Common) -> Result<i32, CliError> {
    let tol = tolerance(common, DEFAULT_TOL)?;
    let snap = load_snapshot(file, common)?;
    expect_kind(&snap, "quantum")?;
    let report = decide(&snap, tol, common.branch_bound)?;
    emit(common, &render_report(&report, common))?;
    Ok(verdict_exit_code(report.verdict))
}

fn check_embed(file: &Path, common: &Common) -> Result<i32, CliError> {
    let tol = tolerance(common, DEFAULT_TOL)?;
    let snap = load_snapshot(file, common)?;
    expect_kind(&snap, "classical")?;
    let report = decide(&snap, tol, common.branch_bound)?;
    emit(common, &render_report(&report, common))?;
    Ok(verdict_exit_code(report.verdict))
}

/// The generator file: witness, optional `(H, G)` decomposition, and the report.
fn generator_document(report: &GeneratorReport, tol: f64) -> Result<Value, CliError> {
    let l = report.witness_l.as_ref().ok_or_else(|| CliError::new(EXIT_INTERNAL, "Markovian report without a witness"))?;
    let decomposition = if report.kind == "quantum" {
        let dec = decompose_lindblad(l, tol).map_err(|e| CliError::new(EXIT_INTERNAL, e.to_string()))?;
        if dec.reassembly_residual > 10.0 * tol * l.norm_fro().max(1.0) {
            return Err(CliError::new(EXIT_INTERNAL, format!("reassembly residual {:e} exceeds 10·tol", dec.reassembly_residual)));
        }
        json!({ "h": complex_matrix_json(&dec.h), "g": complex_matrix_json(&dec.g), "reassembly_residual": dec.reassembly_residual })
    } else {
        Value::Null
    };
    Ok(json!({
        "schema": GENERATOR_SCHEMA,
        "kind": report.kind,
        "convention": crate::channel::TRANSFER_CONVENTION,
        "generator": complex_matrix_json(l),
        "decomposition": decomposition,
        "report": report,
    }))
}

fn finish_generator(report: GeneratorReport, tol: f64, common: &Common) -> Result<i32, CliError> {
    if report.verdict != Verdict::Markovian {
        eprint!("{report}");
        return Ok(verdict_exit_code(report.verdict));
    }
    let doc = generator_document(&report, tol)?;
    let text = if common.json || common.out.is_some() {
        serde_json::to_string_pretty(&doc).expect("generator document serializes")
    } else {
        let mut s = report.to_string();
        if let Some(r) = doc["decomposition"].get("reassembly_residual") {
            s.push_str(&format!("reassembly residual: {:.3e}\n", r.as_f64().unwrap_or(f64::NAN)));
        }
        s.push_str("generator (rows of [re, im]):\n");
        for row in doc["generator"]["matrix"].as_array().into_iter().flatten() {
            s.push_str(&format!("  {row}\n"));
        }
        s
    };
    emit(common, &text)?;
    Ok(EXIT_YES)
}

fn extract(file: &Path, common: &Common) -> Result<i32, CliError> {
    let tol = tolerance(common, DEFAULT_TOL)?;
    let snap = load_snapshot(file, common)?;
    let report = decide(&snap, tol, common.branch_bound)?;
    finish_generator(report, tol, common)
}

fn fit(file: &Path, common: &Common) -> Result<i32, CliError> {
    let tol = tolerance(common, DEFAULT_TOL)?;
    let series = SnapshotSeries::from_str(&read_input(file)?, common.convention.map(Into::into))?;
    let report = fit_generator_series(&series, tol, common.branch_bound)?;
    finish_generator(report, tol, common)
}

fn load_instance(path: &Path) -> Result<SatInstance, CliError> {
    Ok(parse_sat(&read_input(path)?).map_err(|e| CliError::new(EXIT_DATA, format!("{}: {e}", path.display())))?)
}

fn reduce(file: &Path, common: &Common) -> Result<i32, CliError> {
    let inst = load_instance(file)?;
    let tol = tolerance(common, default_tolerance(&inst))?;
    let dir = common.out.as_ref().ok_or_else(|| CliError::new(EXIT_USAGE, "reduce requires --out DIR"))?;
    let bundle = build_bundle(&inst, tol)?;
    export_bundle(&bundle, dir, tol, None)?;
    let expected = if sat_brute_force(&inst)?.is_sat() { Verdict::Markovian } else { Verdict::NonMarkovian };
    let red = &bundle.reduction;
    let summary = json!({
        "instance": inst.to_text(),
        "d": red.d,
        "sigma": red.mats.sigma,
        "k": red.mats.k,
        "s_big": red.s.s_big,
        "tolerance": tol,
        "cp_valid": bundle.cp_check.valid,
        "expected_verdict": expected,
        "out": dir,
    });
    if common.json {
        println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    } else {
        println!(
            "wrote bundle to {} (d = {}, σ = {}, k = {}, s_big = {}, tol = {:e}, CP valid: {}, expected: {expected})",
            dir.display(),
            red.d,
            red.mats.sigma,
            red.mats.k,
            red.s.s_big,
            tol,
            bundle.cp_check.valid
        );
    }
    Ok(EXIT_YES)
}

fn verify_one(inst: &SatInstance, common: &Common, kappa: Option<f64>) -> Result<VerificationReport, CliError> {
    let default = match kappa {
        Some(k) if k.is_finite() && k > 0.0 => default_tolerance_with(inst, k),
        Some(k) => return Err(CliError::new(EXIT_USAGE, format!("--kappa must be positive, got {k}"))),
        None => default_tolerance(inst),
    };
    let tol = tolerance(common, default)?;
    Ok(verify_reduction(inst, tol)?)
}

fn verification_line(r: &VerificationReport) -> String {
    let status = if r.agree { "agree" } else { "MISMATCH" };
    let mut s = format!(
        "{status}: {} | d = {} | sat = {} | reduced = {} | snapshot = {} | tol = {:e}",
        r.instance,
        r.hilbert_dim,
        r.sat.is_sat(),
        r.reduced.feasible,
        r.markov.verdict,
        r.tolerance
    );
    for d in &r.disagreements {
        s.push_str(&format!("\n  {d}"));
    }
    s
}

fn verify(file: Option<&Path>, sweep: bool, kappa: Option<f64>, common: &Common) -> Result<i32, CliError> {
    let instances = match (file, sweep) {
        (Some(_), true) => return Err(CliError::new(EXIT_USAGE, "give either an instance file or --corpus, not both")),
        (None, false) => return Err(CliError::new(EXIT_USAGE, "verify-reduction needs an instance file or --corpus")),
        (Some(path), false) => vec![load_instance(path)?],
        (None, true) => {
            let mut c = corpus(5, 4);
            c.push(crate::reduction::canonical_unsat());
            c
        }
    };
    let mut reports = Vec::with_capacity(instances.len());
    for inst in &instances {
        let r = verify_one(inst, common, kappa)?;
        log::info!("{}", verification_line(&r));
        reports.push(r);
    }
    let all_agree = reports.iter().all(|r| r.agree);
    let text = if common.json {
        let doc = json!({
            "schema": VERIFY_SCHEMA,
            "report_schema": REPORT_SCHEMA,
            "all_agree": all_agree,
            "instances": reports,
        });
        serde_json::to_string_pretty(&doc).expect("verification serializes")
    } else {
        let mut s: String = reports.iter().map(|r| verification_line(r) + "\n").collect();
        s.push_str(&format!("{} of {} instances agree\n", reports.iter().filter(|r| r.agree).count(), reports.len()));
        s
    };
    emit(common, &text)?;
    Ok(if all_agree { EXIT_YES } else { EXIT_MISMATCH })
}
