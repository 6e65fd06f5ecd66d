//! C ABI over `genfinder`.
//!
//! Every fallible call returns a [`GfStatus`]; on failure a message is kept per
//! thread and read with [`gf_last_error`]. Objects are opaque handles released by
//! their `_free` function; strings returned through `char **` are released with
//! [`gf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use genfinder::branch::{decide_markovian, DecideError};
use genfinder::channel::{ChannelError, Snapshot, StochasticMatrix, TransferMatrix};
use genfinder::embed::decide_embeddable;
use genfinder::matkernel::{ComplexMatrix, C64};
use genfinder::reduction::{default_tolerance, parse_sat, sat_brute_force, verify_reduction, ReductionError, SatInstance};
use genfinder::{GeneratorReport, Verdict};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    InvalidSnapshot = 4,
    TooLarge = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GfVerdict {
    Markovian = 0,
    NonMarkovian = 1,
    Indeterminate = 2,
}

impl From<Verdict> for GfVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Markovian => GfVerdict::Markovian,
            Verdict::NonMarkovian => GfVerdict::NonMarkovian,
            Verdict::Indeterminate => GfVerdict::Indeterminate,
        }
    }
}

/// A quantum channel or a stochastic matrix.
pub struct GfSnapshot(Snapshot);

/// Result of a decision call.
pub struct GfReport(GeneratorReport);

/// A monotone 1-in-3SAT instance.
pub struct GfSatInstance(SatInstance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

struct Failure(GfStatus, String);

impl From<ChannelError> for Failure {
    fn from(e: ChannelError) -> Self {
        let status = match e {
            ChannelError::Matrix(_) => GfStatus::Numerical,
            ChannelError::Parse(_) | ChannelError::UnknownConvention(_) | ChannelError::KindMismatch { .. } => GfStatus::Parse,
            _ => GfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Self {
        let status = match e {
            DecideError::InvalidSnapshot { .. } => GfStatus::InvalidSnapshot,
            DecideError::NegativeBound => GfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        let status = match e {
            ReductionError::Parse { .. } | ReductionError::InvalidClause { .. } => GfStatus::Parse,
            ReductionError::TooLarge { .. } => GfStatus::TooLarge,
            ReductionError::Matrix(_) => GfStatus::Numerical,
            _ => GfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            GfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(GfStatus::Parse, format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure(GfStatus::InvalidArgument, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, or NULL. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn gf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a snapshot JSON document (quantum or classical).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_snapshot_from_json(json: *const c_char, out: *mut *mut GfSnapshot) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(json, "json")?;
        write_out(out, GfSnapshot(Snapshot::from_str(text, None)?));
        Ok(())
    })
}

/// Builds a quantum snapshot from a row-major `d²×d²` transfer matrix given as
/// separate real and imaginary parts (`im` may be NULL for a real matrix).
///
/// # Safety
/// `re` (and `im` if non-NULL) must point to `d⁴` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_snapshot_from_transfer(
    d: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut GfSnapshot,
) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if re.is_null() {
            return Err(null("re"));
        }
        let n = d.checked_mul(d).filter(|&n| d > 0 && n.checked_mul(n).is_some()).ok_or_else(|| {
            Failure(GfStatus::InvalidArgument, format!("invalid Hilbert dimension {d}"))
        })?;
        let re = std::slice::from_raw_parts(re, n * n);
        let data: Vec<C64> = if im.is_null() {
            re.iter().map(|&x| C64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, n * n);
            re.iter().zip(im).map(|(&x, &y)| C64::new(x, y)).collect()
        };
        let m = ComplexMatrix::from_row_major(n, data).map_err(|e| Failure(GfStatus::Numerical, e.to_string()))?;
        write_out(out, GfSnapshot(Snapshot::Quantum(TransferMatrix::new(m)?)));
        Ok(())
    })
}

/// Builds a classical snapshot from a row-major `n×n` column-stochastic matrix.
///
/// # Safety
/// `data` must point to `n²` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_snapshot_from_stochastic(n: usize, data: *const f64, out: *mut *mut GfSnapshot) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n.checked_mul(n).filter(|_| n > 0).ok_or_else(|| Failure(GfStatus::InvalidArgument, format!("invalid dimension {n}")))?;
        let v = std::slice::from_raw_parts(data, len).to_vec();
        write_out(out, GfSnapshot(Snapshot::Classical(StochasticMatrix::new(n, v)?)));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_snapshot_free(s: *mut GfSnapshot) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Decides Markovianity (quantum) or embeddability (classical) over branches
/// `m ∈ [−branch_bound, branch_bound]^pairs`.
///
/// # Safety
/// `snapshot` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_decide(snapshot: *const GfSnapshot, tol: f64, branch_bound: i64, out: *mut *mut GfReport) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = snapshot.as_ref().ok_or_else(|| null("snapshot"))?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Failure(GfStatus::InvalidArgument, format!("tolerance must be positive, got {tol}")));
        }
        let report = match &s.0 {
            Snapshot::Quantum(t) => decide_markovian(t, tol, branch_bound)?,
            Snapshot::Classical(t) => decide_embeddable(t, tol, branch_bound)?,
        };
        write_out(out, GfReport(report));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_report_verdict(report: *const GfReport, out: *mut GfVerdict) -> GfStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.0.verdict.into();
        Ok(())
    })
}

/// Side length of the witness generator (0 if there is none).
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_report_witness_dim(report: *const GfReport, out: *mut usize) -> GfStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.0.witness_l.as_ref().map_or(0, ComplexMatrix::dim);
        Ok(())
    })
}

/// Copies the row-major witness into `re` and `im` (each of length `len`, which
/// must be at least the squared witness dimension).
///
/// # Safety
/// `re` and `im` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gf_report_witness(report: *const GfReport, re: *mut f64, im: *mut f64, len: usize) -> GfStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let w = r.0.witness_l.as_ref().ok_or_else(|| Failure(GfStatus::InvalidArgument, "report has no witness".into()))?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let n = w.dim() * w.dim();
        if len < n {
            return Err(Failure(GfStatus::BufferTooSmall, format!("buffer holds {len} entries, need {n}")));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, n), std::slice::from_raw_parts_mut(im, n));
        for (k, z) in w.as_slice().iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// The report as a "report-v1" JSON document; free with [`gf_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_report_to_json(report: *const GfReport, out: *mut *mut c_char) -> GfStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(r.0.to_json_string())?;
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_report_free(r: *mut GfReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Parses an instance in the `p 1in3 V C` text format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_sat_parse(text: *const c_char, out: *mut *mut GfSatInstance) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        write_out(out, GfSatInstance(parse_sat(read_str(text, "text")?)?));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gf_sat_free(s: *mut GfSatInstance) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Exhaustive satisfiability; `*satisfiable` is set to 1 or 0.
///
/// # Safety
/// `inst` must be a live handle; `satisfiable` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_sat_brute_force(inst: *const GfSatInstance, satisfiable: *mut i32) -> GfStatus {
    guard(|| {
        let i = inst.as_ref().ok_or_else(|| null("instance"))?;
        let out = satisfiable.as_mut().ok_or_else(|| null("satisfiable"))?;
        *out = i32::from(sat_brute_force(&i.0)?.is_sat());
        Ok(())
    })
}

/// Runs the three-way reduction check. `tol <= 0` selects the default tolerance.
/// `*agree` is set to 1 or 0; if `json_out` is non-NULL it receives the full
/// verification report (free with [`gf_string_free`]).
///
/// # Safety
/// `inst` must be a live handle; `agree` must be writable; `json_out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn gf_verify_reduction(
    inst: *const GfSatInstance,
    tol: f64,
    agree: *mut i32,
    json_out: *mut *mut c_char,
) -> GfStatus {
    guard(|| {
        let i = inst.as_ref().ok_or_else(|| null("instance"))?;
        let agree = agree.as_mut().ok_or_else(|| null("agree"))?;
        if tol.is_nan() {
            return Err(Failure(GfStatus::InvalidArgument, "tolerance is NaN".into()));
        }
        let tol = if tol > 0.0 { tol } else { default_tolerance(&i.0) };
        let report = verify_reduction(&i.0, tol)?;
        *agree = i32::from(report.agree);
        if !json_out.is_null() {
            *json_out = into_c_string(serde_json::to_string(&report).expect("report serializes"))?;
        }
        Ok(())
    })
}
