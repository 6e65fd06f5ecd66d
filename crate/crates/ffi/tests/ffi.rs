use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use genfinder::branch::sample_lindblad;
use genfinder::matkernel::mat_exp;
use genfinder_ffi::*;

fn last_error() -> String {
    let p = gf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn stochastic(data: &[f64]) -> *mut GfSnapshot {
    let n = (data.len() as f64).sqrt() as usize;
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gf_snapshot_from_stochastic(n, data.as_ptr(), &mut s) }, GfStatus::Ok);
    s
}

fn decide(s: *const GfSnapshot, tol: f64) -> (GfStatus, *mut GfReport) {
    let mut r = ptr::null_mut();
    let st = unsafe { gf_decide(s, tol, 2, &mut r) };
    (st, r)
}

fn verdict(r: *const GfReport) -> GfVerdict {
    let mut v = GfVerdict::Indeterminate;
    assert_eq!(unsafe { gf_report_verdict(r, &mut v) }, GfStatus::Ok);
    v
}

#[test]
fn classical_examples() {
    let yes = stochastic(&[0.9, 0.2, 0.1, 0.8]);
    let (st, r) = decide(yes, 1e-8);
    assert_eq!(st, GfStatus::Ok);
    assert_eq!(verdict(r), GfVerdict::Markovian);
    let mut n = 0;
    assert_eq!(unsafe { gf_report_witness_dim(r, &mut n) }, GfStatus::Ok);
    assert_eq!(n, 2);
    let (mut re, mut im) = (vec![0.0; 4], vec![0.0; 4]);
    assert_eq!(unsafe { gf_report_witness(r, re.as_mut_ptr(), im.as_mut_ptr(), 4) }, GfStatus::Ok);
    assert!((re[0] + re[2]).abs() < 1e-12 && im.iter().all(|x| *x == 0.0));
    assert_eq!(unsafe { gf_report_witness(r, re.as_mut_ptr(), im.as_mut_ptr(), 3) }, GfStatus::BufferTooSmall);
    unsafe {
        gf_report_free(r);
        gf_snapshot_free(yes);
    }

    let no = stochastic(&[0.1, 0.9, 0.9, 0.1]);
    let (st, r) = decide(no, 1e-8);
    assert_eq!(st, GfStatus::Ok);
    assert_eq!(verdict(r), GfVerdict::NonMarkovian);
    unsafe {
        gf_report_free(r);
        gf_snapshot_free(no);
    }
}

#[test]
fn quantum_round_trip_through_transfer_matrix() {
    let e = mat_exp(&sample_lindblad(2, 4)).unwrap();
    let re: Vec<f64> = e.as_slice().iter().map(|z| z.re).collect();
    let im: Vec<f64> = e.as_slice().iter().map(|z| z.im).collect();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gf_snapshot_from_transfer(2, re.as_ptr(), im.as_ptr(), &mut s) }, GfStatus::Ok);
    let (st, r) = decide(s, 1e-8);
    assert_eq!(st, GfStatus::Ok);
    assert_eq!(verdict(r), GfVerdict::Markovian);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { gf_report_to_json(r, &mut json) }, GfStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    let report: genfinder::GeneratorReport = serde_json::from_str(&text).unwrap();
    assert!(report.closure_residual.unwrap() <= 1e-7);
    unsafe {
        gf_string_free(json);
        gf_report_free(r);
        gf_snapshot_free(s);
    }
}

#[test]
fn snapshot_json_parsing() {
    let doc = CString::new(r#"{"kind":"classical","dim":2,"matrix":[[0.9,0.2],[0.1,0.8]]}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gf_snapshot_from_json(doc.as_ptr(), &mut s) }, GfStatus::Ok);
    unsafe { gf_snapshot_free(s) };
    let bad = CString::new("{").unwrap();
    assert_eq!(unsafe { gf_snapshot_from_json(bad.as_ptr(), &mut s) }, GfStatus::Parse);
    assert!(last_error().contains("parse"));
}

#[test]
fn error_codes() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gf_snapshot_from_json(ptr::null(), &mut s) }, GfStatus::NullPointer);
    assert!(last_error().contains("json"));
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { gf_decide(ptr::null(), 1e-8, 2, &mut r) }, GfStatus::NullPointer);
    let bad = stochastic(&[0.9, 0.2, 0.2, 0.8]);
    assert_eq!(decide(bad, 1e-8).0, GfStatus::InvalidSnapshot);
    let ok = stochastic(&[0.9, 0.2, 0.1, 0.8]);
    assert_eq!(decide(ok, -1.0).0, GfStatus::InvalidArgument);
    assert_eq!(unsafe { gf_decide(ok, 1e-8, -1, &mut r) }, GfStatus::InvalidArgument);
    assert_eq!(unsafe { gf_snapshot_from_transfer(0, [1.0].as_ptr(), ptr::null(), &mut s) }, GfStatus::InvalidArgument);
    unsafe {
        gf_snapshot_free(bad);
        gf_snapshot_free(ok);
        // Freeing NULL is a no-op.
        gf_snapshot_free(ptr::null_mut());
        gf_report_free(ptr::null_mut());
        gf_sat_free(ptr::null_mut());
        gf_string_free(ptr::null_mut());
    }
}

#[test]
fn sat_and_reduction() {
    let text = CString::new("p 1in3 3 1\n1 2 3 0\n").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { gf_sat_parse(text.as_ptr(), &mut inst) }, GfStatus::Ok);
    let mut sat = -1;
    assert_eq!(unsafe { gf_sat_brute_force(inst, &mut sat) }, GfStatus::Ok);
    assert_eq!(sat, 1);
    let (mut agree, mut json) = (-1, ptr::null_mut());
    assert_eq!(unsafe { gf_verify_reduction(inst, 0.0, &mut agree, &mut json) }, GfStatus::Ok);
    assert_eq!(agree, 1);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(v["markov"]["verdict"], "markovian");
    unsafe {
        gf_string_free(json);
        gf_sat_free(inst);
    }
    let bad = CString::new("p 1in3 3 1\n1 2 9 0\n").unwrap();
    assert_eq!(unsafe { gf_sat_parse(bad.as_ptr(), &mut inst) }, GfStatus::Parse);
    assert!(last_error().contains("clause"));
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(gf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // tests/ffi-<hash> lives in <target>/<profile>/deps.
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/genfinder.h")).unwrap();
    for sym in [
        "gf_last_error", "gf_version", "gf_string_free", "gf_snapshot_from_json", "gf_snapshot_from_transfer",
        "gf_snapshot_from_stochastic", "gf_snapshot_free", "gf_decide", "gf_report_verdict", "gf_report_witness_dim",
        "gf_report_witness", "gf_report_to_json", "gf_report_free", "gf_sat_parse", "gf_sat_free",
        "gf_sat_brute_force", "gf_verify_reduction", "typedef struct GfSnapshot GfSnapshot", "GF_STATUS_OK",
    ] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libgenfinder_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = std::process::Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
