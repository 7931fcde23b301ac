use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use fsi_decay_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { fsi_string_free(s) };
    out
}

fn last_error() -> String {
    let p = fsi_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(values: &[&str]) -> (FsiStatus, *mut FsiWeights) {
    let owned: Vec<CString> = values.iter().map(|v| CString::new(*v).unwrap()).collect();
    let ptrs: Vec<*const c_char> = owned.iter().map(|c| c.as_ptr()).collect();
    let mut w = ptr::null_mut();
    let st = unsafe { fsi_weights_parse(ptrs.as_ptr(), ptrs.len(), &mut w) };
    (st, w)
}

#[test]
fn exponents_through_handles() {
    let (st, w) = parse(&["5", "5/3", "20/3", "17/3", "0", "25/3"]);
    assert_eq!(st, FsiStatus::Ok);
    let (mut a, mut k, mut e) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { fsi_exponents(w, &mut a, &mut k, &mut e) }, FsiStatus::Ok);
    assert_eq!((take(a), take(k), take(e)), ("5/3".into(), "11/3".into(), "2/3".into()));

    let mut feasible = false;
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { fsi_verify_weights(w, &mut feasible, &mut report) }, FsiStatus::Ok);
    assert!(feasible);
    assert!(take(report).contains("\"min_analytic_margin\": \"2/3\""));
    unsafe { fsi_weights_free(w) };
}

#[test]
fn zero_weights_are_infeasible() {
    let (st, w) = parse(&["0"; 6]);
    assert_eq!(st, FsiStatus::Ok);
    let mut feasible = true;
    assert_eq!(unsafe { fsi_verify_weights(w, &mut feasible, ptr::null_mut()) }, FsiStatus::Ok);
    assert!(!feasible);
    unsafe { fsi_weights_free(w) };
}

#[test]
fn error_codes() {
    let (st, w) = parse(&["1", "2"]);
    assert_eq!(st, FsiStatus::Parse);
    assert!(w.is_null());
    assert!(last_error().contains("6"));

    let (st, _) = parse(&["1", "2", "3", "4", "5", "oops"]);
    assert_eq!(st, FsiStatus::Parse);

    assert_eq!(unsafe { fsi_weights_parse(ptr::null(), 6, &mut ptr::null_mut()) }, FsiStatus::NullPointer);
    let mut feasible = false;
    assert_eq!(unsafe { fsi_verify_weights(ptr::null(), &mut feasible, ptr::null_mut()) }, FsiStatus::NullPointer);

    let bad = [0xffu8, 0];
    let mut w = ptr::null_mut();
    let ptrs = [bad.as_ptr() as *const c_char; 6];
    assert_eq!(unsafe { fsi_weights_parse(ptrs.as_ptr(), 6, &mut w) }, FsiStatus::InvalidUtf8);

    // A success clears the message.
    assert_eq!(unsafe { fsi_weights_reference(&mut w) }, FsiStatus::Ok);
    assert!(fsi_last_error().is_null());
    unsafe { fsi_weights_free(w) };
}

#[test]
fn lemma_lambda() {
    let c = |s: &str| CString::new(s).unwrap();
    let (one, a, b, k) = (c("1"), c("5/3"), c("5/2"), c("11/3"));
    let mut exp = 0u32;
    let st = unsafe { fsi_lemma_find_lambda(one.as_ptr(), one.as_ptr(), a.as_ptr(), b.as_ptr(), k.as_ptr(), &mut exp) };
    assert_eq!(st, FsiStatus::Ok);
    assert_eq!(exp, 17);

    let tiny = c("1.000000001");
    let st = unsafe { fsi_lemma_find_lambda(one.as_ptr(), one.as_ptr(), tiny.as_ptr(), b.as_ptr(), k.as_ptr(), &mut exp) };
    assert_eq!(st, FsiStatus::NoSolution);

    let half = c("1/2");
    let st = unsafe { fsi_lemma_find_lambda(one.as_ptr(), one.as_ptr(), half.as_ptr(), b.as_ptr(), k.as_ptr(), &mut exp) };
    assert_eq!(st, FsiStatus::InvalidArgument);
}

const SMALL: &str = r#"{"n_f": 8, "n_s": 8, "dt": 0.01, "t_end": 1, "alpha": "1/2", "lambda": "1/8",
    "weights": {"c_id": "5", "c_dt": "20/3", "c_dtt": "25/3"}, "profile": "solid-bump"}"#;

#[test]
fn simulation_handle() {
    let cfg = CString::new(SMALL).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fsi_sim_new(cfg.as_ptr(), &mut s) }, FsiStatus::Ok);
    let mut dim = 0usize;
    assert_eq!(unsafe { fsi_sim_dim(s, &mut dim) }, FsiStatus::Ok);
    assert_eq!(dim, 8 + 2 * 8);

    let (mut t, mut e0, mut d0) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { fsi_sim_observe(s, &mut t, &mut e0, &mut d0) }, FsiStatus::Ok);
    assert_eq!(t, 0.0);
    let mut prev = e0;
    for _ in 0..20 {
        assert_eq!(unsafe { fsi_sim_step(s, 5) }, FsiStatus::Ok);
        let mut e = 0.0;
        assert_eq!(unsafe { fsi_sim_observe(s, ptr::null_mut(), &mut e, ptr::null_mut()) }, FsiStatus::Ok);
        assert!(e <= prev);
        prev = e;
    }
    assert_eq!(unsafe { fsi_sim_observe(s, &mut t, ptr::null_mut(), ptr::null_mut()) }, FsiStatus::Ok);
    assert!((t - 1.0).abs() < 1e-12);

    let mut buf = vec![0.0; dim];
    assert_eq!(unsafe { fsi_sim_state(s, buf.as_mut_ptr(), dim) }, FsiStatus::Ok);
    assert!(buf.iter().any(|v| *v != 0.0));
    assert_eq!(unsafe { fsi_sim_state(s, buf.as_mut_ptr(), dim - 1) }, FsiStatus::InvalidArgument);
    unsafe { fsi_sim_free(s) };

    let broken = CString::new("{\"n_f\": 8}").unwrap();
    assert_eq!(unsafe { fsi_sim_new(broken.as_ptr(), &mut s) }, FsiStatus::InvalidArgument);
}

#[test]
fn simulation_report_matches_library() {
    let cfg = CString::new(SMALL).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fsi_sim_run_report(cfg.as_ptr(), &mut out) }, FsiStatus::Ok);
    let text = take(out);
    let config = fsi_decay::sim::SimConfig::from_json(SMALL).unwrap();
    let trace = fsi_decay::sim::run(&config).unwrap();
    let summary = fsi_decay::sim::summarize(&config, &trace).unwrap();
    assert_eq!(text, fsi_decay::report::simulate_report(&config, &summary).0.render());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(fsi_version()) }.to_str().unwrap();
    assert!(v.starts_with("0.1.0\nledger-pin "));
}

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header_dir().join("fsi_decay.h")).unwrap();
    for name in [
        "typedef struct FsiWeights FsiWeights;",
        "typedef struct FsiSimulation FsiSimulation;",
        "FSI_STATUS_OK = 0",
        "FSI_STATUS_PANIC = 9",
        "fsi_weights_parse(",
        "fsi_exponents(",
        "fsi_verify_weights(",
        "fsi_lemma_find_lambda(",
        "fsi_sim_new(",
        "fsi_sim_step(",
        "fsi_sim_observe(",
        "fsi_sim_state(",
        "fsi_sim_run_report(",
        "fsi_string_free(",
        "fsi_last_error(",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// Compile and run a C program against the header and the static library.
/// Skipped when no C compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    // target/<profile>/deps/<this test> → target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libfsi_decay_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let bin = out_dir.join("fsi_smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-I")
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.1.0"));
}
