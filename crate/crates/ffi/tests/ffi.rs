//! The C ABI driven from Rust, plus a C program linked against the static
//! library.

use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cme_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { cme_string_free(s) };
    out
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn bisection_through_handles() {
    unsafe {
        let mut schedule = ptr::null_mut();
        assert_eq!(cme_schedule_parse(c("exp:k=2").as_ptr(), ptr::null(), &mut schedule), CmeStatus::Ok);
        let mut t = ptr::null_mut();
        assert_eq!(cme_schedule_evaluate(schedule, 3, &mut t), CmeStatus::Ok);
        assert_eq!(take(t), "64");

        let mut mass = ptr::null_mut();
        assert_eq!(cme_mass_parse(c("rational:1/3").as_ptr(), schedule, &mut mass), CmeStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(cme_mass_digits(mass, 6, &mut d), CmeStatus::Ok);
        assert_eq!(take(d), "010101");

        let mut oracle = ptr::null_mut();
        assert_eq!(cme_oracle_new(mass, ptr::null(), &mut oracle), CmeStatus::Ok);
        let mut digits = ptr::null_mut();
        let mut stop = 7u64;
        assert_eq!(cme_oracle_bisection(oracle, schedule, 8, &mut digits, &mut stop), CmeStatus::Ok);
        assert_eq!(take(digits), "01010101");
        assert_eq!(stop, 0);

        let mut total = ptr::null_mut();
        assert_eq!(cme_oracle_total_time(oracle, &mut total), CmeStatus::Ok);
        assert!(!take(total).is_empty());
        let mut jsonl = ptr::null_mut();
        assert_eq!(cme_oracle_transcript(oracle, &mut jsonl), CmeStatus::Ok);
        assert_eq!(take(jsonl).lines().count(), 8);

        cme_oracle_free(oracle);
        cme_mass_free(mass);
        cme_schedule_free(schedule);
    }
}

#[test]
fn single_queries_and_timeouts() {
    unsafe {
        let mut mass = ptr::null_mut();
        assert_eq!(cme_mass_parse(c("dyadic:1/2").as_ptr(), ptr::null(), &mut mass), CmeStatus::Ok);
        let mut oracle = ptr::null_mut();
        let cfg = c("K = 2\nseed = 4\n");
        assert_eq!(cme_oracle_new(mass, cfg.as_ptr(), &mut oracle), CmeStatus::Ok);

        let mut answer = CmeAnswer::Timeout;
        let mut elapsed = ptr::null_mut();
        // 1/4 against 1/2: K / (1/4) = 8
        assert_eq!(cme_oracle_query(oracle, c("001").as_ptr(), c("100").as_ptr(), &mut answer, &mut elapsed), CmeStatus::Ok);
        assert_eq!(answer, CmeAnswer::Lesser);
        assert_eq!(take(elapsed), "8");
        assert_eq!(cme_oracle_query(oracle, c("01").as_ptr(), c("2^20").as_ptr(), &mut answer, ptr::null_mut()), CmeStatus::Ok);
        assert_eq!(answer, CmeAnswer::Timeout);
        assert_eq!(cme_oracle_query(oracle, c("011").as_ptr(), c("100").as_ptr(), &mut answer, ptr::null_mut()), CmeStatus::Ok);
        assert_eq!(answer, CmeAnswer::Greater);

        cme_oracle_free(oracle);
        cme_mass_free(mass);
    }
}

#[test]
fn errors_are_reported_per_call() {
    unsafe {
        cme_clear_error();
        assert!(cme_last_error().is_null());

        let mut mass = ptr::null_mut();
        assert_eq!(cme_mass_parse(c("rational:1/x").as_ptr(), ptr::null(), &mut mass), CmeStatus::Parse);
        assert!(mass.is_null());
        assert!(take(cme_last_error()).contains("1:12"));

        assert_eq!(cme_mass_parse(ptr::null(), ptr::null(), &mut mass), CmeStatus::NullArgument);
        assert_eq!(cme_schedule_parse(c("exp:k=2").as_ptr(), ptr::null(), ptr::null_mut()), CmeStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(cme_mass_parse(bad.as_ptr().cast(), ptr::null(), &mut mass), CmeStatus::InvalidUtf8);

        assert_eq!(cme_mass_parse(c("rational:1/3").as_ptr(), ptr::null(), &mut mass), CmeStatus::Ok);
        let mut oracle = ptr::null_mut();
        assert_eq!(cme_oracle_new(mass, c("K = -1").as_ptr(), &mut oracle), CmeStatus::Config);
        assert!(!take(cme_last_error()).is_empty());
        assert_eq!(cme_oracle_new(mass, c("colour = 3").as_ptr(), &mut oracle), CmeStatus::Config);

        assert_eq!(cme_oracle_new(mass, ptr::null(), &mut oracle), CmeStatus::Ok);
        let mut answer = CmeAnswer::Lesser;
        assert_eq!(cme_oracle_query(oracle, c("10").as_ptr(), c("1").as_ptr(), &mut answer, ptr::null_mut()), CmeStatus::Parse);
        assert_eq!(cme_oracle_query(oracle, c("01").as_ptr(), c("soon").as_ptr(), &mut answer, ptr::null_mut()), CmeStatus::Parse);

        cme_oracle_free(oracle);
        cme_mass_free(mass);
        // freeing NULL is a no-op
        cme_mass_free(ptr::null_mut());
        cme_string_free(ptr::null_mut());
        assert_eq!(CStr::from_ptr(cme_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cme.h")).unwrap();
    for name in [
        "cme_version",
        "cme_last_error",
        "cme_string_free",
        "cme_schedule_parse",
        "cme_mass_parse",
        "cme_oracle_new",
        "cme_oracle_query",
        "cme_oracle_bisection",
        "cme_oracle_free",
        "typedef struct CmeOracle CmeOracle",
        "CME_STATUS_PARSE = 3",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Build directory holding `libcme_ffi.a`: the parent of `deps/`.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = artifact_dir().join("libcme_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no {} or no C compiler", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let root = env!("CARGO_MANIFEST_DIR");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg(format!("-I{root}/include"))
        .arg(format!("{root}/tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "01010101 0");
}
