//! C ABI over the simulator.
//!
//! Masses, schedules and oracles cross the boundary as opaque handles that
//! the caller releases with the matching `*_free`. Every fallible call
//! returns a [`CmeStatus`]; on failure the message is kept per thread and
//! read back with [`cme_last_error`]. Strings handed out by this library are
//! owned by the caller and must go back through [`cme_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cme::dyadic::{render_bits, QueryWord};
use cme::mass::MassSource;
use cme::notation::{parse_schedule, MassSpec};
use cme::oracle::{Answer, Oracle, OracleConfig};
use cme::procedures::{bisection, Status};
use cme::schedule::Schedule;
use cme::time::SimTime;
use num_rational::BigRational;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// A mass, schedule, word or number did not parse.
    Parse = 3,
    /// The oracle configuration was rejected.
    Config = 4,
    /// The oracle or a procedure failed while running.
    Oracle = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmeAnswer {
    /// The test mass is below the unknown mass.
    Lesser = 0,
    Greater = 1,
    Timeout = 2,
}

impl From<Answer> for CmeAnswer {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Lesser => CmeAnswer::Lesser,
            Answer::Greater => CmeAnswer::Greater,
            Answer::Timeout => CmeAnswer::Timeout,
        }
    }
}

/// An unknown mass.
pub struct CmeMass(MassSource);

/// A time schedule together with the oracle constant it was parsed against.
pub struct CmeSchedule {
    schedule: Schedule,
    k_const: BigRational,
}

/// An oracle with its query transcript.
pub struct CmeOracle(Oracle);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (CmeStatus, String);

fn fail<E: std::fmt::Display>(status: CmeStatus) -> impl Fn(E) -> Failure {
    move |e| (status, e.to_string())
}

fn run(f: impl FnOnce() -> Result<(), Failure>) -> CmeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CmeStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CmeStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((CmeStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (CmeStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (CmeStatus::NullArgument, format!("{what} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| (CmeStatus::NullArgument, format!("{what} is null")))
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err((CmeStatus::NullArgument, "output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err((CmeStatus::NullArgument, "output pointer is null".into()));
    }
    let c = CString::new(s).map_err(fail(CmeStatus::Oracle))?;
    *out = c.into_raw();
    Ok(())
}

fn parse_constant(s: Option<&str>) -> Result<BigRational, Failure> {
    match s {
        None => Ok(BigRational::from_integer(1.into())),
        Some(s) => s.parse::<SimTime>().map(SimTime::into_rational).map_err(fail(CmeStatus::Parse)),
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn cme_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL if none. Free with
/// [`cme_string_free`].
#[no_mangle]
pub extern "C" fn cme_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

#[no_mangle]
pub extern "C" fn cme_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cme_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a schedule such as `exp:k=2` or `const:64`. `k_const` is the oracle
/// constant as an exact number (`"1"`, `"3/2"`, `"2^4"`); NULL means 1.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cme_schedule_parse(spec: *const c_char, k_const: *const c_char, out: *mut *mut CmeSchedule) -> CmeStatus {
    run(|| {
        let spec = text(spec, "spec")?;
        let k_const = parse_constant(optional_text(k_const, "k_const")?)?;
        let schedule = parse_schedule(spec, &k_const).map_err(fail(CmeStatus::Parse))?;
        give(out, CmeSchedule { schedule, k_const })
    })
}

/// `T(n)` as an exact rational string.
///
/// # Safety
/// `schedule` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cme_schedule_evaluate(schedule: *const CmeSchedule, n: u64, out: *mut *mut c_char) -> CmeStatus {
    run(|| {
        let s = handle(schedule, "schedule")?;
        give_string(out, s.schedule.evaluate(n).to_string())
    })
}

/// # Safety
/// `schedule` must be NULL or a handle from [`cme_schedule_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cme_schedule_free(schedule: *mut CmeSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}

/// Parse a mass such as `rational:1/3` or `sqrt:2`. Masses derived from a
/// schedule (`adversarial:from-schedule`) use `schedule`; NULL means
/// `exp:k=2` with constant 1.
///
/// # Safety
/// `spec` must be NUL-terminated, `schedule` NULL or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cme_mass_parse(spec: *const c_char, schedule: *const CmeSchedule, out: *mut *mut CmeMass) -> CmeStatus {
    run(|| {
        let spec = text(spec, "spec")?;
        let parsed = MassSpec::parse_short(spec).and_then(MassSpec::resolve).map_err(fail(CmeStatus::Parse))?;
        let src = match schedule.as_ref() {
            Some(s) => parsed.build(&s.schedule, &s.k_const),
            None => {
                let k = parse_constant(None)?;
                let default = parse_schedule("exp:k=2", &k).map_err(fail(CmeStatus::Parse))?;
                parsed.build(&default, &k)
            }
        }
        .map_err(fail(CmeStatus::Parse))?;
        give(out, CmeMass(src))
    })
}

/// The first `n` canonical binary digits as a string of `0` and `1`.
///
/// # Safety
/// `mass` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cme_mass_digits(mass: *const CmeMass, n: u64, out: *mut *mut c_char) -> CmeStatus {
    run(|| {
        let m = handle(mass, "mass")?;
        give_string(out, render_bits(&m.0.digits(n)))
    })
}

/// # Safety
/// `mass` must be NULL or a handle from [`cme_mass_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cme_mass_free(mass: *mut CmeMass) {
    if !mass.is_null() {
        drop(Box::from_raw(mass));
    }
}

/// Build an oracle over `mass` from a TOML configuration (keys `K`, `N`,
/// `mode`, `epsilon`, `seed`, ...); NULL gives the error-free defaults. The
/// mass handle stays owned by the caller.
///
/// # Safety
/// `mass` must be live, `config_toml` NULL or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cme_oracle_new(mass: *const CmeMass, config_toml: *const c_char, out: *mut *mut CmeOracle) -> CmeStatus {
    run(|| {
        let m = handle(mass, "mass")?;
        let cfg = match optional_text(config_toml, "config")? {
            Some(t) => OracleConfig::from_toml(t).map_err(fail(CmeStatus::Config))?,
            None => OracleConfig::default(),
        };
        let oracle = Oracle::new(cfg, m.0.clone()).map_err(fail(CmeStatus::Config))?;
        give(out, CmeOracle(oracle))
    })
}

/// One query: set the test mass to the dyadic named by `word` (`"011"` is
/// 3/8) and wait at most `budget`. `elapsed_out` may be NULL.
///
/// # Safety
/// `oracle` must be live, strings NUL-terminated, `answer_out` writable.
#[no_mangle]
pub unsafe extern "C" fn cme_oracle_query(
    oracle: *mut CmeOracle,
    word: *const c_char,
    budget: *const c_char,
    answer_out: *mut CmeAnswer,
    elapsed_out: *mut *mut c_char,
) -> CmeStatus {
    run(|| {
        let o = handle_mut(oracle, "oracle")?;
        let z: QueryWord = text(word, "word")?.parse().map_err(fail(CmeStatus::Parse))?;
        let budget: SimTime = text(budget, "budget")?.parse().map_err(fail(CmeStatus::Parse))?;
        if answer_out.is_null() {
            return Err((CmeStatus::NullArgument, "answer_out is null".into()));
        }
        let r = o.0.query(&z, &budget).map_err(fail(CmeStatus::Oracle))?;
        *answer_out = r.answer.into();
        if !elapsed_out.is_null() {
            give_string(elapsed_out, r.elapsed.to_string())?;
        }
        Ok(())
    })
}

/// Bisection for `n` digits under `schedule`. `digits_out` receives the
/// digits read; `timed_out_at` receives the digit that timed out, or 0 when
/// all `n` were read.
///
/// # Safety
/// Handles must be live and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cme_oracle_bisection(
    oracle: *mut CmeOracle,
    schedule: *const CmeSchedule,
    n: u64,
    digits_out: *mut *mut c_char,
    timed_out_at: *mut u64,
) -> CmeStatus {
    run(|| {
        let o = handle_mut(oracle, "oracle")?;
        let s = handle(schedule, "schedule")?;
        let stop = timed_out_at.as_mut().ok_or_else(|| (CmeStatus::NullArgument, "timed_out_at is null".to_string()))?;
        let report = bisection(&mut o.0, n, &s.schedule).map_err(fail(CmeStatus::Oracle))?;
        give_string(digits_out, report.digit_string())?;
        *stop = match report.status {
            Status::Complete(_) => 0,
            Status::TimedOutAtDigit(j) => j,
        };
        Ok(())
    })
}

/// Total simulated experiment time so far, as an exact rational string.
///
/// # Safety
/// `oracle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cme_oracle_total_time(oracle: *const CmeOracle, out: *mut *mut c_char) -> CmeStatus {
    run(|| give_string(out, handle(oracle, "oracle")?.0.transcript().total_time().to_string()))
}

/// The transcript as JSON lines, one query per line.
///
/// # Safety
/// `oracle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cme_oracle_transcript(oracle: *const CmeOracle, out: *mut *mut c_char) -> CmeStatus {
    run(|| {
        let o = handle(oracle, "oracle")?;
        let mut buf = Vec::new();
        o.0.transcript().write_jsonl(&mut buf).map_err(fail(CmeStatus::Oracle))?;
        give_string(out, String::from_utf8(buf).map_err(fail(CmeStatus::Oracle))?)
    })
}

/// # Safety
/// `oracle` must be NULL or a handle from [`cme_oracle_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cme_oracle_free(oracle: *mut CmeOracle) {
    if !oracle.is_null() {
        drop(Box::from_raw(oracle));
    }
}
