//! C ABI over the simulator.
//!
//! Configs and runs are opaque handles created and destroyed through this
//! API. Every fallible function returns a [`SurfsimStatus`]; on failure a
//! message is available from [`surfsim_last_error`] on the same thread until
//! the next failing call. Strings returned as `char *` are owned by the
//! caller and must be released with [`surfsim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use surfsim::config::{parse_and_validate, ScenarioConfig};
use surfsim::engine::run_dissemination;
use surfsim::output::{run_to_dir, RunRecord};
use surfsim::{SimError, SimTrace};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Parse = 4,
    Io = 5,
    Simulation = 6,
    Panic = 7,
}

/// A validated scenario configuration.
pub struct SurfsimConfig {
    inner: ScenarioConfig,
}

/// The result of one run: metrics plus the trace log.
pub struct SurfsimRun {
    record: RunRecord,
    log: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &SimError) -> SurfsimStatus {
    match e {
        SimError::Config { .. } => SurfsimStatus::Config,
        SimError::Parse { .. } => SurfsimStatus::Parse,
        SimError::Io { .. } => SurfsimStatus::Io,
        _ => SurfsimStatus::Simulation,
    }
}

struct Failure(SurfsimStatus, String);

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SurfsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SurfsimStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SurfsimStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SurfsimStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SurfsimStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SurfsimStatus::NullArgument, format!("`{name}` is null")))
}

fn out_arg<T>(p: *mut *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure(SurfsimStatus::NullArgument, format!("`{name}` is null")));
    }
    Ok(())
}

fn owned_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn surfsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn surfsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn surfsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a JSON config.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn surfsim_config_parse(json: *const c_char, out: *mut *mut SurfsimConfig) -> SurfsimStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(json, "json")?;
        let inner = parse_and_validate(text)?;
        *out = Box::into_raw(Box::new(SurfsimConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `config` must come from [`surfsim_config_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_config_free(config: *mut SurfsimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// The config with every default filled in, as pretty JSON. Null on a null
/// handle.
///
/// # Safety
/// `config` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_config_to_json(config: *const SurfsimConfig) -> *mut c_char {
    config.as_ref().map_or(ptr::null_mut(), |c| owned_string(&c.inner.to_json()))
}

/// SHA-256 of the canonical config JSON, hex encoded.
///
/// # Safety
/// `config` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_config_hash(config: *const SurfsimConfig) -> *mut c_char {
    config.as_ref().map_or(ptr::null_mut(), |c| owned_string(&c.inner.hash()))
}

/// Runs one simulation.
///
/// # Safety
/// `config` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run(config: *const SurfsimConfig, seed: u64, out: *mut *mut SurfsimRun) -> SurfsimStatus {
    guard(|| {
        out_arg(out, "out")?;
        let cfg = ref_arg(config, "config")?;
        let trace = run_dissemination(&cfg.inner, seed)?;
        let record = RunRecord::from_trace(0, &trace)?;
        *out = Box::into_raw(Box::new(SurfsimRun {
            record,
            log: trace.to_log(),
        }));
        Ok(())
    })
}

/// Rebuilds a run from a trace log produced by [`surfsim_run_trace_log`] or
/// the CLI.
///
/// # Safety
/// `log` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn surfsim_replay(log: *const c_char, out: *mut *mut SurfsimRun) -> SurfsimStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(log, "log")?;
        let trace = SimTrace::from_log(text)?;
        let record = RunRecord::from_trace(0, &trace)?;
        *out = Box::into_raw(Box::new(SurfsimRun {
            record,
            log: text.to_string(),
        }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`surfsim_run`] / [`surfsim_replay`] or be null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run_free(run: *mut SurfsimRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Final receivers over `N - 1`; NaN on a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run_final_fraction(run: *const SurfsimRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.record.report.final_fraction())
}

/// Mean per-node delivery ratio; NaN on a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run_mean_delivery(run: *const SurfsimRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.record.report.mean_delivery())
}

/// Number of slots simulated; 0 on a null handle.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run_slots(run: *const SurfsimRun) -> usize {
    run.as_ref().map_or(0, |r| r.record.slots)
}

/// Copies up to `len` accumulative-receiver entries (hop 0 first) into
/// `buf` and returns the full curve length. Pass a null `buf` to query the
/// length.
///
/// # Safety
/// `run` must be a live handle or null; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run_accumulative(run: *const SurfsimRun, buf: *mut f64, len: usize) -> usize {
    let Some(r) = run.as_ref() else { return 0 };
    let curve = &r.record.report.accumulative_receivers;
    if !buf.is_null() {
        let n = len.min(curve.len());
        ptr::copy_nonoverlapping(curve.as_ptr(), buf, n);
    }
    curve.len()
}

/// The run's trace log as an owned string.
///
/// # Safety
/// `run` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run_trace_log(run: *const SurfsimRun) -> *mut c_char {
    run.as_ref().map_or(ptr::null_mut(), |r| owned_string(&r.log))
}

/// Runs and writes the CLI's `run` output (CSVs, manifest, optionally
/// trace.log and topology.txt) into `dir`.
///
/// # Safety
/// `config` must be a live handle; `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn surfsim_run_to_dir(
    config: *const SurfsimConfig,
    seed: u64,
    dir: *const c_char,
    emit_trace: bool,
) -> SurfsimStatus {
    guard(|| {
        let cfg = ref_arg(config, "config")?;
        let dir = str_arg(dir, "dir")?;
        run_to_dir(&cfg.inner, seed, Path::new(dir), emit_trace)?;
        Ok(())
    })
}
