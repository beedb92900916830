use std::ffi::{CStr, CString};
use std::ptr;

use surfsim_ffi::*;

const CONFIG: &str = r#"{"N": 12, "Ch": 3, "strategy": "surf", "radius": 0.5}"#;

fn last_error() -> String {
    let p = surfsim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(json: &str) -> (SurfsimStatus, *mut SurfsimConfig) {
    let text = CString::new(json).unwrap();
    let mut cfg = ptr::null_mut();
    let status = unsafe { surfsim_config_parse(text.as_ptr(), &mut cfg) };
    (status, cfg)
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { surfsim_string_free(p) };
    s
}

#[test]
fn run_matches_library() {
    let (status, cfg) = parse(CONFIG);
    assert_eq!(status, SurfsimStatus::Ok);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { surfsim_run(cfg, 4, &mut run) }, SurfsimStatus::Ok);

    let lib_cfg = surfsim::config::parse_and_validate(CONFIG).unwrap();
    let trace = surfsim::run_dissemination(&lib_cfg, 4).unwrap();
    let report = surfsim::MetricsReport::from_trace(&trace).unwrap();

    unsafe {
        assert_eq!(surfsim_run_final_fraction(run), report.final_fraction());
        assert_eq!(surfsim_run_mean_delivery(run), report.mean_delivery());
        assert_eq!(surfsim_run_slots(run), trace.slots.len());
        let len = surfsim_run_accumulative(run, ptr::null_mut(), 0);
        let mut buf = vec![0.0; len];
        assert_eq!(surfsim_run_accumulative(run, buf.as_mut_ptr(), len), len);
        assert_eq!(buf, report.accumulative_receivers);
        assert_eq!(take_string(surfsim_run_trace_log(run)), trace.to_log());
        assert_eq!(take_string(surfsim_config_hash(cfg)), lib_cfg.hash());
        surfsim_run_free(run);
        surfsim_config_free(cfg);
    }
}

#[test]
fn replay_reproduces_metrics() {
    let (_, cfg) = parse(CONFIG);
    let mut run = ptr::null_mut();
    unsafe { surfsim_run(cfg, 9, &mut run) };
    let log = CString::new(take_string(unsafe { surfsim_run_trace_log(run) })).unwrap();
    let mut replayed = ptr::null_mut();
    assert_eq!(unsafe { surfsim_replay(log.as_ptr(), &mut replayed) }, SurfsimStatus::Ok);
    unsafe {
        assert_eq!(surfsim_run_final_fraction(run), surfsim_run_final_fraction(replayed));
        surfsim_run_free(replayed);
        surfsim_run_free(run);
        surfsim_config_free(cfg);
    }
}

#[test]
fn config_error_names_key() {
    let (status, cfg) = parse(r#"{"N": 2, "Ch": 0, "strategy": "rd"}"#);
    assert_eq!(status, SurfsimStatus::Config);
    assert!(cfg.is_null());
    assert!(last_error().contains("channel_count"));
}

#[test]
fn bad_trace_is_parse_error() {
    let log = CString::new("not a trace").unwrap();
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { surfsim_replay(log.as_ptr(), &mut run) }, SurfsimStatus::Parse);
    assert!(run.is_null());
}

#[test]
fn null_arguments_are_rejected() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { surfsim_config_parse(ptr::null(), &mut cfg) }, SurfsimStatus::NullArgument);
    assert!(last_error().contains("json"));
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { surfsim_run(ptr::null(), 0, &mut run) }, SurfsimStatus::NullArgument);
    unsafe {
        assert!(surfsim_run_final_fraction(ptr::null()).is_nan());
        assert_eq!(surfsim_run_accumulative(ptr::null(), ptr::null_mut(), 0), 0);
        surfsim_run_free(ptr::null_mut());
        surfsim_config_free(ptr::null_mut());
        surfsim_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    let bytes = [0xffu8, 0xfe, 0];
    let mut cfg = ptr::null_mut();
    let status = unsafe { surfsim_config_parse(bytes.as_ptr().cast(), &mut cfg) };
    assert_eq!(status, SurfsimStatus::InvalidUtf8);
}

#[test]
fn run_to_dir_writes_files() {
    let (_, cfg) = parse(CONFIG);
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { surfsim_run_to_dir(cfg, 1, path.as_ptr(), true) }, SurfsimStatus::Ok);
    for f in ["delivery_ratio.csv", "accumulative_receivers.csv", "runs.csv", "manifest.json", "trace.log"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    unsafe { surfsim_config_free(cfg) };
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(surfsim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
