//! C ABI for the edgesim simulator.
//!
//! Scenario and report objects cross the boundary as opaque handles; every
//! fallible call returns an [`EdgesimStatus`] and leaves a human-readable
//! message retrievable with [`edgesim_last_error`] (thread-local, valid
//! until the next failing call on the same thread). Strings returned through
//! out-parameters are owned by the library and must be released with
//! [`edgesim_string_free`].
//!
//! The generated header lands in `include/edgesim.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, c_uint, CStr, CString};
use std::ptr;

use edgesim::engine::{self, SimulationReport};
use edgesim::metrics::compute_tcr;
use edgesim::scenario::{parse_scenario, Scenario};

/// Result codes mirrored into the header. `Ok` is zero; nonzero values carry
/// the failure category.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq)]
pub enum EdgesimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ConfigError = 4,
    RuntimeError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &edgesim::Error) -> EdgesimStatus {
    match err {
        edgesim::Error::Parse { .. } => EdgesimStatus::ParseError,
        edgesim::Error::Configuration { .. } | edgesim::Error::Domain(_) => EdgesimStatus::ConfigError,
        edgesim::Error::Io(_) => EdgesimStatus::RuntimeError,
    }
}

/// Opaque scenario handle.
pub struct EdgesimScenario {
    inner: Scenario,
}

/// Opaque simulation report handle.
pub struct EdgesimReport {
    inner: SimulationReport,
}

/// Message describing the most recent failure on this thread. Never null;
/// empty when nothing failed yet. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn edgesim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn edgesim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates the default scenario.
///
/// # Safety
/// `out` must point to writable scenario-handle storage.
#[no_mangle]
pub unsafe extern "C" fn edgesim_scenario_default(out: *mut *mut EdgesimScenario) -> EdgesimStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return EdgesimStatus::NullArgument;
    }
    let scenario = Scenario::default();
    *out = Box::into_raw(Box::new(EdgesimScenario { inner: scenario }));
    EdgesimStatus::Ok
}

/// Parses and validates a JSON scenario document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edgesim_scenario_from_json(
    json: *const c_char,
    out: *mut *mut EdgesimScenario,
) -> EdgesimStatus {
    if json.is_null() || out.is_null() {
        set_error("null argument");
        return EdgesimStatus::NullArgument;
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        set_error("scenario JSON is not valid UTF-8");
        return EdgesimStatus::InvalidUtf8;
    };
    match parse_scenario(text) {
        Ok(scenario) => {
            *out = Box::into_raw(Box::new(EdgesimScenario { inner: scenario }));
            EdgesimStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            *out = ptr::null_mut();
            status_of(&e)
        }
    }
}

/// Releases a scenario handle. Null is a no-op.
///
/// # Safety
/// `scenario` must be a handle from this library, released once.
#[no_mangle]
pub unsafe extern "C" fn edgesim_scenario_free(scenario: *mut EdgesimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs one policy cell on the scenario.
///
/// `tsp` is one of `fcfs|edf|edd|efdf|cr|covert|era|pqm`; `rsp` is one of
/// `shortest-execution|random|latest-feasible|sars`. `pora_on` (nonzero)
/// reserves standby units and escalates to them (sars only). `alpha` weighs
/// the time margin in the suitability score.
///
/// # Safety
/// `scenario`, `tsp`, `rsp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn edgesim_run(
    scenario: *const EdgesimScenario,
    tsp: *const c_char,
    rsp: *const c_char,
    pora_on: c_int,
    alpha: c_double,
    seed: u64,
    out: *mut *mut EdgesimReport,
) -> EdgesimStatus {
    if scenario.is_null() || tsp.is_null() || rsp.is_null() || out.is_null() {
        set_error("null argument");
        return EdgesimStatus::NullArgument;
    }
    let (Ok(tsp), Ok(rsp)) = (CStr::from_ptr(tsp).to_str(), CStr::from_ptr(rsp).to_str()) else {
        set_error("policy name is not valid UTF-8");
        return EdgesimStatus::InvalidUtf8;
    };
    let scenario = &(*scenario).inner;
    let run = || -> edgesim::Result<SimulationReport> {
        let config = scenario.engine_config(seed, tsp.parse()?, rsp.parse()?, pora_on != 0, alpha)?;
        engine::run(config)
    };
    match run() {
        Ok(report) => {
            *out = Box::into_raw(Box::new(EdgesimReport { inner: report }));
            EdgesimStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            *out = ptr::null_mut();
            status_of(&e)
        }
    }
}

/// Releases a report handle. Null is a no-op.
///
/// # Safety
/// `report` must be a handle from this library, released once.
#[no_mangle]
pub unsafe extern "C" fn edgesim_report_free(report: *mut EdgesimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Task completion rate of the run, in percent.
///
/// # Safety
/// `report` must be a valid report handle.
#[no_mangle]
pub unsafe extern "C" fn edgesim_report_tcr(report: *const EdgesimReport) -> c_double {
    if report.is_null() {
        return -1.0;
    }
    compute_tcr(&(*report).inner).tcr
}

/// Number of tasks processed within their deadlines.
///
/// # Safety
/// `report` must be a valid report handle.
#[no_mangle]
pub unsafe extern "C" fn edgesim_report_processed(report: *const EdgesimReport) -> c_uint {
    if report.is_null() {
        return 0;
    }
    compute_tcr(&(*report).inner).n_pt
}

/// Total number of tasks in the run.
///
/// # Safety
/// `report` must be a valid report handle.
#[no_mangle]
pub unsafe extern "C" fn edgesim_report_total(report: *const EdgesimReport) -> c_uint {
    if report.is_null() {
        return 0;
    }
    (*report).inner.tasks.len() as c_uint
}

fn export_string(value: String, out: *mut *mut c_char) -> EdgesimStatus {
    match CString::new(value) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            EdgesimStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL");
            EdgesimStatus::RuntimeError
        }
    }
}

/// Full run metrics (completion rates, per-group rates, delay means, invalid
/// counts) as a JSON document. Free with `edgesim_string_free`.
///
/// # Safety
/// `report` must be a valid report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edgesim_report_metrics_json(
    report: *const EdgesimReport,
    out: *mut *mut c_char,
) -> EdgesimStatus {
    if report.is_null() || out.is_null() {
        set_error("null argument");
        return EdgesimStatus::NullArgument;
    }
    let metrics = compute_tcr(&(*report).inner);
    match serde_json::to_string(&metrics) {
        Ok(json) => export_string(json, out),
        Err(e) => {
            set_error(&e.to_string());
            EdgesimStatus::RuntimeError
        }
    }
}

/// The run's event trace as newline-delimited `time,kind,task,pu` records.
/// Free with `edgesim_string_free`.
///
/// # Safety
/// `report` must be a valid report handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn edgesim_report_trace(
    report: *const EdgesimReport,
    out: *mut *mut c_char,
) -> EdgesimStatus {
    if report.is_null() || out.is_null() {
        set_error("null argument");
        return EdgesimStatus::NullArgument;
    }
    export_string(engine::trace_to_string(&(*report).inner.events), out)
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must come from this library, released once.
#[no_mangle]
pub unsafe extern "C" fn edgesim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
