//! C ABI over the structuring engine.
//!
//! Deals and runs cross the boundary as opaque handles. Every fallible
//! function returns a [`PealStatus`]; on failure the message is available
//! from [`peal_last_error`] on the same thread. Strings handed out by the
//! library are NUL-terminated UTF-8 and must be released with
//! [`peal_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use peal::deal_service::deal_file::ParsedDeal;
use peal::deal_service::report::render_reports;
use peal::deal_service::runs::ENGINE_VERSION;
use peal::deal_service::{execute, parse_deal_str, RunOutput, RunOverrides};
use peal::PealError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PealStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The deal file failed to parse or validate.
    InvalidDeal = 3,
    /// The run could not be completed.
    RunFailed = 4,
    /// The requested report does not exist.
    NotFound = 5,
    /// The library panicked; the handle involved should be discarded.
    Internal = 6,
}

/// A parsed and validated deal file.
pub struct PealDeal {
    parsed: ParsedDeal,
}

/// A finished run with its rendered reports.
pub struct PealRun {
    output: RunOutput,
    reports: BTreeMap<String, Vec<u8>>,
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn describe(e: &PealError) -> String {
    match e.violations() {
        Some(v) if !v.is_empty() => {
            let lines: Vec<String> = v.iter().map(ToString::to_string).collect();
            format!("{e}\n{}", lines.join("\n"))
        }
        _ => e.to_string(),
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PealStatus, String)>) -> PealStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PealStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            PealStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, (PealStatus, String)> {
    if s.is_null() {
        return Err((PealStatus::NullArgument, "null string argument".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|e| (PealStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, (PealStatus, String)> {
    p.as_ref().ok_or((PealStatus::NullArgument, "null handle".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, (PealStatus, String)> {
    p.as_mut().ok_or((PealStatus::NullArgument, "null output pointer".into()))
}

fn owned_string(bytes: Vec<u8>) -> Result<*mut c_char, (PealStatus, String)> {
    CString::new(bytes).map(CString::into_raw).map_err(|_| (PealStatus::Internal, "report contains a NUL byte".into()))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn peal_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Engine version as a static string.
#[no_mangle]
pub extern "C" fn peal_version() -> *const c_char {
    static VERSION: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    VERSION.get_or_init(|| CString::new(ENGINE_VERSION).expect("no NUL in version")).as_ptr()
}

/// Release a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn peal_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Deals
// ---------------------------------------------------------------------------

/// Parse and validate a deal file given as JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn peal_deal_parse(json: *const c_char, out: *mut *mut PealDeal) -> PealStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let text = str_arg(json)?;
        let parsed = parse_deal_str(text).map_err(|e| (PealStatus::InvalidDeal, describe(&e)))?;
        *out = Box::into_raw(Box::new(PealDeal { parsed }));
        Ok(())
    })
}

/// Release a deal. Null is ignored.
///
/// # Safety
/// `deal` must come from [`peal_deal_parse`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn peal_deal_free(deal: *mut PealDeal) {
    if !deal.is_null() {
        drop(Box::from_raw(deal));
    }
}

/// Number of exposures in the deal.
///
/// # Safety
/// `deal` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn peal_deal_exposure_count(deal: *const PealDeal, out: *mut usize) -> PealStatus {
    guard(|| {
        *out_arg(out)? = handle(deal)?.parsed.deal.exposure_count();
        Ok(())
    })
}

/// Frequency-rule verdicts of the deal as a JSON array.
///
/// # Safety
/// `deal` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn peal_deal_compliance_json(deal: *const PealDeal, out: *mut *mut c_char) -> PealStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let bytes = serde_json::to_vec(&handle(deal)?.parsed.compliance).map_err(|e| (PealStatus::Internal, e.to_string()))?;
        *out = owned_string(bytes)?;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

/// Run the full pipeline in memory.
///
/// `scenarios == 0`, `seed < 0` or `alpha <= 0` keep the deal file's value.
///
/// # Safety
/// `deal` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn peal_run(deal: *const PealDeal, scenarios: usize, seed: i64, alpha: f64, out: *mut *mut PealRun) -> PealStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let parsed = &handle(deal)?.parsed;
        let cfg = RunOverrides {
            scenarios: (scenarios > 0).then_some(scenarios),
            seed: (seed >= 0).then_some(seed as u64),
            alpha: (alpha > 0.0).then_some(alpha),
        }
        .resolve(parsed);
        let output = execute(parsed, &cfg, None).map_err(|e| (PealStatus::RunFailed, describe(&e)))?;
        let reports = render_reports(parsed, &output, false).map_err(|e| (PealStatus::RunFailed, describe(&e)))?;
        *out = Box::into_raw(Box::new(PealRun { output, reports }));
        Ok(())
    })
}

/// Release a run. Null is ignored.
///
/// # Safety
/// `run` must come from [`peal_run`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn peal_run_free(run: *mut PealRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// The run id (16 hex digits).
///
/// # Safety
/// `run` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn peal_run_id(run: *const PealRun, out: *mut *mut c_char) -> PealStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        *out = owned_string(handle(run)?.output.run_id.clone().into_bytes())?;
        Ok(())
    })
}

/// Whether every compliance verdict of the run passed.
///
/// # Safety
/// `run` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn peal_run_compliant(run: *const PealRun, out: *mut bool) -> PealStatus {
    guard(|| {
        *out_arg(out)? = handle(run)?.output.compliance.pass;
        Ok(())
    })
}

/// One report by file name, e.g. `features.json` or `tranching.csv`.
///
/// # Safety
/// `run` must be a live handle, `name` a NUL-terminated string and `out`
/// a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn peal_run_report(run: *const PealRun, name: *const c_char, out: *mut *mut c_char) -> PealStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let run = handle(run)?;
        let name = str_arg(name)?;
        let bytes = run.reports.get(name).ok_or_else(|| {
            let known: Vec<&str> = run.reports.keys().map(String::as_str).collect();
            (PealStatus::NotFound, format!("no report `{name}`; available: {}", known.join(", ")))
        })?;
        *out = owned_string(bytes.clone())?;
        Ok(())
    })
}
