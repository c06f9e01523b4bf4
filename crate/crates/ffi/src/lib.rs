//! C interface to the stppu toolkit.
//!
//! Problems are opaque handles. Results come back as JSON strings owned by
//! the library; release them with `stppu_string_free`. On failure the
//! message is available from `stppu_last_error` until the next call on the
//! same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stppu::cli::{check, CheckProperty};
use stppu::control::{best_dc, odc_execute, Stppu, Witness};
use stppu::execute::NatureModel;
use stppu::io;
use stppu::preference::{solve_stpp, SoftProblem};
use stppu::stp;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StppuStatus {
    Ok = 0,
    /// The call worked but the property does not hold.
    NotControllable = 1,
    InvalidInput = 2,
    Inconclusive = 3,
    /// An internal panic was caught.
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StppuProperty {
    Osc = 0,
    Owc = 1,
    Odc = 2,
}

/// A parsed problem.
pub struct StppuProblem {
    inner: Stppu,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Outcome = Result<StppuStatus, (StppuStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> StppuStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            StppuStatus::Panic
        }
    }
}

fn invalid(msg: impl Into<String>) -> (StppuStatus, String) {
    (StppuStatus::InvalidInput, msg.into())
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, (StppuStatus, String)> {
    if s.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` must be null or a handle from `stppu_problem_parse`.
unsafe fn problem<'a>(p: *const StppuProblem) -> Result<&'a Stppu, (StppuStatus, String)> {
    p.as_ref().map(|p| &p.inner).ok_or_else(|| invalid("problem handle is null"))
}

/// # Safety
/// `out` must be null or writable.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (StppuStatus, String)> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    let c = CString::new(s).map_err(|_| invalid("output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

/// Parses problem text into a new handle stored in `*out`.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn stppu_problem_parse(src: *const c_char, out: *mut *mut StppuProblem) -> StppuStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        *out = ptr::null_mut();
        let p = io::parse_problem(text(src, "problem text")?).map_err(|e| invalid(e.to_string()))?;
        *out = Box::into_raw(Box::new(StppuProblem { inner: p }));
        Ok(StppuStatus::Ok)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle from `stppu_problem_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stppu_problem_free(p: *mut StppuProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of time-points in the problem, or -1 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stppu_problem_len(p: *const StppuProblem) -> i64 {
    p.as_ref().map_or(-1, |p| p.inner.len() as i64)
}

/// Checks a property and stores the report JSON in `*out_json`.
/// Returns `NotControllable` when the optimal property does not hold.
///
/// # Safety
/// `p` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn stppu_check(
    p: *const StppuProblem,
    property: StppuProperty,
    out_json: *mut *mut c_char,
) -> StppuStatus {
    guard(|| {
        let p = problem(p)?;
        let prop = match property {
            StppuProperty::Osc => CheckProperty::Osc,
            StppuProperty::Owc => CheckProperty::Owc,
            StppuProperty::Odc => CheckProperty::Odc,
        };
        let r = check(p, prop);
        put_string(out_json, io::to_json(&io::report_json(&r, p.names())))?;
        Ok(if r.verdict.is_success() {
            StppuStatus::Ok
        } else {
            StppuStatus::NotControllable
        })
    })
}

/// Best level with uncertainty ignored, as JSON.
///
/// # Safety
/// `p` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn stppu_solve(p: *const StppuProblem, out_json: *mut *mut c_char) -> StppuStatus {
    guard(|| {
        let p = problem(p)?;
        let inconsistent = || (StppuStatus::NotControllable, "problem is inconsistent".to_string());
        let (opt, minimal) = solve_stpp(p).map_err(|_| inconsistent())?;
        let earliest = stp::earliest_solution(&minimal).map_err(|_| inconsistent())?;
        put_string(out_json, io::to_json(&io::solution_json(opt, &minimal, &earliest, p.grid())))?;
        Ok(StppuStatus::Ok)
    })
}

/// Executes the dynamic strategy against a nature script
/// (`observe <name> <duration>` lines) and stores the outcome JSON.
///
/// # Safety
/// `p` must be a live handle, `nature` a NUL-terminated string and
/// `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn stppu_execute_scripted(
    p: *const StppuProblem,
    nature: *const c_char,
    out_json: *mut *mut c_char,
) -> StppuStatus {
    guard(|| {
        let p = problem(p)?;
        let w = io::parse_nature(text(nature, "nature script")?, p).map_err(|e| invalid(e.to_string()))?;
        let Witness::Dynamic(r) = best_dc(p).witness else {
            return Err((StppuStatus::NotControllable, "not controllable".to_string()));
        };
        let e = odc_execute(&r, &NatureModel::Scripted(w)).map_err(|e| invalid(e.to_string()))?;
        put_string(out_json, io::to_json(&io::execution_json(&e, p.names(), p.grid())))?;
        Ok(StppuStatus::Ok)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stppu_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn stppu_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
