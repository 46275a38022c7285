//! C ABI over `glw-core`.
//!
//! Handles are opaque heap pointers released by their matching `*_free`
//! function. Strings returned by the library are NUL-terminated UTF-8 owned
//! by the caller and released with [`glw_string_free`]. Every fallible call
//! returns a [`GlwStatus`]; the message of the most recent failure on the
//! calling thread is available from [`glw_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use glw_core::decide::{decide_with_guard, DecideError, DEFAULT_CLOSURE_GUARD};
use glw_core::formula::{parse, Formula};
use glw_core::measures::{build_gamma_structure, validate_dagger, GammaLabeling, MeasureError, DEFAULT_GAMMA_GUARD};
use glw_core::ordinals::Ordinal;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Guard = 4,
    Domain = 5,
    Internal = 6,
}

/// A parsed formula.
pub struct GlwFormula(Formula);

/// A Γ-labeled measure structure.
pub struct GlwGamma(GammaLabeling);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let text = CString::new(bytes).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: GlwStatus, msg: impl ToString) -> GlwStatus {
    set_error(msg.to_string());
    status
}

fn guarded(body: impl FnOnce() -> GlwStatus) -> GlwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(GlwStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, GlwStatus> {
    if text.is_null() {
        return Err(fail(GlwStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(text).to_str().map_err(|e| fail(GlwStatus::InvalidUtf8, e))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> GlwStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            GlwStatus::Ok
        }
        Err(e) => fail(GlwStatus::Internal, e),
    }
}

/// Message of the most recent failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn glw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn glw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `text` into a new formula handle stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_formula_parse(text: *const c_char, out: *mut *mut GlwFormula) -> GlwStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GlwStatus::NullPointer, "null out pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse(text) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(GlwFormula(f)));
                GlwStatus::Ok
            }
            Err(e) => fail(GlwStatus::Parse, e),
        }
    })
}

/// Canonical printed form of a formula.
///
/// # Safety
/// `f` must be a live formula handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_formula_print(f: *const GlwFormula, out: *mut *mut c_char) -> GlwStatus {
    guarded(|| match (f.as_ref(), out.is_null()) {
        (Some(f), false) => write_string(out, f.0.print()),
        _ => fail(GlwStatus::NullPointer, "null argument"),
    })
}

/// Nesting depth of modal operators; 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn glw_formula_modal_depth(f: *const GlwFormula) -> usize {
    f.as_ref().map_or(0, |f| f.0.modal_depth())
}

/// # Safety
/// `f` must be null or a live formula handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn glw_formula_free(f: *mut GlwFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Decides GL-validity. `*out` receives a JSON verdict document: either
/// `{"verdict":"valid"}` or a countermodel with its refuting world.
///
/// # Safety
/// `f` must be a live formula handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_decide_json(f: *const GlwFormula, out: *mut *mut c_char) -> GlwStatus {
    guarded(|| {
        let (Some(f), false) = (f.as_ref(), out.is_null()) else {
            return fail(GlwStatus::NullPointer, "null argument");
        };
        match decide_with_guard(&f.0, DEFAULT_CLOSURE_GUARD) {
            Ok(v) => write_string(out, v.to_json().to_string()),
            Err(e @ DecideError::GuardExceeded { .. }) => fail(GlwStatus::Guard, e),
            Err(e) => fail(GlwStatus::Domain, e),
        }
    })
}

/// Builds the Γ-labeled structure for `K_n` truncated at branching `b`
/// with `m` measures per block pair.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_gamma_build(n: u32, b: u32, m: u32, out: *mut *mut GlwGamma) -> GlwStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GlwStatus::NullPointer, "null out pointer");
        }
        match build_gamma_structure(n, b, m, DEFAULT_GAMMA_GUARD) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(GlwGamma(g)));
                GlwStatus::Ok
            }
            Err(e @ MeasureError::GuardExceeded { .. }) => fail(GlwStatus::Guard, e),
            Err(e) => fail(GlwStatus::Domain, e),
        }
    })
}

/// Checks the four labeling conditions. `*condition` is 0 when all hold,
/// otherwise the number of the first failing condition.
///
/// # Safety
/// `g` must be a live handle and `condition` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_gamma_validate(g: *const GlwGamma, condition: *mut u32) -> GlwStatus {
    guarded(|| {
        let (Some(g), false) = (g.as_ref(), condition.is_null()) else {
            return fail(GlwStatus::NullPointer, "null argument");
        };
        *condition = match validate_dagger(&g.0) {
            Ok(()) => 0,
            Err(v) => {
                set_error(v.to_string());
                u32::from(v.condition())
            }
        };
        GlwStatus::Ok
    })
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn glw_gamma_point_count(g: *const GlwGamma) -> usize {
    g.as_ref().map_or(0, |g| g.0.structure.len())
}

/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_gamma_mitchell_rank(g: *const GlwGamma, point: usize, out: *mut usize) -> GlwStatus {
    guarded(|| {
        let (Some(g), false) = (g.as_ref(), out.is_null()) else {
            return fail(GlwStatus::NullPointer, "null argument");
        };
        if point >= g.0.structure.len() {
            return fail(GlwStatus::Domain, format!("point {point} does not exist"));
        }
        match g.0.structure.mitchell_rank(point) {
            Ok(r) => {
                *out = r;
                GlwStatus::Ok
            }
            Err(e) => fail(GlwStatus::Domain, e),
        }
    })
}

/// The structure file document of a labeling.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_gamma_to_json(g: *const GlwGamma, out: *mut *mut c_char) -> GlwStatus {
    guarded(|| match (g.as_ref(), out.is_null()) {
        (Some(g), false) => match serde_json::to_string(&g.0.to_doc()) {
            Ok(s) => write_string(out, s),
            Err(e) => fail(GlwStatus::Internal, e),
        },
        _ => fail(GlwStatus::NullPointer, "null argument"),
    })
}

/// # Safety
/// `g` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn glw_gamma_free(g: *mut GlwGamma) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Normalizes an ordinal literal such as `w+w^2*2+3` to Cantor normal form.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn glw_ordinal_normalize(text: *const c_char, out: *mut *mut c_char) -> GlwStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GlwStatus::NullPointer, "null out pointer");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match text.parse::<Ordinal>() {
            Ok(a) => write_string(out, a.to_string()),
            Err(e) => fail(GlwStatus::Parse, e),
        }
    })
}
