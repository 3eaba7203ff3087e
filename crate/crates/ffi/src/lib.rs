//! C ABI for z2harm: opaque form and state handles, descriptor JSON in,
//! report JSON out, `int32_t` status codes.
//!
//! Every function returns a status code and writes results through out
//! pointers. Handles are freed with the matching `*_free` function; strings
//! returned by the library are freed with `z2h_string_free`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use z2harm::branch::{continue_branch, monodromy, BranchState, Polyline, Sign};
use z2harm::catalogue::{FormError, Z2Form};
use z2harm::descriptor::{Built, Descriptor};
use z2harm::verify::{run_suite, Settings, Suite, VerifyError};

pub const Z2H_OK: i32 = 0;
pub const Z2H_NULL_POINTER: i32 = 1;
pub const Z2H_INVALID_UTF8: i32 = 2;
pub const Z2H_SCHEMA: i32 = 3;
pub const Z2H_NOT_A_FORM: i32 = 4;
pub const Z2H_DIMENSION: i32 = 5;
pub const Z2H_ON_BRANCH_LOCUS: i32 = 6;
pub const Z2H_NO_POTENTIAL: i32 = 7;
pub const Z2H_NUMERIC: i32 = 8;
pub const Z2H_BUFFER_TOO_SMALL: i32 = 9;
pub const Z2H_UNKNOWN_SUITE: i32 = 10;
pub const Z2H_INCOMPATIBLE: i32 = 11;
pub const Z2H_PANIC: i32 = 12;

/// A constructed Z2 harmonic function or 1-form.
pub struct Z2hForm {
    form: Z2Form,
}

/// A point with a chosen square-root branch.
pub struct Z2hState {
    state: BranchState,
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(Z2H_PANIC)
}

fn form_code(e: &FormError) -> i32 {
    match e {
        FormError::OnBranchLocus { .. } => Z2H_ON_BRANCH_LOCUS,
        FormError::DimensionMismatch { .. } => Z2H_DIMENSION,
        FormError::NoPotential => Z2H_NO_POTENTIAL,
        FormError::Branch(z2harm::branch::BranchError::PathHitsBranchLocus { .. }) => Z2H_ON_BRANCH_LOCUS,
        FormError::Branch(z2harm::branch::BranchError::StartMismatch(_)) => Z2H_DIMENSION,
        _ => Z2H_NUMERIC,
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, i32> {
    if s.is_null() {
        return Err(Z2H_NULL_POINTER);
    }
    CStr::from_ptr(s).to_str().map_err(|_| Z2H_INVALID_UTF8)
}

unsafe fn read_slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], i32> {
    if p.is_null() {
        return Err(Z2H_NULL_POINTER);
    }
    Ok(std::slice::from_raw_parts(p, len))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(code) => return code,
        }
    };
}

/// Static description of a status code. Never null; not to be freed.
#[no_mangle]
pub extern "C" fn z2h_status_message(code: i32) -> *const c_char {
    let s: &'static [u8] = match code {
        Z2H_OK => b"ok\0",
        Z2H_NULL_POINTER => b"null pointer argument\0",
        Z2H_INVALID_UTF8 => b"string is not valid UTF-8\0",
        Z2H_SCHEMA => b"descriptor does not match the schema\0",
        Z2H_NOT_A_FORM => b"descriptor does not describe a form\0",
        Z2H_DIMENSION => b"point or path has the wrong dimension\0",
        Z2H_ON_BRANCH_LOCUS => b"point or path meets the branching locus\0",
        Z2H_NO_POTENTIAL => b"form has no single-valued potential\0",
        Z2H_NUMERIC => b"numerical failure\0",
        Z2H_BUFFER_TOO_SMALL => b"output buffer too small\0",
        Z2H_UNKNOWN_SUITE => b"unknown suite name\0",
        Z2H_INCOMPATIBLE => b"suite does not apply to this descriptor\0",
        Z2H_PANIC => b"internal panic\0",
        _ => b"unknown status code\0",
    };
    s.as_ptr() as *const c_char
}

/// Builds a form from descriptor JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn z2h_form_new(json: *const c_char, out: *mut *mut Z2hForm) -> i32 {
    guard(|| {
        if out.is_null() {
            return Z2H_NULL_POINTER;
        }
        *out = ptr::null_mut();
        let text = tri!(read_str(json));
        let d = tri!(Descriptor::from_json(text).map_err(|_| Z2H_SCHEMA));
        let form = match tri!(d.build().map_err(|_| Z2H_SCHEMA)) {
            Built::Form(f) => f,
            _ => return Z2H_NOT_A_FORM,
        };
        *out = Box::into_raw(Box::new(Z2hForm { form }));
        Z2H_OK
    })
}

/// # Safety
/// `form` must come from `z2h_form_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn z2h_form_free(form: *mut Z2hForm) {
    if !form.is_null() {
        drop(Box::from_raw(form));
    }
}

/// Real dimension of the domain.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_form_dim(form: *const Z2hForm, out: *mut usize) -> i32 {
    guard(|| {
        if form.is_null() || out.is_null() {
            return Z2H_NULL_POINTER;
        }
        *out = (*form).form.dim();
        Z2H_OK
    })
}

/// State at `x` on the principal branch times `sign` (`+1` or `-1`).
///
/// # Safety
/// `x` must point to `len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_state_new(
    form: *const Z2hForm,
    x: *const f64,
    len: usize,
    sign: i32,
    out: *mut *mut Z2hState,
) -> i32 {
    guard(|| {
        if form.is_null() || out.is_null() {
            return Z2H_NULL_POINTER;
        }
        *out = ptr::null_mut();
        let x = tri!(read_slice(x, len));
        let Some(sign) = Sign::from_i32(sign) else { return Z2H_NUMERIC };
        let state = tri!((*form).form.state_with_sign(x, sign).map_err(|e| form_code(&e)));
        *out = Box::into_raw(Box::new(Z2hState { state }));
        Z2H_OK
    })
}

/// # Safety
/// `state` must come from `z2h_state_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn z2h_state_free(state: *mut Z2hState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Sign (`+1`/`-1`) of the state against the principal root.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_state_sign(state: *const Z2hState, out: *mut i32) -> i32 {
    guard(|| {
        if state.is_null() || out.is_null() {
            return Z2H_NULL_POINTER;
        }
        *out = (*state).state.sign.as_i32();
        Z2H_OK
    })
}

/// Continues `state` along a polyline of `n_points` points (row-major,
/// `dim` coordinates each) starting at the state's point; the state is
/// replaced by the state at the end (at the start again if `closed`).
///
/// # Safety
/// `points` must hold `n_points * dim` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_state_continue(
    form: *const Z2hForm,
    state: *mut Z2hState,
    points: *const f64,
    n_points: usize,
    closed: bool,
) -> i32 {
    guard(|| {
        if form.is_null() || state.is_null() {
            return Z2H_NULL_POINTER;
        }
        let f = &(*form).form;
        let coords = tri!(read_slice(points, n_points * f.dim()));
        let path = tri!(Polyline::from_flat(f.dim(), coords.to_vec(), closed).map_err(|_| Z2H_DIMENSION));
        let next = tri!(continue_branch(f, &path, &(*state).state).map_err(|e| form_code(&FormError::Branch(e))));
        (*state).state = next;
        Z2H_OK
    })
}

/// The potential at the state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_eval_f(form: *const Z2hForm, state: *const Z2hState, out: *mut f64) -> i32 {
    guard(|| {
        if form.is_null() || state.is_null() || out.is_null() {
            return Z2H_NULL_POINTER;
        }
        *out = tri!((*form).form.eval_f(&(*state).state).map_err(|e| form_code(&e)));
        Z2H_OK
    })
}

/// Components of the 1-form at the state into `out[0..dim]`.
///
/// # Safety
/// `out` must hold `out_len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_eval_omega(
    form: *const Z2hForm,
    state: *const Z2hState,
    out: *mut f64,
    out_len: usize,
) -> i32 {
    guard(|| {
        if form.is_null() || state.is_null() || out.is_null() {
            return Z2H_NULL_POINTER;
        }
        let w = tri!((*form).form.eval_omega(&(*state).state).map_err(|e| form_code(&e)));
        if out_len < w.0.len() {
            return Z2H_BUFFER_TOO_SMALL;
        }
        std::slice::from_raw_parts_mut(out, w.0.len()).copy_from_slice(&w.0);
        Z2H_OK
    })
}

/// Sign picked up around a closed polyline of `n_points` points.
///
/// # Safety
/// `points` must hold `n_points * dim` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_monodromy(
    form: *const Z2hForm,
    points: *const f64,
    n_points: usize,
    out_sign: *mut i32,
) -> i32 {
    guard(|| {
        if form.is_null() || out_sign.is_null() {
            return Z2H_NULL_POINTER;
        }
        let f = &(*form).form;
        let coords = tri!(read_slice(points, n_points * f.dim()));
        let lp = tri!(Polyline::from_flat(f.dim(), coords.to_vec(), true).map_err(|_| Z2H_DIMENSION));
        let s = tri!(monodromy(f, &lp).map_err(|e| form_code(&FormError::Branch(e))));
        *out_sign = s.as_i32();
        Z2H_OK
    })
}

/// Runs a suite and returns the JSON report in `*out_json` (free with
/// `z2h_string_free`) and whether every check passed in `*out_passed`.
///
/// # Safety
/// Strings must be NUL-terminated; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn z2h_verify(
    json: *const c_char,
    suite: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
    out_passed: *mut bool,
) -> i32 {
    guard(|| {
        if out_json.is_null() || out_passed.is_null() {
            return Z2H_NULL_POINTER;
        }
        *out_json = ptr::null_mut();
        let d = tri!(Descriptor::from_json(tri!(read_str(json))).map_err(|_| Z2H_SCHEMA));
        let suite: Suite = tri!(tri!(read_str(suite)).parse().map_err(|_| Z2H_UNKNOWN_SUITE));
        let settings = Settings { seed, ..Settings::default() };
        let report = tri!(run_suite(&d, suite, &settings).map_err(|e| match e {
            VerifyError::Incompatible { .. } => Z2H_INCOMPATIBLE,
            VerifyError::Schema(_) => Z2H_SCHEMA,
            _ => Z2H_NUMERIC,
        }));
        *out_passed = report.passed;
        *out_json = CString::new(report.to_json()).expect("report has no NUL").into_raw();
        Z2H_OK
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn z2h_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
