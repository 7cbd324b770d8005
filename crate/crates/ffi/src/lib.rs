//! C interface to the ahmass toolkit.
//!
//! Every fallible call returns an [`AhmassStatus`]; on failure the message is available from
//! [`ahmass_last_error`] on the same thread. Objects are opaque handles released by their
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ahmass::cli_pipeline::{emit_report, parse_config, run_pipeline, PipelineReport};
use ahmass::green_kernel::{flux, green0, green_prime, KernelTable, DEFAULT_I_MAX};
use ahmass::radial_solver::deformation_gap;
use ahmass::Error;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AhmassStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Config = 3,
    Hypothesis = 4,
    Convergence = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> AhmassStatus {
    let code = match &e {
        Error::InvalidInput(_) => AhmassStatus::InvalidInput,
        Error::Config(_) => AhmassStatus::Config,
        Error::Hypothesis(_) => AhmassStatus::Hypothesis,
        Error::Convergence(_) => AhmassStatus::Convergence,
        Error::Numerical(_) => AhmassStatus::Numerical,
        Error::Io(_) => AhmassStatus::Io,
    };
    set_error(e.to_string());
    code
}

fn guard<F: FnOnce() -> Result<(), AhmassStatus>>(f: F) -> AhmassStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AhmassStatus::Ok,
        Ok(Err(code)) => code,
        Err(_) => {
            set_error("internal panic".into());
            AhmassStatus::Panic
        }
    }
}

fn null() -> AhmassStatus {
    set_error("null pointer argument".into());
    AhmassStatus::NullPointer
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, AhmassStatus> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8".into());
        AhmassStatus::InvalidInput
    })
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn ahmass_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ahmass_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Radial fundamental solution of −Δ + n on hyperbolic space.
pub struct AhmassKernel {
    table: KernelTable,
}

/// Build the kernel for dimension `n` with series tolerance `tol`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ahmass_kernel_new(n: usize, tol: f64, out: *mut *mut AhmassKernel) -> AhmassStatus {
    if out.is_null() {
        return null();
    }
    *out = ptr::null_mut();
    guard(|| {
        let table = KernelTable::new(n, tol, DEFAULT_I_MAX).map_err(fail)?;
        *out = Box::into_raw(Box::new(AhmassKernel { table }));
        Ok(())
    })
}

/// # Safety
/// `k` must be NULL or a handle from [`ahmass_kernel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ahmass_kernel_free(k: *mut AhmassKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Normalisation constant κ of the kernel.
///
/// # Safety
/// `k` must be a live kernel handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_kernel_kappa(k: *const AhmassKernel, out: *mut f64) -> AhmassStatus {
    if k.is_null() || out.is_null() {
        return null();
    }
    *out = (*k).table.kappa();
    AhmassStatus::Ok
}

unsafe fn kernel_eval(
    k: *const AhmassKernel,
    s: f64,
    out: *mut f64,
    f: fn(&KernelTable, f64) -> ahmass::Result<f64>,
) -> AhmassStatus {
    if k.is_null() || out.is_null() {
        return null();
    }
    guard(|| {
        *out = f(&(*k).table, s).map_err(fail)?;
        Ok(())
    })
}

/// G₀(s).
///
/// # Safety
/// `k` must be a live kernel handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_green0(k: *const AhmassKernel, s: f64, out: *mut f64) -> AhmassStatus {
    kernel_eval(k, s, out, green0)
}

/// G₀′(s).
///
/// # Safety
/// `k` must be a live kernel handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_green_prime(k: *const AhmassKernel, s: f64, out: *mut f64) -> AhmassStatus {
    kernel_eval(k, s, out, green_prime)
}

/// Flux of G₀ through the geodesic sphere of radius s.
///
/// # Safety
/// `k` must be a live kernel handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_green_flux(k: *const AhmassKernel, s: f64, out: *mut f64) -> AhmassStatus {
    kernel_eval(k, s, out, flux)
}

/// Margin of the curvature inequality behind the conformal deformation by (1 + v).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_deformation_gap(v: f64, n: usize, out: *mut f64) -> AhmassStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        *out = deformation_gap(v, n).map_err(fail)?;
        Ok(())
    })
}

/// Result of a pipeline run.
pub struct AhmassReport {
    report: PipelineReport,
}

/// One row of the per-ν table.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AhmassNuRecord {
    pub nu: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub f_norm: f64,
    pub a_nu: f64,
    pub h_scalar: f64,
    pub h_tilde_scalar: f64,
    pub mass_lhs: f64,
    pub mass_rhs: f64,
    pub margin: f64,
    pub positive: bool,
    pub ok: bool,
}

/// Run the pipeline on a TOML configuration.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_pipeline_run(config_toml: *const c_char, out: *mut *mut AhmassReport) -> AhmassStatus {
    if out.is_null() {
        return null();
    }
    *out = ptr::null_mut();
    guard(|| {
        let text = c_str(config_toml)?;
        let cfg = parse_config(text).map_err(fail)?;
        let report = run_pipeline(&cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(AhmassReport { report }));
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a handle from [`ahmass_pipeline_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ahmass_report_free(r: *mut AhmassReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of per-ν records, 0 for NULL.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ahmass_report_len(r: *const AhmassReport) -> usize {
    if r.is_null() {
        0
    } else {
        (*r).report.records.len()
    }
}

/// Whether every record passed.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ahmass_report_all_ok(r: *const AhmassReport) -> bool {
    !r.is_null() && (*r).report.all_ok
}

/// Copy record `i` (descending ν order).
///
/// # Safety
/// `r` must be a live report handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_report_record(r: *const AhmassReport, i: usize, out: *mut AhmassNuRecord) -> AhmassStatus {
    if r.is_null() || out.is_null() {
        return null();
    }
    let report = &(*r).report;
    let Some(x) = report.records.get(i) else {
        set_error(format!("record index {i} out of range"));
        return AhmassStatus::InvalidInput;
    };
    *out = AhmassNuRecord {
        nu: x.nu,
        h_minus: x.h_minus,
        h_plus: x.h_plus,
        f_norm: x.f_norm,
        a_nu: x.a_nu,
        h_scalar: x.h_scalar,
        h_tilde_scalar: x.h_tilde_scalar,
        mass_lhs: x.mass_lhs,
        mass_rhs: x.mass_rhs,
        margin: x.margin,
        positive: x.positive,
        ok: x.ok,
    };
    AhmassStatus::Ok
}

/// Bound |A_ν| ≤ C ν^{1/(n+1)}: writes C and the fitted log–log exponent.
///
/// # Safety
/// `r` must be a live report handle; `c` and `exponent` writable.
#[no_mangle]
pub unsafe extern "C" fn ahmass_report_bound(r: *const AhmassReport, c: *mut f64, exponent: *mut f64) -> AhmassStatus {
    if r.is_null() || c.is_null() || exponent.is_null() {
        return null();
    }
    match &(*r).report.a_bound {
        Some(b) => {
            *c = b.c;
            *exponent = b.exponent;
            AhmassStatus::Ok
        }
        None => {
            set_error("fewer than 3 records with nonzero A".into());
            AhmassStatus::InvalidInput
        }
    }
}

/// Write the CSV and JSON reports into `dir`.
///
/// # Safety
/// `r` must be a live report handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn ahmass_report_write(r: *const AhmassReport, dir: *const c_char) -> AhmassStatus {
    if r.is_null() {
        return null();
    }
    guard(|| {
        let dir = c_str(dir)?;
        emit_report(&(*r).report, Path::new(dir)).map_err(fail)?;
        Ok(())
    })
}
