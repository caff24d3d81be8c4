//! C ABI over `shannop`.
//!
//! Fields and reports are opaque heap handles owned by the caller and released
//! with the matching `*_free`. Every fallible call returns a [`ShannopStatus`];
//! the message of the last failure on the calling thread is available from
//! [`shannop_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use shannop::bands::{build_partition, BaseScheme};
use shannop::precond::{implicit_laplacian_precond, rate_implicit_laplacian, rate_kantorovich};
use shannop::solver::{helmholtz_decompose, richardson_solve, SolveConfig, SolveReport};
use shannop::spectral::{GridSpec, RealField};
use shannop::symbols::SymbolExpr;
use shannop::{swf1, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShannopStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    Io = 4,
    Diverged = 5,
    Refused = 6,
    Unsupported = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShannopScheme {
    Tensorial = 0,
    Mra = 1,
}

/// A real field on a periodic grid.
pub struct ShannopField {
    inner: RealField,
}

/// Convergence record of one solve.
pub struct ShannopReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ShannopStatus {
    match e {
        Error::Diverged { .. } => ShannopStatus::Diverged,
        Error::Refused { .. } => ShannopStatus::Refused,
        Error::Format(_) => ShannopStatus::Format,
        Error::Io(_) => ShannopStatus::Io,
        Error::UnsupportedScheme(_) | Error::NotInvertibleOnBand { .. } => ShannopStatus::Unsupported,
        Error::Consistency(_) => ShannopStatus::Internal,
        _ => ShannopStatus::InvalidArgument,
    }
}

fn fail(status: ShannopStatus, msg: &str) -> ShannopStatus {
    set_error(msg);
    status
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guarded(f: impl FnOnce() -> Result<(), ShannopStatus>) -> ShannopStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShannopStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(ShannopStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> ShannopStatus {
    fail(status_of(&e), &e.to_string())
}

fn null() -> ShannopStatus {
    fail(ShannopStatus::NullPointer, "null pointer argument")
}

unsafe fn field_ref<'a>(f: *const ShannopField) -> Result<&'a RealField, ShannopStatus> {
    // SAFETY: the caller passes a handle from this library or null.
    unsafe { f.as_ref() }.map(|f| &f.inner).ok_or_else(null)
}

unsafe fn path_arg(p: *const c_char) -> Result<String, ShannopStatus> {
    if p.is_null() {
        return Err(null());
    }
    // SAFETY: non-null and nul-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map(str::to_owned)
        .map_err(|_| fail(ShannopStatus::InvalidArgument, "path is not UTF-8"))
}

fn boxed_field(f: RealField) -> *mut ShannopField {
    Box::into_raw(Box::new(ShannopField { inner: f }))
}

fn boxed_report(r: SolveReport) -> *mut ShannopReport {
    Box::into_raw(Box::new(ShannopReport { inner: r }))
}

fn config(tol: f64, max_iter: usize) -> SolveConfig {
    SolveConfig {
        tol,
        max_iter,
        ..SolveConfig::default()
    }
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn shannop_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies `components * prod(sizes)` samples into a new field.
///
/// # Safety
/// `sizes` must point to `dim` values and `values` to the sample count;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shannop_field_new(
    dim: usize,
    sizes: *const usize,
    components: usize,
    values: *const f64,
    out: *mut *mut ShannopField,
) -> ShannopStatus {
    guarded(|| {
        if sizes.is_null() || values.is_null() || out.is_null() {
            return Err(null());
        }
        // SAFETY: caller guarantees `dim` readable sizes.
        let sizes = unsafe { std::slice::from_raw_parts(sizes, dim) };
        let grid = GridSpec::new(sizes).map_err(lib_err)?;
        let n = components
            .checked_mul(grid.len())
            .ok_or_else(|| fail(ShannopStatus::InvalidArgument, "sample count overflows"))?;
        // SAFETY: caller guarantees `n` readable samples.
        let v = unsafe { std::slice::from_raw_parts(values, n) }.to_vec();
        let f = RealField::new(grid, components, v).map_err(lib_err)?;
        // SAFETY: `out` checked non-null.
        unsafe { *out = boxed_field(f) };
        Ok(())
    })
}

/// Loads an SWF1 file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shannop_field_read(
    path: *const c_char,
    out: *mut *mut ShannopField,
) -> ShannopStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null());
        }
        // SAFETY: forwarded contract.
        let p = unsafe { path_arg(path) }?;
        let f = swf1::load(p).map_err(lib_err)?;
        // SAFETY: `out` checked non-null.
        unsafe { *out = boxed_field(f) };
        Ok(())
    })
}

/// Writes an SWF1 file.
///
/// # Safety
/// `field` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn shannop_field_write(
    field: *const ShannopField,
    path: *const c_char,
) -> ShannopStatus {
    guarded(|| {
        // SAFETY: forwarded contract.
        let (f, p) = unsafe { (field_ref(field)?, path_arg(path)?) };
        swf1::save(p, f).map_err(lib_err)
    })
}

/// Number of samples (`components * points`); 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_field_len(field: *const ShannopField) -> usize {
    // SAFETY: forwarded contract.
    unsafe { field.as_ref() }.map_or(0, |f| f.inner.values().len())
}

/// Number of components; 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_field_components(field: *const ShannopField) -> usize {
    // SAFETY: forwarded contract.
    unsafe { field.as_ref() }.map_or(0, |f| f.inner.components())
}

/// Borrowed pointer to the samples, valid while the handle lives.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_field_values(field: *const ShannopField) -> *const f64 {
    // SAFETY: forwarded contract.
    unsafe { field.as_ref() }.map_or(ptr::null(), |f| f.inner.values().as_ptr())
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shannop_field_free(field: *mut ShannopField) {
    if !field.is_null() {
        // SAFETY: allocated by `boxed_field`.
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Solves `(Id − αΔ)u = v` by band-preconditioned Richardson iteration.
/// On [`ShannopStatus::Diverged`] `out_report` still receives the report and
/// `out_u` is null.
///
/// # Safety
/// `v` must be a live handle; `out_u` and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn shannop_solve_ilap(
    v: *const ShannopField,
    alpha: f64,
    scheme: ShannopScheme,
    packet_depth: u32,
    tol: f64,
    max_iter: usize,
    out_u: *mut *mut ShannopField,
    out_report: *mut *mut ShannopReport,
) -> ShannopStatus {
    guarded(|| {
        if out_u.is_null() || out_report.is_null() {
            return Err(null());
        }
        // SAFETY: outputs checked non-null.
        unsafe {
            *out_u = ptr::null_mut();
            *out_report = ptr::null_mut();
        }
        // SAFETY: forwarded contract.
        let v = unsafe { field_ref(v) }?;
        let base = match scheme {
            ShannopScheme::Tensorial => BaseScheme::Tensorial,
            ShannopScheme::Mra => BaseScheme::Mra,
        };
        let p = Arc::new(build_partition(v.grid(), base, packet_depth).map_err(lib_err)?);
        let pc = implicit_laplacian_precond(alpha, &p).map_err(lib_err)?;
        match richardson_solve(&SymbolExpr::ImplicitLaplacian(alpha), &pc, v, &config(tol, max_iter)) {
            Ok((u, rep)) => {
                // SAFETY: outputs checked non-null.
                unsafe {
                    *out_u = boxed_field(u);
                    *out_report = boxed_report(rep);
                }
                Ok(())
            }
            Err(Error::Diverged { report }) => {
                // SAFETY: outputs checked non-null.
                unsafe { *out_report = boxed_report(*report) };
                Err(fail(ShannopStatus::Diverged, "iteration diverged"))
            }
            Err(e) => Err(lib_err(e)),
        }
    })
}

/// Splits a `d`-component field into divergence-free and gradient parts with
/// the iterative band projector on a tensorial partition.
///
/// # Safety
/// `u` must be a live handle; the three outputs writable.
#[no_mangle]
pub unsafe extern "C" fn shannop_helmholtz(
    u: *const ShannopField,
    packet_depth: u32,
    tol: f64,
    max_iter: usize,
    out_div: *mut *mut ShannopField,
    out_curl: *mut *mut ShannopField,
    out_report: *mut *mut ShannopReport,
) -> ShannopStatus {
    guarded(|| {
        if out_div.is_null() || out_curl.is_null() || out_report.is_null() {
            return Err(null());
        }
        // SAFETY: outputs checked non-null.
        unsafe {
            *out_div = ptr::null_mut();
            *out_curl = ptr::null_mut();
            *out_report = ptr::null_mut();
        }
        // SAFETY: forwarded contract.
        let u = unsafe { field_ref(u) }?;
        let p = Arc::new(
            build_partition(u.grid(), BaseScheme::Tensorial, packet_depth).map_err(lib_err)?,
        );
        match helmholtz_decompose(u, &p, &config(tol, max_iter)) {
            Ok((d, c, rep)) => {
                // SAFETY: outputs checked non-null.
                unsafe {
                    *out_div = boxed_field(d);
                    *out_curl = boxed_field(c);
                    *out_report = boxed_report(rep);
                }
                Ok(())
            }
            Err(Error::Diverged { report }) => {
                // SAFETY: outputs checked non-null.
                unsafe { *out_report = boxed_report(*report) };
                Err(fail(ShannopStatus::Diverged, "iteration diverged"))
            }
            Err(e) => Err(lib_err(e)),
        }
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_report_iterations(report: *const ShannopReport) -> usize {
    // SAFETY: forwarded contract.
    unsafe { report.as_ref() }.map_or(0, |r| r.inner.iterations)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_report_converged(report: *const ShannopReport) -> bool {
    // SAFETY: forwarded contract.
    unsafe { report.as_ref() }.is_some_and(|r| r.inner.converged)
}

/// Fitted asymptotic rate, or NaN when too few residuals were recorded.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_report_fitted_rate(report: *const ShannopReport) -> f64 {
    // SAFETY: forwarded contract.
    unsafe { report.as_ref() }
        .and_then(|r| r.inner.fitted_rate)
        .unwrap_or(f64::NAN)
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_report_theoretical_rate(report: *const ShannopReport) -> f64 {
    // SAFETY: forwarded contract.
    unsafe { report.as_ref() }.map_or(f64::NAN, |r| r.inner.theoretical_rate)
}

/// Copies up to `cap` relative residuals into `buf` and returns the total
/// count, so a call with `cap = 0` sizes the buffer.
///
/// # Safety
/// `report` must be null or a live handle; `buf` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn shannop_report_residuals(
    report: *const ShannopReport,
    buf: *mut f64,
    cap: usize,
) -> usize {
    // SAFETY: forwarded contract.
    let Some(r) = (unsafe { report.as_ref() }) else {
        return 0;
    };
    let h = &r.inner.residual_history;
    if !buf.is_null() {
        let n = h.len().min(cap);
        // SAFETY: caller guarantees `cap` writable values.
        unsafe { ptr::copy_nonoverlapping(h.as_ptr(), buf, n) };
    }
    h.len()
}

/// Report as JSON; release with [`shannop_string_free`]. Null on a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn shannop_report_to_json(report: *const ShannopReport) -> *mut c_char {
    // SAFETY: forwarded contract.
    match unsafe { report.as_ref() } {
        Some(r) => CString::new(r.inner.to_json())
            .map(CString::into_raw)
            .unwrap_or(ptr::null_mut()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shannop_report_free(report: *mut ShannopReport) {
    if !report.is_null() {
        // SAFETY: allocated by `boxed_report`.
        drop(unsafe { Box::from_raw(report) });
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shannop_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// `¼(a/b + b/a)² − 1`.
#[no_mangle]
pub extern "C" fn shannop_rate_kantorovich(a: f64, b: f64) -> f64 {
    rate_kantorovich(a, b)
}

/// `α(b² − a²) / (2 + α(a² + b²))`.
#[no_mangle]
pub extern "C" fn shannop_rate_implicit_laplacian(alpha: f64, a: f64, b: f64) -> f64 {
    rate_implicit_laplacian(alpha, a, b)
}
