//! C ABI over `phasecert`.
//!
//! Every function returns a [`PcStatus`]. On failure the message is kept in
//! a thread-local slot readable through [`pc_last_error`]. Fields are opaque
//! [`PcField`] handles released with [`pc_field_free`]; strings handed out by
//! the library are released with [`pc_string_free`]. Panics never cross the
//! boundary; they surface as `PC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use phasecert::grid::{Field, PhaseSpaceGrid};
use phasecert::io::{read_field, write_field, FieldFormat};
use phasecert::json::to_json_string;
use phasecert::moments::moment_report;
use phasecert::report::{certify, realize, RunConfig};
use phasecert::states::StateSpec;
use phasecert::symplectic::symplectic_spectrum;
use phasecert::transforms::symplectic_ft;
use phasecert::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// Bad argument, config, state description or file contents.
    Invalid = 3,
    /// A numerical precondition failed (singular, non-finite, unresolved, ...).
    Numerical = 4,
    Io = 5,
    /// An output buffer is too small.
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque field handle.
pub struct PcField {
    inner: Field,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn classify(e: &Error) -> PcStatus {
    match e {
        Error::Io(_) => PcStatus::Io,
        Error::InvalidAxis(_)
        | Error::InvalidArgument(_)
        | Error::InvalidWeights(_)
        | Error::DimensionMismatch { .. }
        | Error::GridMismatch
        | Error::Reciprocity(_)
        | Error::BudgetExceeded(_)
        | Error::NotAsp
        | Error::Format(_)
        | Error::Config(_)
        | Error::Json(_) => PcStatus::Invalid,
        _ => PcStatus::Numerical,
    }
}

struct Fail(PcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(classify(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            PcStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PcStatus::Null, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(PcStatus::Utf8, format!("{what} is not UTF-8")))
}

unsafe fn field_arg<'a>(p: *const PcField) -> Result<&'a Field, Fail> {
    p.as_ref().map(|f| &f.inner).ok_or_else(|| null("field"))
}

unsafe fn put_field(out: *mut *mut PcField, field: Field) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(PcField { inner: field }));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| Fail(PcStatus::Invalid, "string contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Releases a field handle. Null is ignored.
///
/// # Safety
/// `field` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pc_field_free(field: *mut PcField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Builds a field from a state description (JSON, or the `kind:key=value`
/// shorthand). `grid_points == 0` and `half_extent <= 0` select defaults.
///
/// # Safety
/// `state` must be a NUL-terminated string, `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_field_from_state(
    state: *const c_char,
    grid_points: usize,
    half_extent: f64,
    hbar: f64,
    out: *mut *mut PcField,
) -> PcStatus {
    guard(|| {
        let text = str_arg(state, "state")?;
        let spec: StateSpec = phasecert::report::parse_state_arg(text)?;
        let mut cfg = RunConfig::new(spec);
        if grid_points > 0 {
            cfg.grid_points = grid_points;
        }
        if half_extent > 0.0 {
            cfg.half_extent = Some(half_extent);
        }
        cfg.hbar = hbar;
        put_field(out, realize(&cfg)?.field)
    })
}

/// Builds a field on a uniform grid with `points` samples on each of the
/// `2·dim_n` axes, each spanning `[-half_extent, half_extent)`. `values`
/// holds `2·points^(2·dim_n)` doubles, interleaved `(re, im)`, row-major in
/// the order `x_1..x_n, p_1..p_n`.
///
/// # Safety
/// `values` must point to `values_len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_field_from_values(
    dim_n: usize,
    points: usize,
    half_extent: f64,
    hbar: f64,
    values: *const f64,
    values_len: usize,
    out: *mut *mut PcField,
) -> PcStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let grid = PhaseSpaceGrid::uniform(dim_n, points, half_extent, hbar)?;
        if values_len != 2 * grid.len() {
            return Err(Fail(
                PcStatus::Invalid,
                format!("expected {} doubles, got {values_len}", 2 * grid.len()),
            ));
        }
        let raw = std::slice::from_raw_parts(values, values_len);
        let vals = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        put_field(out, Field::new(grid, vals, "ffi")?)
    })
}

/// Reads a binary or CSV field file.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_field_load(path: *const c_char, out: *mut *mut PcField) -> PcStatus {
    guard(|| {
        let p = str_arg(path, "path")?;
        put_field(out, read_field(Path::new(p))?)
    })
}

/// Writes a field file; `csv != 0` selects CSV, otherwise binary.
///
/// # Safety
/// `field` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pc_field_save(field: *const PcField, path: *const c_char, csv: i32) -> PcStatus {
    guard(|| {
        let f = field_arg(field)?;
        let p = str_arg(path, "path")?;
        let format = if csv != 0 { FieldFormat::Csv } else { FieldFormat::Binary };
        write_field(Path::new(p), f, format)?;
        Ok(())
    })
}

/// Number of complex samples; 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_field_len(field: *const PcField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.values().len())
}

/// Half-dimension `n`; 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_field_dim(field: *const PcField) -> usize {
    field.as_ref().map_or(0, |f| f.inner.dim_n())
}

/// Copies the samples as interleaved `(re, im)` doubles. `buf_len` counts
/// doubles and must be at least `2·pc_field_len`.
///
/// # Safety
/// `buf` must point to `buf_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_field_values(field: *const PcField, buf: *mut f64, buf_len: usize) -> PcStatus {
    guard(|| {
        let f = field_arg(field)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = 2 * f.values().len();
        if buf_len < need {
            return Err(Fail(PcStatus::BufferTooSmall, format!("need {need} doubles, got {buf_len}")));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (pair, z) in out.chunks_exact_mut(2).zip(f.values()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// Symplectic Fourier transform; the result lives on the dual grid.
///
/// # Safety
/// `field` must be a live handle, `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_symplectic_ft(field: *const PcField, out: *mut *mut PcField) -> PcStatus {
    guard(|| {
        let f = field_arg(field)?;
        put_field(out, symplectic_ft(f)?)
    })
}

/// Mass, mean, covariance, purity and boundary fraction as JSON.
///
/// # Safety
/// `field` must be a live handle, `out` a writable pointer. Free the string
/// with [`pc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pc_moment_report_json(field: *const PcField, out: *mut *mut c_char) -> PcStatus {
    guard(|| {
        let f = field_arg(field)?;
        put_string(out, to_json_string(&moment_report(f)?)?)
    })
}

/// Runs a certification from a JSON run config (`{"state": {...}, ...}`)
/// and returns the bundle as JSON. `exit_code` (may be null) receives the
/// CLI exit code: 0 pass, 1 fail, 2 indeterminate, 3 certificate error.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_certify_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
    exit_code: *mut i32,
) -> PcStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let cfg: RunConfig = serde_json::from_str(text).map_err(Error::from)?;
        let bundle = certify(&cfg)?;
        put_string(out, to_json_string(&bundle)?)?;
        if !exit_code.is_null() {
            *exit_code = bundle.outcome.exit_code();
        }
        Ok(())
    })
}

/// Symplectic eigenvalues of a symmetric positive-definite `side × side`
/// row-major matrix (`side` even). Writes `side / 2` ascending values.
///
/// # Safety
/// `matrix` must hold `side·side` doubles and `values` `side / 2` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_symplectic_spectrum(matrix: *const f64, side: usize, values: *mut f64) -> PcStatus {
    guard(|| {
        if matrix.is_null() {
            return Err(null("matrix"));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        let m = DMatrix::from_row_slice(side, side, std::slice::from_raw_parts(matrix, side * side));
        let spec = symplectic_spectrum(&m)?;
        ptr::copy_nonoverlapping(spec.values.as_ptr(), values, spec.values.len());
        Ok(())
    })
}
